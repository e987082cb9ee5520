#include "natlat/naturality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "natlat/text.hpp"

namespace natlat {

namespace {

void require_disjoint(const std::vector<const Names*>& sets) {
  std::set<std::string> seen;
  for (const auto* s : sets) {
    for (const auto& n : *s) {
      if (!seen.insert(n).second) throw InvalidArgument("variable '" + n + "' appears in two roles");
    }
  }
}

Names concat(const Names& a, const Names& b) {
  Names out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

AgentModel::AgentModel(JointDistribution joint, Names observables, Names latents)
    : joint_(std::move(joint)), observables_(std::move(observables)), latents_(std::move(latents)) {
  if (observables_.size() < 2) throw InvalidArgument("an agent model needs at least two observables");
  if (latents_.empty()) throw InvalidArgument("an agent model needs at least one latent");
  require_disjoint({&observables_, &latents_});
  for (const auto& n : concat(observables_, latents_)) joint_.index_of(n);
  if (observables_.size() + latents_.size() != joint_.arity()) {
    throw InvalidArgument("every variable must be either an observable or a latent");
  }
}

Dag mediation_dag(const AgentModel& m) { return star_dag(m.latents(), m.observables()); }

double mediation_error(const AgentModel& m) { return factorization_error(m.joint(), mediation_dag(m)).epsilon_bits; }

std::vector<double> redundancy_errors(const AgentModel& m) {
  std::vector<double> out;
  out.reserve(m.observables().size());
  for (const auto& x : m.observables()) out.push_back(conditional_entropy(m.joint(), m.latents(), {x}));
  return out;
}

NaturalityReport naturality_report(const AgentModel& m) {
  NaturalityReport r;
  r.eps_mediation_bits = mediation_error(m);
  r.eps_redundancy_bits = redundancy_errors(m);
  r.eps_redundancy_max_bits = *std::max_element(r.eps_redundancy_bits.begin(), r.eps_redundancy_bits.end());
  r.is_exact = r.eps_mediation_bits <= kExactTolerance && r.eps_redundancy_max_bits <= kExactTolerance;
  return r;
}

double theorem1_bound(double eps_mediation, double eps_redundancy_max) {
  return eps_mediation + 2.0 * eps_redundancy_max;
}

EpsilonExpr theorem1_bound_expression() { return EpsilonExpr::named("e_med") + EpsilonExpr::named("e_red", 2.0); }

MediatorRedundCheck mediator_determines_redund(const JointDistribution& p, const Names& observables,
                                               const Names& mediator, const Names& redund) {
  if (observables.size() != 2) {
    throw InvalidArgument("the certified bound covers exactly two observables; chunk them into two blocks first");
  }
  if (mediator.empty() || redund.empty()) throw InvalidArgument("mediator and redund must be nonempty");
  require_disjoint({&observables, &mediator, &redund});

  MediatorRedundCheck c;
  const auto med_names = concat(observables, mediator);
  c.eps_mediation_bits = mediation_error(AgentModel(marginalize(p, med_names), observables, mediator));
  for (const auto& x : observables) c.eps_redundancy_bits.push_back(conditional_entropy(p, redund, {x}));
  c.eps_redundancy_max_bits = *std::max_element(c.eps_redundancy_bits.begin(), c.eps_redundancy_bits.end());
  c.conclusion_bits = conditional_entropy(p, redund, mediator);
  c.bound_bits = theorem1_bound(c.eps_mediation_bits, c.eps_redundancy_max_bits);
  c.slack_bits = c.bound_bits - c.conclusion_bits;
  c.holds = c.conclusion_bits <= c.bound_bits + kExactTolerance;
  return c;
}

TranslatabilityAudit translatability_audit(const AgentModel& alice, double threshold_bits) {
  if (alice.observables().size() != 2) throw InvalidArgument("translatability audit needs exactly two observables");
  if (!(threshold_bits >= 0.0)) throw InvalidArgument("threshold must be non-negative");
  TranslatabilityAudit a;
  a.eps_mediation_bits = mediation_error(alice);
  const auto red = redundancy_errors(alice);
  a.redundancy_x1_bits = red[0];
  a.redundancy_x2_bits = red[1];
  a.threshold_bits = threshold_bits;
  a.pass = a.eps_mediation_bits <= threshold_bits && a.redundancy_x1_bits <= threshold_bits &&
           a.redundancy_x2_bits <= threshold_bits;
  return a;
}

Translation cross_agent_translation(const AgentModel& alice, const AgentModel& bob,
                                    const JointDistribution& coupling, double tolerance) {
  const auto& obs = alice.observables();
  if (std::set<std::string>(obs.begin(), obs.end()) !=
      std::set<std::string>(bob.observables().begin(), bob.observables().end())) {
    throw InvalidArgument("agents name different observables");
  }
  require_disjoint({&obs, &alice.latents(), &bob.latents()});

  auto compare = [&](const JointDistribution& a, const JointDistribution& b, const std::string& what) {
    const auto b_aligned = reorder(b, a.names());
    if (!std::equal(a.variables().begin(), a.variables().end(), b_aligned.variables().begin(),
                    b_aligned.variables().end())) {
      throw ModelDisagreement(what + ": alphabets differ", std::numeric_limits<double>::infinity());
    }
    const double diff = max_abs_difference(a, b_aligned);
    if (diff > tolerance) {
      throw ModelDisagreement(what + ": max cell discrepancy " + format_shortest(diff) + " exceeds " +
                                  format_shortest(tolerance),
                              diff);
    }
  };
  compare(marginalize(alice.joint(), obs), marginalize(bob.joint(), obs), "models disagree on observables");
  compare(alice.joint(), marginalize(coupling, alice.joint().names()), "coupling does not reproduce Alice's model");
  compare(bob.joint(), marginalize(coupling, bob.joint().names()), "coupling does not reproduce Bob's model");

  return {conditional_entropy(coupling, alice.latents(), bob.latents()),
          conditional_entropy(coupling, bob.latents(), alice.latents())};
}

// ---------------------------------------------------------------------------

TheoremInstance sample_theorem_instance(Rng& rng, bool near_deterministic) {
  const std::size_t c1 = 1 + uniform_index(rng, 4);
  const std::size_t c2 = 1 + uniform_index(rng, 4);
  const std::size_t cl = 1 + uniform_index(rng, 4);
  const std::size_t cr = 1 + uniform_index(rng, 4);
  const std::vector<VarSpec> base{{"L", cl}, {"X1", c1}, {"X2", c2}};
  const double alphas[] = {0.1, 0.3, 1.0};
  const double alpha = near_deterministic ? 0.1 : alphas[uniform_index(rng, 3)];
  const double lambda = near_deterministic ? uniform_real(rng, 0.99, 1.0) : uniform_real(rng, 0.8, 1.0);

  // Mediator candidate L over (L, X1, X2).
  std::string kind;
  JointDistribution lx = [&] {
    const Dag star({"L", "X1", "X2"}, {{"L", "X1"}, {"L", "X2"}});
    const std::size_t mode = near_deterministic ? 1 : uniform_index(rng, 3);
    if (mode == 0) {
      kind = "mediator";
      return random_bayes_net(rng, base, star, alpha);
    }
    if (mode == 1) {
      kind = "noisy-mediator";
      return mix(random_bayes_net(rng, base, star, alpha), random_joint(rng, base, alpha), lambda);
    }
    kind = "raw";
    return random_joint(rng, base, alpha);
  }();

  // Redund candidate Lp given (L, X1, X2).
  std::vector<std::size_t> f1(c1), fl(cl);
  for (auto& v : f1) v = uniform_index(rng, cr);
  for (auto& v : fl) v = uniform_index(rng, cr);
  std::vector<Eigen::ArrayXd> noise(cl * c1 * c2);
  for (auto& row : noise) row = dirichlet(rng, static_cast<Eigen::Index>(cr), alpha);
  const std::size_t mode = near_deterministic ? 1 : uniform_index(rng, 4);
  static const char* kRedundKinds[] = {"/function-of-X1", "/noisy-function-of-X1", "/function-of-L", "/raw"};
  kind += kRedundKinds[mode];

  std::vector<VarSpec> vars = base;
  vars.push_back({"Lp", cr});
  auto joint = JointDistribution::tabulate(vars, [&](const Assignment& a) {
    const double pl = lx.prob({a[0], a[1], a[2]});
    const double det_x1 = a[3] == f1[a[1]] ? 1.0 : 0.0;
    const double raw = noise[(a[0] * c1 + a[1]) * c2 + a[2]][static_cast<Eigen::Index>(a[3])];
    switch (mode) {
      case 0: return pl * det_x1;
      case 1: return pl * (lambda * det_x1 + (1.0 - lambda) * raw);
      case 2: return pl * (a[3] == fl[a[0]] ? 1.0 : 0.0);
      default: return pl * raw;
    }
  });
  return {std::move(joint), std::move(kind)};
}

SweepReport theorem_sweep(const SweepOptions& options) {
  if (options.samples == 0) throw InvalidArgument("sample count must be at least 1");
  SweepReport r;
  r.min_slack_bits = std::numeric_limits<double>::infinity();
  r.max_slack_bits = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < options.samples; ++s) {
    auto rng = stream_rng(options.seed, s);
    const auto inst = sample_theorem_instance(rng, options.near_deterministic);
    const auto c = mediator_determines_redund(inst.joint, {"X1", "X2"}, {"L"}, {"Lp"});
    ++r.samples;
    if (!c.holds) ++r.violations;
    r.min_slack_bits = std::min(r.min_slack_bits, c.slack_bits);
    r.max_slack_bits = std::max(r.max_slack_bits, c.slack_bits);
    r.max_conclusion_bits = std::max(r.max_conclusion_bits, c.conclusion_bits);
  }
  return r;
}

// ---------------------------------------------------------------------------

AgentModel parse_agent_model(std::string_view text) {
  auto lines = tokenize_lines(text);
  const auto roles_it = std::find_if(lines.begin(), lines.end(), [](const TextLine& l) { return l.tokens[0] == "roles"; });
  if (roles_it == lines.end()) throw ParseError(0, "missing 'roles obs:<...> latent:<...>' line");
  const TextLine roles = *roles_it;
  lines.erase(roles_it);
  if (std::any_of(lines.begin(), lines.end(), [](const TextLine& l) { return l.tokens[0] == "roles"; })) {
    throw ParseError(roles.number, "more than one 'roles' line");
  }
  Names obs, latents;
  bool have_obs = false, have_latent = false;
  auto split = [&](const std::string& list) {
    Names out;
    std::size_t start = 0;
    while (start <= list.size()) {
      const auto comma = std::min(list.find(',', start), list.size());
      if (comma == start) throw ParseError(roles.number, "empty name in role list");
      out.push_back(list.substr(start, comma - start));
      start = comma + 1;
    }
    return out;
  };
  for (std::size_t t = 1; t < roles.tokens.size(); ++t) {
    const auto& tok = roles.tokens[t];
    if (tok.starts_with("obs:") && !have_obs) {
      obs = split(tok.substr(4));
      have_obs = true;
    } else if (tok.starts_with("latent:") && !have_latent) {
      latents = split(tok.substr(7));
      have_latent = true;
    } else {
      throw ParseError(roles.number, "unexpected role token '" + tok + "'");
    }
  }
  if (!have_obs || !have_latent) throw ParseError(roles.number, "roles line needs both obs: and latent:");
  auto joint = parse_distribution(lines);
  try {
    return AgentModel(std::move(joint), std::move(obs), std::move(latents));
  } catch (const Error& e) {
    throw ParseError(roles.number, e.what());
  }
}

std::string format_agent_model(const AgentModel& m) {
  auto join = [](const Names& ns) {
    std::string s;
    for (std::size_t i = 0; i < ns.size(); ++i) s += (i ? "," : "") + ns[i];
    return s;
  };
  return "roles obs:" + join(m.observables()) + " latent:" + join(m.latents()) + "\n" +
         format_distribution(m.joint());
}

}  // namespace natlat
