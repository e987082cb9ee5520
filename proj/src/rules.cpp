#include "natlat/rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "natlat/random.hpp"
#include "natlat/text.hpp"

namespace natlat {

void Derivation::claim_name(const std::string& name) const {
  if (name.empty()) throw InvalidArgument("empty judgment name");
  if (judgments_.count(name)) throw InvalidArgument("judgment '" + name + "' already exists");
}

void Derivation::bind_epsilon(const std::string& epsilon_name) {
  if (epsilon_name.empty()) throw InvalidArgument("empty epsilon name");
  if (std::find(epsilon_names_.begin(), epsilon_names_.end(), epsilon_name) != epsilon_names_.end()) {
    throw InvalidArgument("epsilon '" + epsilon_name + "' is already bound");
  }
  epsilon_names_.push_back(epsilon_name);
}

void Derivation::add_premise(const std::string& name, Dag graph, const std::string& epsilon_name) {
  if (!steps_.empty()) throw InvalidArgument("premises must come before steps");
  claim_name(name);
  bind_epsilon(epsilon_name);
  judgments_[name] = DiagramJudgment{std::move(graph), EpsilonExpr::named(epsilon_name)};
  premise_order_.push_back(name);
}

void Derivation::add_budget(const std::string& epsilon_name, Dag target) {
  if (!steps_.empty()) throw InvalidArgument("budgets must come before steps");
  bind_epsilon(epsilon_name);
  budgets_[epsilon_name] = BudgetPremise{epsilon_name, std::move(target)};
}

bool Derivation::has_judgment(const std::string& name) const { return judgments_.count(name) > 0; }

const DiagramJudgment& Derivation::judgment(const std::string& name) const {
  const auto it = judgments_.find(name);
  if (it == judgments_.end()) throw InvalidArgument("no judgment named '" + name + "'");
  return it->second;
}

Names Derivation::epsilon_names() const { return epsilon_names_; }

const DiagramJudgment& Derivation::record(DerivationStep step) {
  claim_name(step.output);
  for (const auto& n : step.result.epsilon.names()) {
    if (std::find(epsilon_names_.begin(), epsilon_names_.end(), n) == epsilon_names_.end()) {
      throw InvalidArgument("epsilon '" + n + "' is not bound by any premise");
    }
  }
  judgments_[step.output] = step.result;
  steps_.push_back(std::move(step));
  return judgments_[steps_.back().output];
}

// ---------------------------------------------------------------------------
// Rules

namespace {

Dag nodes_of(const Dag& g) {
  Dag out;
  for (const auto& n : g.nodes()) out.add_node(n, g.variable_of(n));
  return out;
}

}  // namespace

const DiagramJudgment& frankenstein(Derivation& d, const Names& inputs, const std::map<std::string, std::size_t>& selector,
                                    const std::string& output) {
  if (inputs.empty()) throw InvalidArgument("frankenstein needs at least one input");
  std::vector<Dag> graphs;
  EpsilonExpr eps;
  for (const auto& name : inputs) {
    const auto& j = d.judgment(name);
    graphs.push_back(j.graph);
    eps += j.epsilon;
  }
  for (std::size_t k = 1; k < graphs.size(); ++k) {
    if (!graphs[0].same_nodes(graphs[k])) {
      throw RuleInapplicable("frankenstein: '" + inputs[0] + "' and '" + inputs[k] + "' are over different nodes");
    }
  }
  if (!common_topological_order(graphs)) {
    const auto conflict = order_conflict(graphs);
    throw RuleInapplicable("frankenstein: inputs have no common topological order ('" + conflict->first + "' and '" +
                           conflict->second + "' are ordered both ways)");
  }
  std::vector<std::string> params;
  for (const auto& [node, k] : selector) {
    if (!graphs[0].contains(node)) throw InvalidArgument("frankenstein: selector names unknown node '" + node + "'");
    if (k >= graphs.size()) throw InvalidArgument("frankenstein: selector index out of range for '" + node + "'");
    params.push_back(node + "=" + std::to_string(k));
  }

  Dag out = nodes_of(graphs[0]);
  for (const auto& node : graphs[0].nodes()) {
    const auto it = selector.find(node);
    const auto& src = graphs[it == selector.end() ? 0 : it->second];
    for (const auto& parent : src.parents_of(node)) out.add_edge(parent, node);
  }
  return d.record({"frankenstein", inputs, std::move(params), output, {std::move(out), std::move(eps)}});
}

const DiagramJudgment& factorization_transfer(Derivation& d, const Dag& target, const std::string& budget,
                                              const std::string& output) {
  const auto it = d.budgets().find(budget);
  if (it == d.budgets().end()) throw InvalidArgument("transfer: no budget named '" + budget + "'");
  const auto& declared = it->second.target;
  if (!declared.same_nodes(target)) throw RuleInapplicable("transfer: target and budget diagram differ in nodes");
  if (const auto w = unimplied_statement(declared, target)) {
    throw RuleInapplicable("transfer: budget diagram does not imply the target (" + w->to_string() + ")");
  }
  return d.record({"transfer", {}, {budget}, output, {target, EpsilonExpr::named(budget)}});
}

const DiagramJudgment& bookkeeping(Derivation& d, const std::string& input, const Dag& target,
                                   const std::string& output) {
  const auto& j = d.judgment(input);
  if (!j.graph.same_nodes(target)) throw RuleInapplicable("bookkeeping: '" + input + "' and target differ in nodes");
  if (const auto w = unimplied_statement(j.graph, target)) {
    throw RuleInapplicable("bookkeeping: '" + input + "' does not imply the target; " + w->to_string() +
                           " is not implied");
  }
  EpsilonExpr eps = j.epsilon;
  return d.record({"bookkeeping", {input}, {}, output, {target, std::move(eps)}});
}

std::optional<DeterminismShape> determinism_shape(const Dag& g) {
  if (g.size() != 3 || g.edges().size() != 2) return std::nullopt;
  for (std::size_t x = 0; x < 3; ++x) {
    if (!g.parents(x).empty() || g.children(x).size() != 2) continue;
    const auto a = g.children(x)[0], b = g.children(x)[1];
    const auto& y = g.variable_at(a);
    if (g.variable_at(b) != y || y == g.variable_at(x)) return std::nullopt;
    return DeterminismShape{g.nodes()[x], y};
  }
  return std::nullopt;
}

std::string fresh_node_name(const Dag& g, const std::string& variable) {
  if (!g.contains(variable)) return variable;
  std::string name = variable + "~";
  for (int k = 2; g.contains(name); ++k) name = variable + "~" + std::to_string(k);
  return name;
}

const DiagramJudgment& dangly_bit(Derivation& d, const std::string& input, const std::string& determinism,
                                  const std::string& attach_at, const std::string& output) {
  const auto& in = d.judgment(input);
  const auto& det = d.judgment(determinism);
  const auto shape = determinism_shape(det.graph);
  if (!shape) throw RuleInapplicable("dangly: '" + determinism + "' is not a Y <- X -> Y diagram");
  if (!in.graph.contains(attach_at)) {
    throw RuleInapplicable("dangly: attach point '" + attach_at + "' is not a node of '" + input + "'");
  }
  const auto& x = in.graph.variable_of(attach_at);
  if (x != det.graph.variable_of(shape->source)) {
    throw RuleInapplicable("dangly: '" + attach_at + "' denotes " + x + " but '" + determinism + "' is determined by " +
                           det.graph.variable_of(shape->source));
  }
  Dag out = in.graph;
  const auto node = fresh_node_name(out, shape->determined);
  out.add_node(node, node == shape->determined ? std::string{} : shape->determined);
  out.add_edge(attach_at, node);
  return d.record({"dangly", {input, determinism}, {attach_at, node}, output, {std::move(out), in.epsilon + det.epsilon}});
}

// ---------------------------------------------------------------------------
// Validation

namespace {

// Random P that factors over g exactly when g's copies hang off consistent
// parents: variables follow g's topological order, a variable gets the
// union of its nodes' parents, and copied variables are deterministic.
JointDistribution premise_exact(Rng& rng, const std::vector<VarSpec>& vars, const Dag& g, double alpha) {
  Names order;
  const auto topo = topological_order(g);
  for (const auto& n : *topo) {
    const auto& v = g.variable_of(n);
    if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
  }
  for (const auto& v : vars) {
    if (std::find(order.begin(), order.end(), v.name) == order.end()) order.push_back(v.name);
  }
  auto var_index = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find_if(vars.begin(), vars.end(), [&](const VarSpec& s) { return s.name == name; }) - vars.begin());
  };
  auto pos = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), name) - order.begin());
  };

  struct Cpt {
    std::size_t var;
    std::vector<std::size_t> parents;
    std::vector<Eigen::ArrayXd> rows;
  };
  std::vector<Cpt> cpts;
  for (std::size_t o = 0; o < order.size(); ++o) {
    const auto& v = order[o];
    std::set<std::size_t> pa;
    std::size_t denoting = 0;
    for (const auto& n : g.nodes()) {
      if (g.variable_of(n) != v) continue;
      ++denoting;
      for (const auto& parent : g.parents_of(n)) {
        const auto& u = g.variable_of(parent);
        if (pos(u) < o) pa.insert(var_index(u));
      }
    }
    if (denoting == 0) {
      for (std::size_t e = 0; e < o; ++e) pa.insert(var_index(order[e]));
    }
    Cpt c{var_index(v), {pa.begin(), pa.end()}, {}};
    std::size_t configs = 1;
    for (auto p : c.parents) configs *= vars[p].cardinality;
    const auto card = static_cast<Eigen::Index>(vars[c.var].cardinality);
    for (std::size_t r = 0; r < configs; ++r) {
      if (denoting > 1) {
        Eigen::ArrayXd row = Eigen::ArrayXd::Zero(card);
        row[static_cast<Eigen::Index>(uniform_index(rng, vars[c.var].cardinality))] = 1.0;
        c.rows.push_back(std::move(row));
      } else {
        c.rows.push_back(dirichlet(rng, card, alpha));
      }
    }
    cpts.push_back(std::move(c));
  }
  return JointDistribution::tabulate(vars, [&](const Assignment& a) {
    double prob = 1.0;
    for (const auto& c : cpts) {
      std::size_t row = 0;
      for (auto p : c.parents) row = row * vars[p].cardinality + a[p];
      prob *= c.rows[row][static_cast<Eigen::Index>(a[c.var])];
    }
    return prob;
  });
}

struct Source {
  const Dag* graph;
  std::string budget;  // empty for diagram premises
};

ValidationReport run_validation(const Derivation& d, const SamplerConfig& config, const std::vector<std::size_t>& steps,
                                const DeterminesClaim* claim) {
  if (config.samples == 0) throw InvalidArgument("sample count must be at least 1");
  if (config.min_cardinality < 1 || config.max_cardinality < config.min_cardinality) {
    throw InvalidArgument("bad cardinality range");
  }
  for (auto s : steps) {
    if (s >= d.steps().size()) throw InvalidArgument("step index out of range");
  }
  std::vector<std::size_t> checked = steps;
  if (checked.empty()) {
    for (std::size_t s = 0; s < d.steps().size(); ++s) checked.push_back(s);
  }

  std::vector<Source> sources;
  Names base;
  auto add_vars = [&](const Dag& g) {
    for (const auto& v : g.variables()) {
      if (std::find(base.begin(), base.end(), v) == base.end()) base.push_back(v);
    }
  };
  for (const auto& name : d.premise_names()) {
    sources.push_back({&d.judgment(name).graph, {}});
    add_vars(d.judgment(name).graph);
  }
  for (const auto& [name, b] : d.budgets()) {
    sources.push_back({&b.target, name});
    add_vars(b.target);
  }
  for (const auto& s : d.steps()) add_vars(s.result.graph);
  if (sources.empty()) throw InvalidArgument("derivation has no premises");

  ValidationReport r;
  r.min_slack_bits = std::numeric_limits<double>::infinity();
  r.max_slack_bits = -std::numeric_limits<double>::infinity();
  auto check = [&](double value, double bound, const std::string& what, std::size_t sample) {
    ++r.checks;
    if (std::isfinite(bound)) {
      r.min_slack_bits = std::min(r.min_slack_bits, bound - value);
      r.max_slack_bits = std::max(r.max_slack_bits, bound - value);
    }
    if (value > bound + 1e-9) {
      ++r.violations;
      if (r.failures.size() < 8) {
        r.failures.push_back("sample " + std::to_string(sample) + ": " + what + " error " + format_shortest(value) +
                             " exceeds bound " + format_shortest(bound));
      }
    }
  };

  for (std::size_t s = 0; s < config.samples; ++s) {
    auto rng = stream_rng(config.seed, s);
    std::vector<VarSpec> vars;
    for (const auto& v : base) {
      vars.push_back({v, config.min_cardinality + uniform_index(rng, config.max_cardinality - config.min_cardinality + 1)});
    }
    const auto j = uniform_index(rng, sources.size());
    const auto mode = uniform_index(rng, 8);
    const double alpha = uniform_index(rng, 2) ? 1.0 : 0.3;
    const auto q = premise_exact(rng, vars, *sources[j].graph, alpha);
    JointDistribution p = q;
    if (mode == 0) {
      p = random_joint(rng, vars, alpha);
    } else if (mode != 1) {
      p = mix(q, random_joint(rng, vars, 1.0), uniform_real(rng, config.lambda_min, 1.0));
    }

    std::map<std::string, double> actual;
    for (const auto& name : d.premise_names()) {
      const auto& jd = d.judgment(name);
      actual[jd.epsilon.names().front()] = diagram_error(p, jd.graph);
    }
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const auto& b = sources[k].budget;
      if (b.empty()) continue;
      const bool q_exact = k == j && diagram_error(q, *sources[k].graph) <= 1e-12;
      actual[b] = q_exact ? kl_divergence(p, q) : diagram_error(p, *sources[k].graph);
    }

    for (auto idx : checked) {
      const auto& step = d.steps()[idx];
      check(diagram_error(p, step.result.graph), step.result.epsilon.evaluate(actual),
            "step " + std::to_string(idx + 1) + " (" + step.rule + " -> " + step.output + ")", s);
    }
    if (claim && !d.steps().empty()) {
      check(claim_error(p, *claim), d.steps().back().result.epsilon.evaluate(actual), "claim", s);
    }
    ++r.samples;
  }
  return r;
}

}  // namespace

ValidationReport validate_derivation(const Derivation& d, const SamplerConfig& config,
                                     const std::vector<std::size_t>& steps) {
  return run_validation(d, config, steps, nullptr);
}

ValidationReport validate_rule(const Derivation& d, std::size_t step, const SamplerConfig& config) {
  return run_validation(d, config, {step}, nullptr);
}

ValidationReport validate_script(const DerivationScript& script, const SamplerConfig& config) {
  return run_validation(script.derivation, config, {}, script.claim ? &*script.claim : nullptr);
}

// ---------------------------------------------------------------------------
// Script format

DerivationScript parse_derivation_script(std::string_view text, const DagResolver& resolve) {
  const auto lines = tokenize_lines(text);
  DerivationScript script;
  auto& d = script.derivation;
  std::map<std::string, Dag> dags;

  auto dag_ref = [&](const std::string& name, int line) -> Dag {
    const auto it = dags.find(name);
    if (it != dags.end()) return it->second;
    if (!resolve) throw ParseError(line, "unknown dag '" + name + "'");
    try {
      return resolve(name);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line, "dag '" + name + "': " + e.what());
    }
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto& t = line.tokens;
    if (script.claim) throw ParseError(line.number, "nothing may follow the claim");
    try {
      if (t[0] == "dag") {
        if (t.size() != 2) throw ParseError(line.number, "expected 'dag <name>'");
        if (dags.count(t[1])) throw ParseError(line.number, "dag '" + t[1] + "' defined twice");
        std::size_t end = i + 1;
        while (end < lines.size() && lines[end].tokens[0] != "end") ++end;
        if (end == lines.size()) throw ParseError(line.number, "dag '" + t[1] + "' has no 'end'");
        if (lines[end].tokens.size() != 1) throw ParseError(lines[end].number, "expected bare 'end'");
        dags[t[1]] = parse_dag(std::span<const TextLine>(lines).subspan(i + 1, end - i - 1));
        i = end;
      } else if (t[0] == "premise") {
        if (t.size() != 5 || t[3] != "eps") throw ParseError(line.number, "expected 'premise <name> <dag> eps <eps>'");
        d.add_premise(t[1], dag_ref(t[2], line.number), t[4]);
      } else if (t[0] == "budget") {
        if (t.size() != 3) throw ParseError(line.number, "expected 'budget <eps> <dag>'");
        d.add_budget(t[1], dag_ref(t[2], line.number));
      } else if (t[0] == "step") {
        if (t.size() < 4 || t[t.size() - 2] != "->") throw ParseError(line.number, "expected 'step <rule> ... -> <name>'");
        const auto& out = t.back();
        const std::vector<std::string> args(t.begin() + 2, t.end() - 2);
        const auto& rule = t[1];
        if (rule == "frankenstein") {
          Names inputs;
          std::map<std::string, std::size_t> selector;
          std::size_t a = 0;
          for (; a < args.size() && args[a] != "pick"; ++a) inputs.push_back(args[a]);
          for (++a; a < args.size(); ++a) {
            const auto eq = args[a].find('=');
            if (eq == std::string::npos || eq == 0) throw ParseError(line.number, "expected '<node>=<input index>'");
            selector[args[a].substr(0, eq)] = parse_index(args[a].substr(eq + 1), line.number);
          }
          frankenstein(d, inputs, selector, out);
        } else if (rule == "transfer") {
          if (args.size() != 2) throw ParseError(line.number, "expected 'step transfer <dag> <eps> -> <name>'");
          factorization_transfer(d, dag_ref(args[0], line.number), args[1], out);
        } else if (rule == "bookkeeping") {
          if (args.size() != 2) throw ParseError(line.number, "expected 'step bookkeeping <input> <dag> -> <name>'");
          bookkeeping(d, args[0], dag_ref(args[1], line.number), out);
        } else if (rule == "dangly") {
          if (args.size() != 3) {
            throw ParseError(line.number, "expected 'step dangly <input> <determinism> <node> -> <name>'");
          }
          dangly_bit(d, args[0], args[1], args[2], out);
        } else {
          throw ParseError(line.number, "unknown rule '" + rule + "'");
        }
      } else if (t[0] == "claim") {
        if (t.size() != 4 || t[1] != "determines") throw ParseError(line.number, "expected 'claim determines <L> <Lp>'");
        if (d.steps().empty()) throw ParseError(line.number, "claim before any step");
        DeterminesClaim c{t[2], t[3]};
        check_determines_claim(d, c);
        script.claim = c;
      } else {
        throw ParseError(line.number, "unknown directive '" + t[0] + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line.number, e.what());
    }
  }
  return script;
}

void check_determines_claim(const Derivation& d, const DeterminesClaim& claim) {
  if (d.steps().empty()) throw RuleInapplicable("claim: derivation has no steps");
  const auto& g = d.steps().back().result.graph;
  std::vector<std::string> sources, targets;
  for (const auto& n : g.nodes()) {
    if (g.variable_of(n) == claim.determiner) sources.push_back(n);
    if (g.variable_of(n) == claim.determined) targets.push_back(n);
  }
  if (sources.size() != 1) throw RuleInapplicable("claim: expected one node for " + claim.determiner);
  if (!g.parents_of(sources[0]).empty()) throw RuleInapplicable("claim: " + claim.determiner + " has parents");
  if (targets.size() != 2) throw RuleInapplicable("claim: expected two nodes for " + claim.determined);
  for (const auto& n : targets) {
    if (g.parents_of(n) != Names{sources[0]}) {
      throw RuleInapplicable("claim: '" + n + "' must have " + claim.determiner + " as its only parent");
    }
  }
}

double claim_error(const JointDistribution& p, const DeterminesClaim& claim) {
  return conditional_entropy(p, {claim.determined}, {claim.determiner});
}

Theorem1Replay replay_theorem1(const DerivationScript& script) {
  const auto& d = script.derivation;
  if (!script.claim) throw RuleInapplicable("script has no 'claim determines' line");
  if (!d.budgets().empty() || d.premise_names().size() != 3) {
    throw RuleInapplicable("expected exactly three premises (one mediation, two redundancy) and no budgets");
  }
  Theorem1Replay r;
  r.claim = *script.claim;
  std::map<std::string, EpsilonExpr> rename;
  for (const auto& name : d.premise_names()) {
    const auto& j = d.judgment(name);
    const auto eps = j.epsilon.names().front();
    const auto shape = determinism_shape(j.graph);
    if (shape) {
      if (shape->determined != r.claim.determined) {
        throw RuleInapplicable("premise '" + name + "' does not concern " + r.claim.determined);
      }
      r.redundancy_epsilons.push_back(eps);
      rename[eps] = EpsilonExpr::named("e_red");
    } else {
      if (!r.mediation_epsilon.empty()) throw RuleInapplicable("more than one mediation premise");
      if (!j.graph.contains(r.claim.determiner)) {
        throw RuleInapplicable("mediation premise '" + name + "' lacks " + r.claim.determiner);
      }
      r.mediation_epsilon = eps;
      rename[eps] = EpsilonExpr::named("e_med");
    }
  }
  if (r.redundancy_epsilons.size() != 2) throw RuleInapplicable("expected two redundancy premises");
  check_determines_claim(d, r.claim);
  r.conclusion = d.steps().back().result;
  r.bound = r.conclusion.epsilon.substitute(rename);
  return r;
}

Theorem1Replay replay_theorem1(std::string_view text, const DagResolver& resolve) {
  return replay_theorem1(parse_derivation_script(text, resolve));
}

}  // namespace natlat
