#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "natlat/naturality.hpp"

using namespace natlat;

namespace {

// X1, X2 i.i.d. bits with bias 1/4 or 3/4 chosen by a fair latent.
JointDistribution biased_flips() {
  return JointDistribution::tabulate({{"L", 2}, {"X1", 2}, {"X2", 2}}, [](const Assignment& a) {
    const double theta = a[0] == 0 ? 0.25 : 0.75;
    auto flip = [&](std::size_t x) { return x == 1 ? theta : 1.0 - theta; };
    return 0.5 * flip(a[1]) * flip(a[2]);
  });
}

// X1 = X2 = fair bit, plus an extra latent column.
JointDistribution copies_with(const std::function<double(const Assignment&)>& latent) {
  return JointDistribution::tabulate({{"X1", 2}, {"X2", 2}, {"L", 2}}, [&](const Assignment& a) {
    return a[0] == a[1] ? 0.5 * latent(a) : 0.0;
  });
}

}  // namespace

TEST_CASE("mediation error") {
  CHECK(mediation_error(AgentModel(biased_flips(), {"X1", "X2"}, {"L"})) <= 1e-12);

  const auto constant = JointDistribution::tabulate({{"X1", 2}, {"X2", 2}, {"L", 1}},
                                                    [](const Assignment& a) { return a[0] == a[1] ? 0.5 : 0.0; });
  CHECK(mediation_error(AgentModel(constant, {"X1", "X2"}, {"L"})) == doctest::Approx(1.0));
}

TEST_CASE("redundancy errors") {
  const auto copy = copies_with([](const Assignment& a) { return a[2] == a[0] ? 1.0 : 0.0; });
  const auto r = redundancy_errors(AgentModel(copy, {"X1", "X2"}, {"L"}));
  CHECK(r == std::vector<double>{0.0, 0.0});

  const auto noise = copies_with([](const Assignment&) { return 0.5; });
  const auto rn = redundancy_errors(AgentModel(noise, {"X1", "X2"}, {"L"}));
  CHECK(rn[0] == doctest::Approx(1.0));
  CHECK(rn[1] == doctest::Approx(1.0));
}

TEST_CASE("naturality report") {
  SUBCASE("temperature-style: every observable equals the latent") {
    const std::size_t k = 5;
    const auto p = JointDistribution::tabulate({{"T", k}, {"X1", k}, {"X2", k}, {"X3", k}}, [&](const Assignment& a) {
      return (a[1] == a[0] && a[2] == a[0] && a[3] == a[0]) ? 1.0 / k : 0.0;
    });
    const auto r = naturality_report(AgentModel(p, {"X1", "X2", "X3"}, {"T"}));
    CHECK(r.eps_mediation_bits <= 1e-12);
    CHECK(r.eps_redundancy_max_bits == 0.0);
    CHECK(r.is_exact);
  }
  SUBCASE("independent noise latent") {
    const auto noise = copies_with([](const Assignment&) { return 0.5; });
    const auto r = naturality_report(AgentModel(noise, {"X1", "X2"}, {"L"}));
    CHECK(r.eps_redundancy_max_bits == doctest::Approx(1.0));
    CHECK(r.eps_mediation_bits == doctest::Approx(1.0));
    CHECK_FALSE(r.is_exact);
  }
  SUBCASE("composite latents are analyzed jointly") {
    auto rng = stream_rng(3, 0);
    const auto p = fixture::natural(rng, 3, 2, 2);
    // Split L into (L, L mod 2) as two latent variables.
    const auto two = extend_with_function(p, {"M", 2}, [](std::span<const std::size_t> d) { return d[0] % 2; });
    const auto r = naturality_report(AgentModel(two, {"X1", "X2"}, {"L", "M"}));
    CHECK(r.is_exact);
  }
  SUBCASE("model validation") {
    CHECK_THROWS_AS(AgentModel(biased_flips(), {"X1"}, {"L", "X2"}), InvalidArgument);
    CHECK_THROWS_AS(AgentModel(biased_flips(), {"X1", "X2"}, {"X2", "L"}), InvalidArgument);
    CHECK_THROWS_AS(AgentModel(biased_flips(), {"X1", "X2"}, {}), InvalidArgument);
    CHECK_THROWS_AS(AgentModel(biased_flips(), {"X1", "X2"}, {"Q"}), UnknownVariable);
  }
}

TEST_CASE("mediation error is the star-diagram factorization error") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rng = stream_rng(31, s);
    const auto inst = sample_theorem_instance(rng);
    const auto lx = marginalize(inst.joint, {"L", "X1", "X2"});
    const AgentModel m(lx, {"X1", "X2"}, {"L"});
    const Dag star({"L", "X1", "X2"}, {{"L", "X1"}, {"L", "X2"}});
    CHECK(mediation_error(m) == factorization_error(lx, star).epsilon_bits);
  }
}

TEST_CASE("redundancy errors are invariant under latent relabeling") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto rng = stream_rng(32, s);
    const auto inst = sample_theorem_instance(rng);
    const AgentModel m(inst.joint, {"X1", "X2"}, {"L", "Lp"});
    const auto perm = fixture::permutation(rng, inst.joint.variable(inst.joint.index_of("Lp")).cardinality);
    const AgentModel mp(fixture::permute_labels(inst.joint, "Lp", perm), {"X1", "X2"}, {"L", "Lp"});
    const auto a = redundancy_errors(m);
    const auto b = redundancy_errors(mp);
    for (std::size_t i = 0; i < 2; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("mediator determines redund") {
  SUBCASE("exact premises give an exact conclusion") {
    auto rng = stream_rng(5, 0);
    const auto p = fixture::natural(rng, 3, 2, 3);
    const auto f = fixture::function(rng, 3, 2);
    // Lp = f(L) computed from X1 alone; it is also f(X2 / 3).
    const auto pl = extend_with_function(p, {"Lp", 2}, [&](std::span<const std::size_t> d) { return f[d[1] / 2]; });
    const auto c = mediator_determines_redund(pl, {"X1", "X2"}, {"L"}, {"Lp"});
    CHECK(c.eps_mediation_bits <= 1e-12);
    CHECK(c.eps_redundancy_max_bits == 0.0);
    CHECK(c.conclusion_bits == 0.0);
    CHECK(c.holds);
    CHECK(c.slack_bits == c.bound_bits);
  }
  SUBCASE("bound holds on random instances") {
    std::size_t tight = 0;
    for (std::uint64_t s = 0; s < 300; ++s) {
      auto rng = stream_rng(2718, s);
      const auto inst = sample_theorem_instance(rng, s % 4 == 0);
      const auto c = mediator_determines_redund(inst.joint, {"X1", "X2"}, {"L"}, {"Lp"});
      CHECK_MESSAGE(c.holds, inst.kind);
      tight += c.slack_bits < 0.05;
    }
    // The sampler should reach close to the bound sometimes.
    CHECK(tight > 0);
  }
  SUBCASE("more than two observables is rejected") {
    auto rng = stream_rng(6, 0);
    const auto p = random_joint(rng, {{"X1", 2}, {"X2", 2}, {"X3", 2}, {"L", 2}, {"Lp", 2}});
    CHECK_THROWS_AS(mediator_determines_redund(p, {"X1", "X2", "X3"}, {"L"}, {"Lp"}), InvalidArgument);
    CHECK_THROWS_AS(mediator_determines_redund(p, {"X1", "X2"}, {"L"}, {"L"}), InvalidArgument);
  }
  CHECK(theorem1_bound(0.0, 0.058) == doctest::Approx(0.116));
  CHECK(theorem1_bound_expression().evaluate({{"e_med", 0.5}, {"e_red", 0.25}}) == 1.0);
}

TEST_CASE("minimality, maximality and isomorphism on exact constructions") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto rng = stream_rng(404, s);
    const std::size_t k = 2 + uniform_index(rng, 3), m1 = 1 + uniform_index(rng, 3), m2 = 1 + uniform_index(rng, 3);
    const auto p = fixture::natural(rng, k, m1, m2, s % 2 ? 1.0 : 0.3);
    REQUIRE(naturality_report(AgentModel(p, {"X1", "X2"}, {"L"})).is_exact);

    // Minimality: a mediator built as (L, U) with U depending on L and X1's noise.
    const std::size_t mu = 1 + uniform_index(rng, 3);
    std::vector<Eigen::ArrayXd> u_given(k * m1);
    for (auto& row : u_given) row = dirichlet(rng, static_cast<Eigen::Index>(mu), 0.5);
    const auto relabel = fixture::permutation(rng, k * mu);
    const auto with_mediator = JointDistribution::tabulate(
        {{"L", k}, {"X1", k * m1}, {"X2", k * m2}, {"M", k * mu}}, [&](const Assignment& a) {
          const auto code = relabel[a[3]];
          if (code / mu != a[0]) return 0.0;
          return p.prob({a[0], a[1], a[2]}) * u_given[a[1]][static_cast<Eigen::Index>(code % mu)];
        });
    CHECK(mediation_error(AgentModel(marginalize(with_mediator, {"M", "X1", "X2"}), {"X1", "X2"}, {"M"})) <= 1e-9);
    CHECK(conditional_entropy(with_mediator, {"L"}, {"M"}) <= 1e-9);
    CHECK(mediator_determines_redund(with_mediator, {"X1", "X2"}, {"M"}, {"L"}).conclusion_bits <= 1e-9);

    // Maximality: any exact redund is a function of L.
    const std::size_t r = 1 + uniform_index(rng, k);
    const auto h = fixture::function(rng, k, r);
    const auto with_redund =
        extend_with_function(p, {"R", r}, [&](std::span<const std::size_t> d) { return h[d[1] / m1]; });
    CHECK(conditional_entropy(with_redund, {"R"}, {"X2"}) <= 1e-9);
    CHECK(conditional_entropy(with_redund, {"R"}, {"L"}) <= 1e-9);

    // Isomorphism: a relabeled copy of L read off X2 is natural too.
    const auto perm = fixture::permutation(rng, k);
    const auto with_twin =
        extend_with_function(p, {"L2", k}, [&](std::span<const std::size_t> d) { return perm[d[2] / m2]; });
    CHECK(naturality_report(AgentModel(marginalize(with_twin, {"L2", "X1", "X2"}), {"X1", "X2"}, {"L2"})).is_exact);
    CHECK(conditional_entropy(with_twin, {"L"}, {"L2"}) <= 1e-9);
    CHECK(conditional_entropy(with_twin, {"L2"}, {"L"}) <= 1e-9);
  }
}

TEST_CASE("translatability audit") {
  auto rng = stream_rng(8, 0);
  const auto p = fixture::natural(rng, 3, 2, 2);
  const auto natural = translatability_audit(AgentModel(p, {"X1", "X2"}, {"L"}), 1e-6);
  CHECK(natural.pass);
  CHECK(natural.redundancy_x1_bits == 0.0);

  // Alice's latent is the whole microstate (X1, X2): a mediator, not a redund.
  const auto x = random_joint(rng, {{"X1", 2}, {"X2", 3}});
  const auto micro = extend_with_function(x, {"A", 6}, [](std::span<const std::size_t> d) { return d[0] * 3 + d[1]; });
  const auto audit = translatability_audit(AgentModel(micro, {"X1", "X2"}, {"A"}), 1e-6);
  CHECK(audit.eps_mediation_bits <= 1e-12);
  CHECK(audit.redundancy_x1_bits == doctest::Approx(conditional_entropy(x, {"X2"}, {"X1"})).epsilon(1e-12));
  CHECK(audit.redundancy_x2_bits == doctest::Approx(conditional_entropy(x, {"X1"}, {"X2"})).epsilon(1e-12));
  CHECK(audit.redundancy_x1_bits > 0.0);
  CHECK_FALSE(audit.pass);

  const auto three = random_joint(rng, {{"X1", 2}, {"X2", 2}, {"X3", 2}, {"A", 2}});
  CHECK_THROWS_AS(translatability_audit(AgentModel(three, {"X1", "X2", "X3"}, {"A"}), 0.1), InvalidArgument);
}

TEST_CASE("cross-agent translation") {
  auto rng = stream_rng(9, 0);
  const std::size_t m1 = 2, m2 = 2;
  const auto p = fixture::natural(rng, 3, m1, m2);
  const auto perm = fixture::permutation(rng, 3);
  // Coupling over X1, X2, A (Alice's latent) and B (Bob's latent).
  const auto base = reorder(p, {"X1", "X2", "L"});
  const auto xa = regroup(base, {{"X1", {"X1"}}, {"X2", {"X2"}}, {"A", {"L"}}});
  const AgentModel alice(xa, {"X1", "X2"}, {"A"});

  SUBCASE("identical latents") {
    const auto coupling = extend_with_function(xa, {"B", 3}, [](std::span<const std::size_t> d) { return d[2]; });
    const AgentModel bob(marginalize(coupling, {"X1", "X2", "B"}), {"X1", "X2"}, {"B"});
    const auto t = cross_agent_translation(alice, bob, coupling);
    CHECK(t.alice_given_bob_bits == 0.0);
    CHECK(t.bob_given_alice_bits == 0.0);
  }
  SUBCASE("two natural latents are isomorphic") {
    const auto coupling =
        extend_with_function(xa, {"B", 3}, [&](std::span<const std::size_t> d) { return perm[d[1] / m2]; });
    const AgentModel bob(marginalize(coupling, {"X1", "X2", "B"}), {"X1", "X2"}, {"B"});
    CHECK(naturality_report(bob).is_exact);
    const auto t = cross_agent_translation(alice, bob, coupling);
    CHECK(t.alice_given_bob_bits <= 1e-12);
    CHECK(t.bob_given_alice_bits <= 1e-12);
  }
  SUBCASE("Bob's latent is X1: minimality, not isomorphism") {
    const auto coupling = extend_with_function(xa, {"B", 6}, [](std::span<const std::size_t> d) { return d[0]; });
    const AgentModel bob(marginalize(coupling, {"X1", "X2", "B"}), {"X1", "X2"}, {"B"});
    const auto t = cross_agent_translation(alice, bob, coupling);
    CHECK(t.alice_given_bob_bits <= 1e-12);
    CHECK(t.bob_given_alice_bits == doctest::Approx(conditional_entropy(p, {"X1"}, {"L"})).epsilon(1e-12));
    CHECK(t.bob_given_alice_bits > 0.0);
  }
  SUBCASE("disagreement on observables") {
    const auto other = random_joint(rng, {{"X1", 6}, {"X2", 6}, {"B", 2}});
    const AgentModel bob(other, {"X1", "X2"}, {"B"});
    const auto coupling = extend_with_function(xa, {"B", 2}, [](std::span<const std::size_t>) { return 0; });
    try {
      cross_agent_translation(alice, bob, coupling);
      FAIL("expected ModelDisagreement");
    } catch (const ModelDisagreement& e) {
      CHECK(e.max_discrepancy() > 1e-6);
      CHECK(std::string(e.what()).find("models disagree on observables") != std::string::npos);
    }
  }
}

TEST_CASE("agent model text format") {
  const auto m = parse_agent_model(
      "roles obs:X1,X2 latent:L\n"
      "vars X1:2 X2:2 L:2\n"
      "0 0 0 0.5\n"
      "1 1 1 0.5\n");
  CHECK(m.observables() == Names{"X1", "X2"});
  CHECK(naturality_report(m).is_exact);
  CHECK(parse_agent_model(format_agent_model(m)).joint().prob({1, 1, 1}) == 0.5);

  auto line_of = [](const char* text) {
    try {
      parse_agent_model(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("vars X1:2 X2:2 L:2\n0 0 0 1\n") == 0);
  CHECK(line_of("roles obs:X1 latent:L,X2\nvars X1:2 X2:2 L:2\n0 0 0 1\n") == 1);
  CHECK(line_of("roles obs:X1,X2 latent:L extra\nvars X1:2 X2:2 L:2\n0 0 0 1\n") == 1);
  CHECK(line_of("roles obs:X1,X2 latent:L\nvars X1:2 X2:2 L:2\n0 0 0 1\nroles obs:X1,X2 latent:L\n") == 1);
}
