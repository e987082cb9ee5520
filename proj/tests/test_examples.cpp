#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coin_oracle.hpp"
#include "natlat/examples.hpp"

using namespace natlat;
using oracle::exact_median_entropy;

namespace {

// Midpoint rule on h(P[Bin(n, lambda) >= n/2]) with the tail summed directly.
double midpoint_conclusion(unsigned n, int steps) {
  double total = 0.0;
  for (int s = 0; s < steps; ++s) {
    const double lam = (s + 0.5) / steps;
    double tail = 0.0;
    for (unsigned k = n / 2; k <= n; ++k) {
      tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(lam) +
                       (n - k) * std::log1p(-lam));
    }
    tail = std::min(tail, 1.0);
    if (tail > 0.0 && tail < 1.0) total -= tail * std::log2(tail) + (1.0 - tail) * std::log2(1.0 - tail);
  }
  return total / steps;
}

}  // namespace

TEST_CASE("coin median entropy") {
  const CoinExampleConfig cfg;
  CHECK(cfg.n == 1000);
  CHECK(cfg.median_threshold() == 500);
  const double h = coin_median_entropy(cfg);
  CHECK(h == doctest::Approx(0.058).epsilon(0.001 / 0.058));
  CHECK(h >= 0.03);
  CHECK(h <= 0.12);
  CHECK(coin_theorem_bound(cfg) == doctest::Approx(0.116).epsilon(0.002 / 0.116));
  CHECK(coin_theorem_bound(cfg) == 2.0 * h);
}

TEST_CASE("posterior labels are normalized per N2") {
  for (std::size_t n : {2, 10, 100, 1000}) {
    const auto post = coin_median_posterior({n});
    CHECK(post.label0.size() == static_cast<Eigen::Index>(n + 1));
    CHECK(post.max_normalization_error <= 1e-9);
  }
}

TEST_CASE("exact rational oracle for small n") {
  for (unsigned n2 = 0; n2 <= 6; ++n2) {
    oracle::cpp_rational marginal = 0;
    for (unsigned n1 = 0; n1 <= 6; ++n1) marginal += oracle::coin_cell(6, n1, n2);
    CHECK(marginal == oracle::cpp_rational(1, 7));
  }
  for (unsigned n : {2u, 4u, 6u, 10u}) {
    CAPTURE(n);
    CHECK(coin_median_entropy({n}) == doctest::Approx(exact_median_entropy(n)).epsilon(1e-9).scale(1.0));
  }
  CHECK(coin_theorem_bound({2}) == doctest::Approx(2.0 * exact_median_entropy(2)).epsilon(1e-9));
}

TEST_CASE("bias-flip symmetry and sharpening") {
  for (std::size_t n : {4, 10, 100, 1000}) {
    // Flipping heads and tails maps label 0 given N2 to label 1 given n - N2,
    // except that ties go up; the boundary row N1 = n/2 carries the asymmetry.
    const auto lp = coin_log_conditional({n});
    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::ArrayXXd flipped = lp.reverse();
    CHECK((lp - flipped).abs().maxCoeff() <= 1e-9);
    // P[N1 < n/2 | N2] = P[N1 > n/2 | n - N2]: label 1 minus the tie row, mirrored.
    const auto post = coin_median_posterior({n});
    const Eigen::ArrayXd tie = lp.row(nn / 2).transpose().exp();
    const Eigen::ArrayXd strict_upper = post.label1 - tie;
    CHECK((post.label0 - strict_upper.reverse()).abs().maxCoeff() <= 1e-9);
  }
  const double h10 = coin_median_entropy({10}), h100 = coin_median_entropy({100}), h1000 = coin_median_entropy({1000});
  CHECK(h10 > h100);
  CHECK(h100 > h1000);
}

TEST_CASE("conclusion entropy under the continuous bias") {
  for (unsigned n : {2u, 10u, 100u}) {
    CAPTURE(n);
    CHECK(coin_conclusion_entropy({n}) == doctest::Approx(midpoint_conclusion(n, 200000)).epsilon(1e-6).scale(1.0));
  }
  // The theorem's bound must hold.
  for (std::size_t n : {2, 10, 100, 1000}) CHECK(coin_conclusion_entropy({n}) <= coin_theorem_bound({n}));
}

TEST_CASE("coin joint model") {
  const auto p = coin_joint_model({10});
  CHECK(p.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  const auto m2 = marginalize(p, {"N2"});
  for (std::size_t v = 0; v <= 10; ++v) CHECK(m2.prob({v}) == doctest::Approx(1.0 / 11).epsilon(1e-12));
  CHECK(conditional_entropy(p, {"N1"}, {"N2"}) > 0.0);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(coin_median_entropy({3}), InvalidArgument);
  CHECK_THROWS_AS(coin_median_entropy({0}), InvalidArgument);
  CHECK_THROWS_AS(coin_conclusion_entropy({7}), InvalidArgument);
  CHECK_NOTHROW(coin_median_entropy({2}));
}

TEST_CASE("die fixture") {
  SUBCASE("one flip per chunk, two bias values") {
    const auto m = die_fixture({.rolls_per_chunk = 1, .faces = 2, .concentration = 1.0, .grid_resolution = 1});
    CHECK(m.joint().cell_count() == 8);
    const auto grid = die_bias_grid({.rolls_per_chunk = 1, .faces = 2, .grid_resolution = 1});
    CHECK(grid(0, 0) == 0.25);
    CHECK(grid(1, 0) == 0.75);
    CHECK(mediation_error(m) <= 1e-12);
  }
  SUBCASE("point-mass grid") {
    const auto m = die_fixture({.rolls_per_chunk = 3, .faces = 3, .grid_resolution = 0});
    CHECK(m.joint().variable(0).cardinality == 1);
    CHECK(mutual_information(m.joint(), {"C1"}, {"C2"}) <= 1e-12);
    CHECK(naturality_report(m).is_exact);
  }
  SUBCASE("mediation exact across shapes") {
    for (std::size_t faces : {2, 3, 4}) {
      const auto m = die_fixture({.rolls_per_chunk = 3, .faces = faces, .concentration = 0.7, .grid_resolution = 4});
      CHECK(mediation_error(m) <= 1e-12);
      CHECK(m.joint().total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("compositions") {
    const auto c = compositions(2, 3);
    CHECK(c.size() == 6);
    CHECK(c.front() == std::vector<std::size_t>{0, 0, 2});
    CHECK(c.back() == std::vector<std::size_t>{2, 0, 0});
  }
  SUBCASE("size guard") {
    try {
      die_fixture({.rolls_per_chunk = 40, .faces = 6, .grid_resolution = 9});
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("cells") != std::string::npos);
    }
    CHECK_THROWS_AS(die_fixture({.faces = 1}), InvalidArgument);
  }
}
