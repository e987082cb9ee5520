#pragma once

// Worked scenarios: Carol's two batches of coin flips and their medians, and
// a die whose bias is shared by two chunks of rolls.
//
// Coin: bias uniform on [0, 1], N_i = heads in batch i of n flips, and the
// median label is 0 for N_1 < n/2 and 1 for N_1 >= n/2 (ties go up).

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "natlat/distribution.hpp"
#include "natlat/latent_search.hpp"
#include "natlat/naturality.hpp"

namespace natlat {

struct CoinExampleConfig {
  std::size_t n = 1000;

  std::size_t median_threshold() const { return n / 2; }
  /// Throws InvalidArgument unless n is even and at least 2.
  void validate() const;
};

struct CoinMedianPosterior {
  Eigen::ArrayXd label0;  // P[median label 0 | N_2], indexed by N_2
  Eigen::ArrayXd label1;
  double max_normalization_error = 0.0;  // max |label0 + label1 - 1|
};

/// log P[N_1 | N_2] on the (n+1) x (n+1) grid (rows N_1, columns N_2).
Eigen::ArrayXXd coin_log_conditional(const CoinExampleConfig& cfg);

CoinMedianPosterior coin_median_posterior(const CoinExampleConfig& cfg);

/// E[H(median of batch 1 | N_2)] in bits: the redundancy error of the median
/// with respect to the second batch.
double coin_median_entropy(const CoinExampleConfig& cfg);

/// 0 + 2 * coin_median_entropy: mediation is exact for the bias.
double coin_theorem_bound(const CoinExampleConfig& cfg);

/// H(median | bias) for the continuous bias, by adaptive quadrature of
/// h(P[Bin(n, lambda) >= n/2]) over lambda. What the bound is bounding.
double coin_conclusion_entropy(const CoinExampleConfig& cfg);

/// Joint over N1 and N2 (beta-binomial pair).
JointDistribution coin_joint_model(const CoinExampleConfig& cfg);

/// Median label as a function of N1 and of N2.
DeterministicLatent coin_median_latent(const CoinExampleConfig& cfg);

// ---------------------------------------------------------------------------
// Die

struct DieFixtureConfig {
  std::size_t rolls_per_chunk = 4;
  std::size_t faces = 2;
  /// Dirichlet concentration of the prior over biases.
  double concentration = 1.0;
  /// Grid points are (k + 1/2) / (r + faces/2) for count vectors k summing to r.
  std::size_t grid_resolution = 9;
};

/// All count vectors of `parts` nonnegative entries summing to `total`, in
/// lexicographic order.
std::vector<std::vector<std::size_t>> compositions(std::size_t total, std::size_t parts);

/// Bias grid of the fixture, one row per point.
Eigen::ArrayXXd die_bias_grid(const DieFixtureConfig& cfg);

/// Latent "Bias" on the grid with a discretized Dirichlet prior, observables
/// "C1" and "C2" holding the face counts of each chunk. Mediation is exact.
/// Throws InvalidArgument when the table would exceed the dense cell limit.
AgentModel die_fixture(const DieFixtureConfig& cfg);

/// The same model with each roll its own observable R1..R(2r).
AgentModel die_rolls_fixture(const DieFixtureConfig& cfg);

}  // namespace natlat
