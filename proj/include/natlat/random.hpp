#pragma once

// Seeded generators for random tables, Bayes nets and DAGs. A single 64-bit
// seed fans out to independent per-instance streams by index, so a sweep
// produces the same instances whether it runs serially or split up.

#include <Eigen/Core>

#include <cstdint>
#include <random>

#include "natlat/distribution.hpp"
#include "natlat/graph.hpp"

namespace natlat {

using Rng = std::mt19937_64;

/// splitmix64 finalizer applied to (seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Generator for instance `stream` of a run seeded with `seed`.
Rng stream_rng(std::uint64_t seed, std::uint64_t stream);

/// Symmetric Dirichlet(alpha, ..., alpha) draw of length k.
Eigen::ArrayXd dirichlet(Rng& rng, Eigen::Index k, double alpha = 1.0);

/// Dirichlet(alpha) over the full joint alphabet.
JointDistribution random_joint(Rng& rng, std::vector<VarSpec> vars, double alpha = 1.0);

/// Random Bayes net over `g`: each node gets Dirichlet(alpha) conditionals
/// for every parent configuration. The result factors over g exactly.
/// Variables are in `vars` order; g's nodes must be those names (no copies).
JointDistribution random_bayes_net(Rng& rng, const std::vector<VarSpec>& vars, const Dag& g, double alpha = 1.0);

/// DAG whose edges respect the given order, each present with probability `edge_prob`.
Dag random_dag(Rng& rng, const Names& order, double edge_prob);

/// lambda * a + (1 - lambda) * b over identical variable lists.
JointDistribution mix(const JointDistribution& a, const JointDistribution& b, double lambda);

std::size_t uniform_index(Rng& rng, std::size_t n);
double uniform_real(Rng& rng, double lo, double hi);

}  // namespace natlat
