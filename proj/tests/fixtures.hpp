#pragma once

// Constructed distributions with known naturality properties.

#include <algorithm>
#include <numeric>
#include <vector>

#include "natlat/distribution.hpp"
#include "natlat/random.hpp"

namespace fixture {

using namespace natlat;

/// Joint over (L, X1, X2) where X_i = L * m_i + noise_i and the noises are
/// independent given L: L is an exact natural latent over X1, X2.
inline JointDistribution natural(Rng& rng, std::size_t k, std::size_t m1, std::size_t m2, double alpha = 1.0) {
  const auto pl = dirichlet(rng, static_cast<Eigen::Index>(k), alpha);
  std::vector<Eigen::ArrayXd> n1, n2;
  for (std::size_t l = 0; l < k; ++l) {
    n1.push_back(dirichlet(rng, static_cast<Eigen::Index>(m1), alpha));
    n2.push_back(dirichlet(rng, static_cast<Eigen::Index>(m2), alpha));
  }
  return JointDistribution::tabulate({{"L", k}, {"X1", k * m1}, {"X2", k * m2}}, [&](const Assignment& a) {
    const auto l = a[0];
    if (a[1] / m1 != l || a[2] / m2 != l) return 0.0;
    return pl[static_cast<Eigen::Index>(l)] * n1[l][static_cast<Eigen::Index>(a[1] % m1)] *
           n2[l][static_cast<Eigen::Index>(a[2] % m2)];
  });
}

/// Random permutation of 0..n-1.
inline std::vector<std::size_t> permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

/// Random function {0..n-1} -> {0..m-1}.
inline std::vector<std::size_t> function(Rng& rng, std::size_t n, std::size_t m) {
  std::vector<std::size_t> f(n);
  for (auto& v : f) v = uniform_index(rng, m);
  return f;
}

/// Permutes the category labels of one variable.
inline JointDistribution permute_labels(const JointDistribution& p, const std::string& name,
                                        const std::vector<std::size_t>& perm) {
  const auto k = p.index_of(name);
  std::vector<VarSpec> vars(p.variables().begin(), p.variables().end());
  return JointDistribution::tabulate(vars, [&](const Assignment& a) {
    Assignment src = a;
    src[k] = perm[a[k]];
    return p.prob(src);
  });
}

}  // namespace fixture
