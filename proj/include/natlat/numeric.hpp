#pragma once

// Scalar-generic kernels over Eigen expressions. Everything is in bits.

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace natlat {

template <typename Scalar>
inline constexpr Scalar kLn2 = Scalar(0.693147180559945309417232121458176568L);

/// x * log2(y) with the 0 * log 0 = 0 convention.
template <typename Scalar>
Scalar xlog2y(Scalar x, Scalar y) {
  if (x == Scalar(0)) return Scalar(0);
  return x * std::log2(y);
}

/// log(sum(exp(x))) computed without overflow; -inf for an empty or all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.derived().array() - m).exp().sum());
}

/// Shannon entropy, in bits, of a probability vector.
template <typename Derived>
typename Derived::Scalar entropy_bits(const Eigen::ArrayBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  const auto safe = (p > Scalar(0)).select(p, Scalar(1));
  const Scalar h = -(p * safe.log()).sum() / kLn2<Scalar>;
  return h > Scalar(0) ? h : Scalar(0);
}

/// D_KL(p || q) in bits; +inf when p has mass where q has none.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_bits(const Eigen::ArrayBase<DerivedP>& p,
                                  const Eigen::ArrayBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (((p > Scalar(0)) && (q <= Scalar(0))).any()) {
    return std::numeric_limits<Scalar>::infinity();
  }
  const auto support = p > Scalar(0);
  const auto ratio = support.select(p / q.max(std::numeric_limits<Scalar>::min()), Scalar(1));
  const Scalar d = (p * ratio.log()).sum() / kLn2<Scalar>;
  return d > Scalar(0) ? d : Scalar(0);
}

/// Binary entropy h(p) in bits.
template <typename Scalar>
Scalar binary_entropy(Scalar p) {
  return -xlog2y(p, p) - xlog2y(Scalar(1) - p, Scalar(1) - p);
}

}  // namespace natlat
