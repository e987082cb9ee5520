#pragma once

// Exact-rational reference for the coin median entropy.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int factorial(unsigned k) {
  cpp_int f = 1;
  for (unsigned i = 2; i <= k; ++i) f *= i;
  return f;
}

inline cpp_int choose(unsigned n, unsigned k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

/// P[N1, N2] = C(n, N1) C(n, N2) (N1 + N2)! (2n - N1 - N2)! / (2n + 1)!,
/// the Beta integral of two binomials under a uniform bias.
inline cpp_rational coin_cell(unsigned n, unsigned n1, unsigned n2) {
  return cpp_rational(choose(n, n1) * choose(n, n2) * factorial(n1 + n2) * factorial(2 * n - n1 - n2),
                      factorial(2 * n + 1));
}

/// E[H(median(N1) | N2)], summed exactly before the final logs.
inline double exact_median_entropy(unsigned n) {
  double h = 0.0;
  for (unsigned n2 = 0; n2 <= n; ++n2) {
    cpp_rational p_n2 = 0, p_low = 0;
    for (unsigned n1 = 0; n1 <= n; ++n1) {
      const auto cell = coin_cell(n, n1, n2);
      p_n2 += cell;
      if (n1 < n / 2) p_low += cell;
    }
    const double q = static_cast<double>(cpp_rational(p_low / p_n2));
    const double w = static_cast<double>(p_n2);
    if (q > 0.0) h -= w * q * std::log2(q);
    if (q < 1.0) h -= w * (1.0 - q) * std::log2(1.0 - q);
  }
  return h;
}

}  // namespace oracle
