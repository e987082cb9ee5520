#pragma once

#include <map>
#include <string>

#include "natlat/distribution.hpp"

namespace natlat {

/// Non-negative linear combination of named approximation errors plus a
/// constant, all in bits: c + sum_k a_k * eps_k.
class EpsilonExpr {
 public:
  EpsilonExpr() = default;

  static EpsilonExpr named(const std::string& name, double coefficient = 1.0);
  static EpsilonExpr constant(double bits);

  EpsilonExpr& operator+=(const EpsilonExpr& other);
  friend EpsilonExpr operator+(EpsilonExpr a, const EpsilonExpr& b) { return a += b; }
  friend EpsilonExpr operator*(double scale, const EpsilonExpr& e);

  /// Throws InvalidArgument for a name missing from `bindings`.
  double evaluate(const std::map<std::string, double>& bindings) const;
  /// Replaces each bound name by its expression; unbound names are kept.
  EpsilonExpr substitute(const std::map<std::string, EpsilonExpr>& bindings) const;

  const std::map<std::string, double>& terms() const { return terms_; }
  double constant_bits() const { return constant_; }
  Names names() const;
  bool is_zero() const { return terms_.empty() && constant_ == 0.0; }

  /// e.g. "e_med + 2*e_red"; "0" when empty.
  std::string to_string() const;

  friend bool operator==(const EpsilonExpr&, const EpsilonExpr&) = default;

 private:
  std::map<std::string, double> terms_;
  double constant_ = 0.0;
};

}  // namespace natlat
