#include "natlat/epsilon.hpp"

#include <cmath>

#include "natlat/text.hpp"

namespace natlat {

namespace {

void require_non_negative(double v, const std::string& what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(what + " must be finite and non-negative");
}

}  // namespace

EpsilonExpr EpsilonExpr::named(const std::string& name, double coefficient) {
  require_non_negative(coefficient, "coefficient of '" + name + "'");
  EpsilonExpr e;
  if (coefficient > 0.0) e.terms_[name] = coefficient;
  return e;
}

EpsilonExpr EpsilonExpr::constant(double bits) {
  require_non_negative(bits, "constant");
  EpsilonExpr e;
  e.constant_ = bits;
  return e;
}

EpsilonExpr& EpsilonExpr::operator+=(const EpsilonExpr& other) {
  for (const auto& [name, c] : other.terms_) terms_[name] += c;
  constant_ += other.constant_;
  return *this;
}

EpsilonExpr operator*(double scale, const EpsilonExpr& e) {
  require_non_negative(scale, "scale");
  EpsilonExpr out;
  if (scale == 0.0) return out;
  for (const auto& [name, c] : e.terms_) out.terms_[name] = scale * c;
  out.constant_ = scale * e.constant_;
  return out;
}

double EpsilonExpr::evaluate(const std::map<std::string, double>& bindings) const {
  double v = constant_;
  for (const auto& [name, c] : terms_) {
    const auto it = bindings.find(name);
    if (it == bindings.end()) throw InvalidArgument("epsilon '" + name + "' is unbound");
    v += c * it->second;
  }
  return v;
}

EpsilonExpr EpsilonExpr::substitute(const std::map<std::string, EpsilonExpr>& bindings) const {
  EpsilonExpr out = constant(constant_);
  for (const auto& [name, c] : terms_) {
    const auto it = bindings.find(name);
    out += it == bindings.end() ? named(name, c) : c * it->second;
  }
  return out;
}

Names EpsilonExpr::names() const {
  Names out;
  for (const auto& [name, c] : terms_) out.push_back(name);
  return out;
}

std::string EpsilonExpr::to_string() const {
  std::string s;
  for (const auto& [name, c] : terms_) {
    if (!s.empty()) s += " + ";
    if (c != 1.0) s += format_shortest(c) + "*";
    s += name;
  }
  if (constant_ != 0.0 || s.empty()) {
    if (!s.empty()) s += " + ";
    s += format_shortest(constant_);
  }
  return s;
}

}  // namespace natlat
