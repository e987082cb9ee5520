#pragma once

#include <stdexcept>
#include <string>

namespace natlat {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Conditioning on evidence whose marginal probability is zero.
class UnsupportedEvidence : public Error {
 public:
  using Error::Error;
};

class InvalidDistribution : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A proof rule was asked to fire without its premise holding.
class RuleInapplicable : public Error {
 public:
  using Error::Error;
};

/// Two agent models assign different probabilities to the shared observables.
class ModelDisagreement : public Error {
 public:
  ModelDisagreement(const std::string& what, double max_discrepancy)
      : Error(what), max_discrepancy_(max_discrepancy) {}
  double max_discrepancy() const { return max_discrepancy_; }

 private:
  double max_discrepancy_;
};

/// Text-format error carrying the 1-based line it was found on (0 if none).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace natlat
