#pragma once

// Discrete joint distributions over named finite-alphabet variables, and the
// information quantities computed from them. All quantities are in bits.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "natlat/error.hpp"

namespace natlat {

/// Sentinel for an unbounded divergence (P has mass where Q has none).
inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

/// Tables with at most this many cells are stored densely.
inline constexpr std::uint64_t kDenseCellLimit = 10'000'000;

/// Loaded tables whose mass is within this of 1 are silently renormalized.
inline constexpr double kLoadMassTolerance = 1e-6;

using Names = std::vector<std::string>;

struct VarSpec {
  std::string name;
  std::size_t cardinality = 1;

  friend bool operator==(const VarSpec&, const VarSpec&) = default;
};

/// One category index per variable, in the owning distribution's order.
using Assignment = std::vector<std::size_t>;

class JointDistribution {
 public:
  /// Sorted by linear index, strictly positive probabilities only.
  using SparseCells = std::vector<std::pair<std::uint64_t, double>>;

  /// Row-major dense table (last variable varies fastest). Normalizes with
  /// load semantics: mass within kLoadMassTolerance of 1 is rescaled,
  /// anything else throws InvalidDistribution.
  static JointDistribution from_dense(std::vector<VarSpec> variables, Eigen::ArrayXd probabilities);

  /// Listed cells; unlisted cells are zero. Duplicate cells throw.
  static JointDistribution from_cells(std::vector<VarSpec> variables,
                                      const std::vector<std::pair<Assignment, double>>& cells);

  static JointDistribution uniform(std::vector<VarSpec> variables);
  static JointDistribution point_mass(std::vector<VarSpec> variables, const Assignment& at);

  /// Builds the table cell by cell from a mass function; load semantics apply.
  static JointDistribution tabulate(std::vector<VarSpec> variables,
                                    const std::function<double(const Assignment&)>& mass);

  std::span<const VarSpec> variables() const { return variables_; }
  std::size_t arity() const { return variables_.size(); }
  const VarSpec& variable(std::size_t i) const { return variables_.at(i); }
  Names names() const;

  bool contains(const std::string& name) const;
  /// Position of a variable; throws UnknownVariable.
  std::size_t index_of(const std::string& name) const;

  std::uint64_t cell_count() const { return cell_count_; }
  bool is_dense() const { return std::holds_alternative<Eigen::ArrayXd>(storage_); }
  /// Dense table; throws if the distribution is sparse.
  const Eigen::ArrayXd& dense() const;

  std::uint64_t encode(const Assignment& a) const;
  Assignment decode(std::uint64_t index) const;

  double prob(const Assignment& a) const { return prob_at(encode(a)); }
  double prob_at(std::uint64_t index) const;
  double total_mass() const;
  std::size_t support_size() const;

  /// Calls f(digits, p) for every cell with p > 0, in increasing index order.
  template <typename F>
  void for_each_nonzero(F&& f) const;

  /// Rescales to unit mass; throws InvalidDistribution if the mass is zero.
  JointDistribution normalized() const;

 private:
  friend class CellAccumulator;
  using Storage = std::variant<Eigen::ArrayXd, SparseCells>;

  JointDistribution(std::vector<VarSpec> variables, Storage storage);
  static JointDistribution load(std::vector<VarSpec> variables, Storage storage);

  std::vector<VarSpec> variables_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t cell_count_ = 1;
  Storage storage_;
};

/// Accumulates mass into cells and emits a distribution without renormalizing.
/// Storage is dense or sparse by cell count.
class CellAccumulator {
 public:
  explicit CellAccumulator(std::vector<VarSpec> variables);

  void add(std::uint64_t index, double p);
  std::uint64_t cell_count() const { return cell_count_; }
  JointDistribution finish() &&;

 private:
  std::vector<VarSpec> variables_;
  std::uint64_t cell_count_;
  Eigen::ArrayXd dense_;
  std::vector<std::pair<std::uint64_t, double>> sparse_;
};

/// Maps full-table digits to the linear index of a sub-table over a subset of
/// the variables (kept in the order given by `positions`).
class SubIndex {
 public:
  SubIndex(const JointDistribution& over, const std::vector<std::size_t>& positions);
  std::uint64_t operator()(std::span<const std::size_t> digits) const {
    std::uint64_t idx = 0;
    for (std::size_t k = 0; k < positions_.size(); ++k) idx += digits[positions_[k]] * strides_[k];
    return idx;
  }

 private:
  std::vector<std::size_t> positions_;
  std::vector<std::uint64_t> strides_;
};

// ---------------------------------------------------------------------------
// Operations

/// Sums out every variable not in `keep`. The result keeps P's variable order
/// and its mass is the exact float sum (no renormalization).
JointDistribution marginalize(const JointDistribution& p, const Names& keep);

/// Normalized conditional over the non-evidence variables.
/// Throws UnsupportedEvidence when the evidence has zero probability.
JointDistribution condition(const JointDistribution& p,
                            const std::vector<std::pair<std::string, std::size_t>>& evidence);

double entropy(const JointDistribution& p, const Names& over);
double entropy(const JointDistribution& p);

/// H(target | given). Throws InvalidArgument if the sets overlap.
double conditional_entropy(const JointDistribution& p, const Names& target, const Names& given);

/// I(a ; b) = H(a) + H(b) - H(a, b).
double mutual_information(const JointDistribution& p, const Names& a, const Names& b);

/// D_KL(p || q); kInfiniteBits when p has mass outside q's support.
/// Variable lists must be identical.
double kl_divergence(const JointDistribution& p, const JointDistribution& q);

/// Largest absolute cell difference; variable lists must be identical.
double max_abs_difference(const JointDistribution& p, const JointDistribution& q);

/// Appends a variable that is a deterministic function of the existing ones.
JointDistribution extend_with_function(const JointDistribution& p, VarSpec added,
                                       const std::function<std::size_t(std::span<const std::size_t>)>& fn);

struct VarGroup {
  std::string name;
  Names members;
};

/// Relabels the table so that each group becomes one product-alphabet
/// variable (row-major over its members). Every variable of P must appear in
/// exactly one group. Pure relabeling: mass is copied cell for cell.
JointDistribution regroup(const JointDistribution& p, const std::vector<VarGroup>& groups);

/// Reorders variables to `order` (a permutation of P's names).
JointDistribution reorder(const JointDistribution& p, const Names& order);

// ---------------------------------------------------------------------------

template <typename F>
void JointDistribution::for_each_nonzero(F&& f) const {
  Assignment digits(variables_.size(), 0);
  if (const auto* dense = std::get_if<Eigen::ArrayXd>(&storage_)) {
    const Eigen::Index n = dense->size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = (*dense)[i];
      if (v > 0.0) f(std::span<const std::size_t>(digits), v);
      for (std::size_t k = digits.size(); k-- > 0;) {
        if (++digits[k] < variables_[k].cardinality) break;
        digits[k] = 0;
      }
    }
    return;
  }
  for (const auto& [index, v] : std::get<SparseCells>(storage_)) {
    std::uint64_t rest = index;
    for (std::size_t k = 0; k < digits.size(); ++k) {
      digits[k] = static_cast<std::size_t>(rest / strides_[k]);
      rest %= strides_[k];
    }
    f(std::span<const std::size_t>(digits), v);
  }
}

}  // namespace natlat
