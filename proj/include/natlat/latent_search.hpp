#pragma once

// Exact natural latents as deterministic constraints, evaluation of
// user-supplied latents, and chunking many observables into two blocks.
//
// Between two observables an exact natural latent exists iff they are
// independent given the connected component of their support graph
// (x1 -- x2 whenever P[x1, x2] > 0). The component label is a function of
// either coordinate, so its redundancy errors vanish and only mediation
// remains to check.

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "natlat/distribution.hpp"
#include "natlat/naturality.hpp"

namespace natlat {

/// Cells at or below this mass are not part of the support graph.
inline constexpr double kSupportThreshold = 1e-12;

/// Marks a value with no label in a partial map.
inline constexpr std::size_t kNoLabel = std::numeric_limits<std::size_t>::max();

/// Lambda = f_i(X_i): one label map per observable.
struct DeterministicLatent {
  std::string name = "L";
  Names observables;
  std::vector<std::vector<std::size_t>> labels;  // labels[i][value], kNoLabel if unset
  std::size_t cardinality = 0;

  bool is_total() const;
};

struct LatentSearchResult {
  DeterministicLatent latent;
  NaturalityReport report;
  JointDistribution joint;  // P with the latent appended as a variable
  bool exact = false;       // report.is_exact
};

/// Component labeling of the support graph of P over two observables.
/// Labels follow the smallest x1 value in each component; values outside the
/// support get label 0. Throws InvalidArgument unless P has exactly two variables.
LatentSearchResult exact_natural_latent(const JointDistribution& p);

/// Appends Lambda = f_1(X_1) to P (every other observable's map must be total
/// too) and reports its naturality over all of the maps' observables.
NaturalityReport evaluate_candidate(const JointDistribution& p, const DeterministicLatent& f);

/// P augmented with Lambda = f_1(X_1).
JointDistribution with_candidate(const JointDistribution& p, const DeterministicLatent& f);

/// P[f_1(X_1) != f_i(X_i)] for each observable i (0 for i = 1).
std::vector<double> label_disagreement(const JointDistribution& p, const DeterministicLatent& f);

/// Name for a block of observables, e.g. "X1+X2".
std::string block_name(const Names& block);

/// Merges each block into one product-alphabet observable (row-major over
/// the block's members); any variables not in a block are kept as they are.
/// Blocks must be nonempty, disjoint and, together with `keep`, cover P.
JointDistribution chunk_observables(const JointDistribution& p, const Names& first, const Names& second);
AgentModel chunk_observables(const AgentModel& m, const Names& first, const Names& second);

/// `map <observable> <value> <label>` lines; observables in first-seen order.
/// Maps may be partial here; evaluation rejects them.
DeterministicLatent parse_label_maps(std::string_view text, const JointDistribution& p);
std::string format_label_maps(const DeterministicLatent& f);

}  // namespace natlat
