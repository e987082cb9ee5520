#pragma once

// Diagram judgments ("P factors over G to within eps bits") and the four
// proof rules that derive new judgments from old ones:
//
//   frankenstein            in-edges of each node picked from one of several
//                           judgments sharing a topological order; eps adds up
//   factorization_transfer  Q factors over G exactly and D_KL(P || Q) <= eps
//   bookkeeping             G1 implies G2, so a judgment on G1 carries over
//   dangly_bit              attach a copy of Y under X using Y <- X -> Y
//
// Derivations are append-only. Every step checks its preconditions when it
// is added, and every epsilon stays a linear expression in premise names.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "natlat/epsilon.hpp"
#include "natlat/graph.hpp"

namespace natlat {

struct DiagramJudgment {
  Dag graph;
  EpsilonExpr epsilon;
};

/// D_KL(P || Q) <= eps for some Q that factors exactly over `target`.
struct BudgetPremise {
  std::string epsilon_name;
  Dag target;
};

struct DerivationStep {
  std::string rule;
  Names inputs;
  std::vector<std::string> parameters;
  std::string output;
  DiagramJudgment result;
};

class Derivation {
 public:
  /// Judgment `name` on `graph` with error named `epsilon_name`.
  void add_premise(const std::string& name, Dag graph, const std::string& epsilon_name);
  void add_budget(const std::string& epsilon_name, Dag target);

  bool has_judgment(const std::string& name) const;
  /// Premise or step output; throws InvalidArgument if unknown.
  const DiagramJudgment& judgment(const std::string& name) const;

  const Names& premise_names() const { return premise_order_; }
  const std::map<std::string, BudgetPremise>& budgets() const { return budgets_; }
  const std::vector<DerivationStep>& steps() const { return steps_; }
  /// Epsilon names bound by premises and budgets.
  Names epsilon_names() const;

  /// Appends a checked step; used by the rule functions.
  const DiagramJudgment& record(DerivationStep step);

 private:
  void claim_name(const std::string& name) const;
  void bind_epsilon(const std::string& epsilon_name);

  std::map<std::string, DiagramJudgment> judgments_;
  Names premise_order_;
  std::map<std::string, BudgetPremise> budgets_;
  std::vector<std::string> epsilon_names_;
  std::vector<DerivationStep> steps_;
};

/// `selector` maps a node to the index (into `inputs`) of the judgment whose
/// in-edges it keeps; unlisted nodes use input 0.
const DiagramJudgment& frankenstein(Derivation& d, const Names& inputs, const std::map<std::string, std::size_t>& selector,
                                    const std::string& output);

const DiagramJudgment& factorization_transfer(Derivation& d, const Dag& target, const std::string& budget,
                                              const std::string& output);

const DiagramJudgment& bookkeeping(Derivation& d, const std::string& input, const Dag& target,
                                   const std::string& output);

/// `determinism` must be a judgment on a three-node diagram Y <- X -> Y
/// (two nodes denoting the same Y, each with the single parent X).
const DiagramJudgment& dangly_bit(Derivation& d, const std::string& input, const std::string& determinism,
                                  const std::string& attach_at, const std::string& output);

/// Name for a new node denoting `variable` that does not clash with `g`:
/// the variable itself if free, else variable~, variable~2, ...
std::string fresh_node_name(const Dag& g, const std::string& variable);

/// Y and X of a Y <- X -> Y diagram, or nullopt if `g` has another shape.
struct DeterminismShape {
  std::string source;      // node X
  std::string determined;  // variable Y
};
std::optional<DeterminismShape> determinism_shape(const Dag& g);

// ---------------------------------------------------------------------------
// Numeric soundness harness

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t samples = 200;
  std::size_t min_cardinality = 2;
  std::size_t max_cardinality = 3;
  /// Mixture weight of the premise-exact part is uniform in [lambda_min, 1).
  double lambda_min = 0.8;
};

struct ValidationReport {
  std::size_t samples = 0;
  std::size_t checks = 0;
  std::size_t violations = 0;
  double min_slack_bits = 0.0;  // over finite bounds
  double max_slack_bits = 0.0;
  std::vector<std::string> failures;  // first few, human-readable

  bool passed() const { return violations == 0; }
};

/// Draws random P close to one of the premises, evaluates every premise's
/// actual error on P, and checks diagram_error(P, step graph) against the
/// step's epsilon at those values plus 1e-9. `steps` selects which steps to
/// check (all when empty).
ValidationReport validate_derivation(const Derivation& d, const SamplerConfig& config,
                                     const std::vector<std::size_t>& steps = {});
ValidationReport validate_rule(const Derivation& d, std::size_t step, const SamplerConfig& config);

// ---------------------------------------------------------------------------
// Script format
//
//   dag <name> ... end                      inline diagram in the dag format
//   premise <name> <dag> eps <eps-name>
//   budget <eps-name> <dag>
//   step frankenstein <in>... [pick <node>=<k>...] -> <out>
//   step transfer <dag> <eps-name> -> <out>
//   step bookkeeping <in> <dag> -> <out>
//   step dangly <in> <determinism> <attach-node> -> <out>
//   claim determines <L> <Lp>
//
// A <dag> not defined inline is loaded through the resolver (the CLI reads
// it as a file path relative to the script).

/// "The final judgment bounds H(determined | determiner)."
struct DeterminesClaim {
  std::string determiner;
  std::string determined;
};

struct DerivationScript {
  Derivation derivation;
  std::optional<DeterminesClaim> claim;
};

using DagResolver = std::function<Dag(const std::string&)>;

/// Builds the derivation as it parses, so an inapplicable step fails with its
/// line number. Errors are ParseError.
DerivationScript parse_derivation_script(std::string_view text, const DagResolver& resolve = {});

/// Checks that the final judgment's graph has one node denoting `determiner`
/// with no parents and exactly two nodes denoting `determined`, each with
/// `determiner` as sole parent. Throws RuleInapplicable otherwise.
void check_determines_claim(const Derivation& d, const DeterminesClaim& claim);

struct Theorem1Replay {
  DiagramJudgment conclusion;
  DeterminesClaim claim;
  std::string mediation_epsilon;
  Names redundancy_epsilons;
  /// Conclusion epsilon with the mediation premise renamed e_med and both
  /// redundancy premises renamed e_red.
  EpsilonExpr bound;
};

/// Replays a script with one mediation premise and two determinism premises
/// ending in a `claim determines` line.
Theorem1Replay replay_theorem1(const DerivationScript& script);
Theorem1Replay replay_theorem1(std::string_view text, const DagResolver& resolve = {});

/// Diagram_error of the claim's subdiagram, i.e. H(determined | determiner).
double claim_error(const JointDistribution& p, const DeterminesClaim& claim);

/// validate_derivation over every step, plus the claim checked against the
/// final step's epsilon.
ValidationReport validate_script(const DerivationScript& script, const SamplerConfig& config);

}  // namespace natlat
