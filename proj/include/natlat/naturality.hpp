#pragma once

// Mediation and redundancy of a latent over observables, the
// mediator-determines-redund bound, and the agent-level checks built on it
// (translatability audit, cross-agent translation).
//
// Mediation error: D_KL of P[latent, X] against the star diagram latent -> X_j.
// Redundancy error for X_i: H(latent | X_i).
// Several latent variables are always treated jointly as one latent.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "natlat/distribution.hpp"
#include "natlat/epsilon.hpp"
#include "natlat/graph.hpp"
#include "natlat/random.hpp"

namespace natlat {

/// Errors at or below this count as exact.
inline constexpr double kExactTolerance = 1e-9;

/// Default max-abs cell tolerance when comparing two agents' observables.
inline constexpr double kAgreementTolerance = 1e-6;

class AgentModel {
 public:
  /// Observables and latents must be disjoint, cover the joint's variables,
  /// and there must be at least two observables and one latent.
  AgentModel(JointDistribution joint, Names observables, Names latents);

  const JointDistribution& joint() const { return joint_; }
  const Names& observables() const { return observables_; }
  const Names& latents() const { return latents_; }

 private:
  JointDistribution joint_;
  Names observables_;
  Names latents_;
};

struct NaturalityReport {
  double eps_mediation_bits = 0.0;
  std::vector<double> eps_redundancy_bits;  // one per observable
  double eps_redundancy_max_bits = 0.0;
  bool is_exact = false;
};

/// Star diagram: latents form a complete DAG among themselves and each
/// observable has every latent as its parents.
Dag mediation_dag(const AgentModel& m);

double mediation_error(const AgentModel& m);
std::vector<double> redundancy_errors(const AgentModel& m);
NaturalityReport naturality_report(const AgentModel& m);

/// eps_med + 2 * max_i eps_red,i, the two-observable bound on H(redund | mediator).
double theorem1_bound(double eps_mediation, double eps_redundancy_max);
/// The same formula as an expression over `e_med` and `e_red`.
EpsilonExpr theorem1_bound_expression();

struct MediatorRedundCheck {
  double eps_mediation_bits = 0.0;
  std::vector<double> eps_redundancy_bits;
  double eps_redundancy_max_bits = 0.0;
  double conclusion_bits = 0.0;  // H(redund | mediator)
  double bound_bits = 0.0;
  double slack_bits = 0.0;       // bound - conclusion
  bool holds = false;            // conclusion <= bound + kExactTolerance
};

/// Evaluates both premises and the conclusion of the mediator-determines-redund
/// theorem on P. Requires exactly two observables (chunk larger sets first).
MediatorRedundCheck mediator_determines_redund(const JointDistribution& p, const Names& observables,
                                               const Names& mediator, const Names& redund);

struct TranslatabilityAudit {
  double eps_mediation_bits = 0.0;
  double redundancy_x1_bits = 0.0;  // H(latent | X_1)
  double redundancy_x2_bits = 0.0;  // H(latent | X_2)
  double threshold_bits = 0.0;
  bool pass = false;
};

/// Whether Alice's latent is natural enough to be guaranteed a function of any
/// other agent's mediating latent. Requires exactly two observables.
TranslatabilityAudit translatability_audit(const AgentModel& alice, double threshold_bits);

struct Translation {
  double alice_given_bob_bits = 0.0;  // H(latent_A | latent_B)
  double bob_given_alice_bits = 0.0;  // H(latent_B | latent_A)
};

/// Conditional entropies between two agents' latents under a coupling over
/// X, latent_A and latent_B. Throws ModelDisagreement if the agents disagree on
/// the observables, or the coupling does not reproduce either model, by more
/// than `tolerance` in any cell.
Translation cross_agent_translation(const AgentModel& alice, const AgentModel& bob,
                                    const JointDistribution& coupling, double tolerance = kAgreementTolerance);

// ---------------------------------------------------------------------------
// Randomized check of the bound

struct TheoremInstance {
  JointDistribution joint;  // over X1, X2, L (mediator candidate), Lp (redund candidate)
  std::string kind;
};

struct SweepOptions {
  std::uint64_t seed = 0;
  std::size_t samples = 1000;
  /// Only draw near-deterministic instances (premises close to exact).
  bool near_deterministic = false;
};

/// Alphabets of 1..4 per variable. Latents come from random functions of X
/// (redunds), random conditionals generating X (mediators), or raw random joints.
TheoremInstance sample_theorem_instance(Rng& rng, bool near_deterministic = false);

struct SweepReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_slack_bits = 0.0;
  double max_slack_bits = 0.0;
  double max_conclusion_bits = 0.0;
};

SweepReport theorem_sweep(const SweepOptions& options);

// ---------------------------------------------------------------------------
// Text format: the distribution format plus one `roles obs:<a,b,...> latent:<l,...>` line.

AgentModel parse_agent_model(std::string_view text);
std::string format_agent_model(const AgentModel& m);

}  // namespace natlat
