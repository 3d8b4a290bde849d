#ifndef BWCR_ALGORITHMS_H_
#define BWCR_ALGORITHMS_H_

#include <memory>
#include <optional>
#include <string>

#include "bwcr/confidence.h"
#include "bwcr/core.h"
#include "bwcr/geometry.h"
#include "bwcr/objective.h"
#include "bwcr/solvers.h"

namespace bwcr {

enum class Variant { kUcbBwcr, kUcbBwk, kDualOco, kFwPrimal, kFwBwc, kCombined, kGreedyBwk };

// How a dual direction is chosen each step.
enum class UpdateRule {
  kDual,            // online learner on the conjugate
  kPrimal,          // gradient at the running average
  kPrimalSmoothed,  // gradient of the smoothed function at the running average
};

const char* to_string(Variant variant);
Variant variant_from_string(const std::string& name);
const char* to_string(UpdateRule rule);
UpdateRule update_rule_from_string(const std::string& name);

bool is_bwk(Variant variant);

// sqrt((d / T) log(2T)).
double default_sigma(int d, int horizon);
// min(1/2, sqrt(m gamma / B)).
double default_bwk_eps(int m, double gamma, double budget);

struct AlgorithmConfig {
  Variant variant = Variant::kUcbBwcr;
  std::optional<Objective> objective;
  std::optional<ConvexSet> target;
  int horizon = 1;
  // Knapsack variants: component 0 is reward, components 1.. are consumptions.
  double budget = 0.0;
  std::optional<double> eps;
  std::optional<double> gamma;
  double delta = 0.05;
  OcoKind oco = OcoKind::kOgd;
  UpdateRule theta_update = UpdateRule::kDual;
  UpdateRule phi_update = UpdateRule::kDual;
  std::optional<double> sigma;
  // Use default_sigma(d, T) when sigma is unset.
  bool sigma_auto = false;
  bool allow_idle = false;
  bool use_contexts = false;
  // Known-parameter mode: the confidence bounds collapse onto this matrix.
  std::optional<Mat> known_mean;
  // Norm of the distance to the target set for set-only variants.
  Norm norm = Norm::kL2;

  // Throws ConfigError when the fields required by the variant are missing.
  void validate(int d, int m) const;
};

struct Decision {
  PolicyDistribution policy;
  bool stop = false;
};

struct AlgorithmState {
  AlgorithmConfig config;
  int d = 0;
  int m = 0;
  int t = 0;  // completed steps
  double gamma = 0.0;
  double eps = 0.0;
  ConfidenceState confidence;
  std::optional<EllipsoidState> ellipsoid;

  Vec theta;
  Vec phi;
  std::optional<OcoState> theta_oco;
  std::optional<OcoState> phi_oco;
  // Running means of A_t p_t for the objective and constraint directions.
  Vec xbar;
  Vec zbar;
  Vec budget_spent;
  bool stopped = false;

  // Set by the last step call and consumed by observe.
  Mat last_a;
  Vec last_x;
  Vec last_z;
  PolicyDistribution last_policy;

  std::shared_ptr<UcbStepSolver> ucb_solver;
  // Objective driving the linearized variants (-d(., S) for set-only problems).
  std::optional<Objective> linear_objective;

  AlgorithmState(AlgorithmConfig cfg, int d_in, int m_in,
                 std::shared_ptr<const ContextualModel> contexts = nullptr);

  Hypercube hypercube() const;
};

Decision step_ucb_bwcr(AlgorithmState& state);
Decision step_ucb_bwk(AlgorithmState& state);
Decision step_dual(AlgorithmState& state);
Decision step_fw_primal(AlgorithmState& state);
Decision step_fw_bwc(AlgorithmState& state);
Decision step_combined(AlgorithmState& state);
Decision step_greedy_bwk(AlgorithmState& state);
Decision step(AlgorithmState& state);

// Ingests the outcome of the last step: v is the zero vector for idle steps.
void observe(AlgorithmState& state, ArmChoice arm, const Vec& v);

// argmin over p in the simplex (or sum p <= 1 with allow_idle) of a.p
// subject to b.p <= h, by enumerating vertices with support of size <= 2.
// nullopt when infeasible.
std::optional<PolicyDistribution> solve_one_constraint(const Vec& a, const Vec& b, double h,
                                                       bool allow_idle);

// Lowest index attaining the minimum of theta . A_i.
int argmin_column(const Mat& a, const Vec& theta);

}  // namespace bwcr

#endif  // BWCR_ALGORITHMS_H_
