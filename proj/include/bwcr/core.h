#ifndef BWCR_CORE_H_
#define BWCR_CORE_H_

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwcr/rng.h"

namespace bwcr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Precondition or invariant violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Requested combination is well-formed but not implemented.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance generator could not produce a feasible instance.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutcomeKind {
  kBernoulli,   // each entry independently Bernoulli(V_ji)
  kFixed,       // deterministic, returns V_{.,i}
  kScaledBeta,  // each entry Beta(k V_ji, k (1 - V_ji)), k = concentration
};

const char* to_string(OutcomeKind kind);
OutcomeKind outcome_kind_from_string(const std::string& name);

// Linear contextual structure: V_ji = contexts[j][i] . weights[j].
struct ContextualModel {
  int n = 0;
  std::vector<std::vector<Vec>> contexts;  // [j][i], each in [0,1]^n
  std::vector<Vec> weights;                // [j], each in R^n

  int d() const { return static_cast<int>(weights.size()); }
  int m() const { return contexts.empty() ? 0 : static_cast<int>(contexts[0].size()); }
  Mat mean_matrix() const;
};

// Ground truth of a simulated problem: a d x m mean matrix plus the outcome
// distribution family. Immutable once built; safe to share across threads.
class InstanceModel {
 public:
  InstanceModel(Mat mean, OutcomeKind kind = OutcomeKind::kBernoulli,
                double beta_concentration = 4.0);
  static InstanceModel from_contexts(ContextualModel model,
                                     OutcomeKind kind = OutcomeKind::kBernoulli,
                                     double beta_concentration = 4.0);

  int d() const { return static_cast<int>(mean_.rows()); }
  int m() const { return static_cast<int>(mean_.cols()); }
  const Mat& mean() const { return mean_; }
  OutcomeKind outcome_kind() const { return kind_; }
  double beta_concentration() const { return beta_concentration_; }
  bool is_contextual() const { return contextual_ != nullptr; }
  const ContextualModel& contextual() const;
  std::shared_ptr<const ContextualModel> contextual_ptr() const { return contextual_; }

 private:
  Mat mean_;
  OutcomeKind kind_;
  double beta_concentration_;
  std::shared_ptr<const ContextualModel> contextual_;
};

Vec sample_observation(const InstanceModel& instance, int arm, Rng& rng);

// Mixed strategy over arms. With allow_idle the mass may sum to less than one;
// the residual is the probability of playing nothing.
struct PolicyDistribution {
  Vec weights;
  bool allow_idle = false;

  int m() const { return static_cast<int>(weights.size()); }
  double mass() const { return weights.sum(); }
  void validate() const;

  static PolicyDistribution uniform(int m);
  static PolicyDistribution point_mass(int m, int arm, bool allow_idle = false);
  static PolicyDistribution idle(int m);
};

// Chosen arm, or std::nullopt for an idle step.
using ArmChoice = std::optional<int>;

ArmChoice draw_arm(const PolicyDistribution& policy, Rng& rng);

struct RunHistory {
  std::vector<Vec> observations;
  std::vector<ArmChoice> arms;
  std::vector<PolicyDistribution> policies;
  // First step at which the run stopped (tau); horizon + 1 when it never did.
  int stop_time = 0;

  std::size_t size() const { return observations.size(); }
  void append(ArmChoice arm, Vec observation, PolicyDistribution policy);
  void validate() const;
};

}  // namespace bwcr

#endif  // BWCR_CORE_H_
