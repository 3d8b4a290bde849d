#include "bwcr/core.h"

#include <cmath>
#include <sstream>

namespace bwcr {
namespace {

constexpr double kMassTolerance = 1e-9;

void check_unit_interval(const Mat& mean) {
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    const double v = mean.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      std::ostringstream os;
      os << "mean matrix entry " << v << " outside [0,1]";
      throw ContractError(os.str());
    }
  }
}

}  // namespace

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kBernoulli: return "bernoulli";
    case OutcomeKind::kFixed: return "fixed";
    case OutcomeKind::kScaledBeta: return "scaled_beta";
  }
  return "unknown";
}

OutcomeKind outcome_kind_from_string(const std::string& name) {
  if (name == "bernoulli") return OutcomeKind::kBernoulli;
  if (name == "fixed") return OutcomeKind::kFixed;
  if (name == "scaled_beta") return OutcomeKind::kScaledBeta;
  throw ConfigError("unknown outcome_kind '" + name + "'");
}

Mat ContextualModel::mean_matrix() const {
  Mat mean(d(), m());
  for (int j = 0; j < d(); ++j) {
    for (int i = 0; i < m(); ++i) mean(j, i) = contexts[j][i].dot(weights[j]);
  }
  return mean;
}

InstanceModel::InstanceModel(Mat mean, OutcomeKind kind, double beta_concentration)
    : mean_(std::move(mean)), kind_(kind), beta_concentration_(beta_concentration) {
  if (mean_.rows() == 0 || mean_.cols() == 0) {
    throw ContractError("instance needs d >= 1 and m >= 1");
  }
  check_unit_interval(mean_);
  if (!(beta_concentration_ > 0.0)) {
    throw ContractError("beta concentration must be positive");
  }
}

InstanceModel InstanceModel::from_contexts(ContextualModel model, OutcomeKind kind,
                                           double beta_concentration) {
  if (model.n <= 0 || model.d() == 0 || model.m() == 0) {
    throw ContractError("contextual model needs n, d, m >= 1");
  }
  if (static_cast<int>(model.contexts.size()) != model.d()) {
    throw ContractError("contexts must have one row per component");
  }
  for (int j = 0; j < model.d(); ++j) {
    if (model.weights[j].size() != model.n) throw ContractError("weight dimension mismatch");
    if (static_cast<int>(model.contexts[j].size()) != model.m()) {
      throw ContractError("ragged context table");
    }
    for (const Vec& x : model.contexts[j]) {
      if (x.size() != model.n) throw ContractError("context dimension mismatch");
      if (x.minCoeff() < 0.0 || x.maxCoeff() > 1.0) {
        throw ContractError("context entries must lie in [0,1]");
      }
    }
  }
  Mat mean = model.mean_matrix();
  // Round-off can push x.w a hair outside [0,1]; anything larger is an error.
  constexpr double kTol = 1e-12;
  if (mean.minCoeff() < -kTol || mean.maxCoeff() > 1.0 + kTol) {
    throw ContractError("contexts and weights give means outside [0,1]");
  }
  mean = mean.cwiseMax(0.0).cwiseMin(1.0);
  InstanceModel instance(std::move(mean), kind, beta_concentration);
  instance.contextual_ = std::make_shared<const ContextualModel>(std::move(model));
  return instance;
}

const ContextualModel& InstanceModel::contextual() const {
  if (!contextual_) throw ContractError("instance has no contextual structure");
  return *contextual_;
}

Vec sample_observation(const InstanceModel& instance, int arm, Rng& rng) {
  if (arm < 0 || arm >= instance.m()) {
    throw std::out_of_range("arm index " + std::to_string(arm) + " out of range");
  }
  const Vec mean = instance.mean().col(arm);
  Vec v(mean.size());
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    const double mu = mean[j];
    switch (instance.outcome_kind()) {
      case OutcomeKind::kFixed:
        v[j] = mu;
        break;
      case OutcomeKind::kBernoulli:
        v[j] = rng.bernoulli(mu) ? 1.0 : 0.0;
        break;
      case OutcomeKind::kScaledBeta: {
        if (mu <= 0.0 || mu >= 1.0) {
          v[j] = mu;
        } else {
          const double k = instance.beta_concentration();
          v[j] = rng.beta(k * mu, k * (1.0 - mu));
        }
        break;
      }
    }
  }
  return v;
}

void PolicyDistribution::validate() const {
  if (weights.size() == 0) throw ContractError("policy over zero arms");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < -kMassTolerance) {
      throw ContractError("policy weights must be finite and nonnegative");
    }
  }
  const double total = mass();
  if (allow_idle) {
    if (total > 1.0 + kMassTolerance) throw ContractError("policy mass exceeds one");
  } else if (std::abs(total - 1.0) > kMassTolerance) {
    throw ContractError("policy weights must sum to one");
  }
}

PolicyDistribution PolicyDistribution::uniform(int m) {
  return {Vec::Constant(m, 1.0 / m), false};
}

PolicyDistribution PolicyDistribution::point_mass(int m, int arm, bool allow_idle) {
  if (arm < 0 || arm >= m) throw std::out_of_range("point_mass: arm out of range");
  PolicyDistribution p{Vec::Zero(m), allow_idle};
  p.weights[arm] = 1.0;
  return p;
}

PolicyDistribution PolicyDistribution::idle(int m) { return {Vec::Zero(m), true}; }

ArmChoice draw_arm(const PolicyDistribution& policy, Rng& rng) {
  policy.validate();
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = -1;
  for (int i = 0; i < policy.m(); ++i) {
    const double w = std::max(policy.weights[i], 0.0);
    if (w <= 0.0) continue;
    last_positive = i;
    cumulative += w;
    if (u < cumulative) return i;
  }
  if (policy.allow_idle) return std::nullopt;
  // Mass sums to one up to rounding; the leftover sliver belongs to the last arm.
  return last_positive;
}

void RunHistory::append(ArmChoice arm, Vec observation, PolicyDistribution policy) {
  arms.push_back(arm);
  observations.push_back(std::move(observation));
  policies.push_back(std::move(policy));
}

void RunHistory::validate() const {
  if (arms.size() != observations.size() || arms.size() != policies.size()) {
    throw ContractError("run history columns have different lengths");
  }
}

}  // namespace bwcr
