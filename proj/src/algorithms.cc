#include "bwcr/algorithms.h"

#include <cmath>
#include <limits>

namespace bwcr {
namespace {

constexpr double kTieTol = 1e-12;

void begin_step(AlgorithmState& state) {
  if (state.t >= state.config.horizon) throw ContractError("step called past the horizon");
}

void record_choice(AlgorithmState& state, const Mat& a, const PolicyDistribution& policy) {
  state.last_a = a;
  state.last_policy = policy;
  state.last_x = a * policy.weights;
  state.last_z = state.last_x;
}

bool budget_exhausted(const AlgorithmState& state) {
  for (int j = 1; j < state.d; ++j) {
    if (state.budget_spent[j] > state.config.budget) return true;
  }
  return false;
}

Vec theta_from_primal(const AlgorithmState& state, UpdateRule rule) {
  const Objective& f = *state.linear_objective;
  if (rule == UpdateRule::kPrimalSmoothed) {
    const double sigma = state.config.sigma.value_or(default_sigma(state.d, state.config.horizon));
    return -smoothed(f, sigma).gradient(state.xbar);
  }
  return -f.supergradient(state.xbar);
}

Vec phi_from_primal(const AlgorithmState& state, UpdateRule rule) {
  const ConvexSet& set = *state.config.target;
  if (rule == UpdateRule::kPrimalSmoothed) {
    const double sigma = state.config.sigma.value_or(default_sigma(state.d, state.config.horizon));
    return smoothed_distance(state.zbar, set, sigma).gradient;
  }
  const Vec diff = state.zbar - set.project(state.zbar, state.config.norm);
  const double r = norm_of(diff, state.config.norm);
  return r > 0.0 ? Vec(diff / r) : Vec(Vec::Zero(state.d));
}

}  // namespace

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::kUcbBwcr: return "ucb_bwcr";
    case Variant::kUcbBwk: return "ucb_bwk";
    case Variant::kDualOco: return "dual_oco";
    case Variant::kFwPrimal: return "fw_primal";
    case Variant::kFwBwc: return "fw_bwc";
    case Variant::kCombined: return "combined";
    case Variant::kGreedyBwk: return "greedy_bwk";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name) {
  for (Variant v : {Variant::kUcbBwcr, Variant::kUcbBwk, Variant::kDualOco, Variant::kFwPrimal,
                    Variant::kFwBwc, Variant::kCombined, Variant::kGreedyBwk}) {
    if (name == to_string(v)) return v;
  }
  throw ConfigError("unknown algorithm variant '" + name + "'");
}

const char* to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::kDual: return "dual";
    case UpdateRule::kPrimal: return "primal";
    case UpdateRule::kPrimalSmoothed: return "primal_smoothed";
  }
  return "unknown";
}

UpdateRule update_rule_from_string(const std::string& name) {
  if (name == "dual") return UpdateRule::kDual;
  if (name == "primal") return UpdateRule::kPrimal;
  if (name == "primal_smoothed") return UpdateRule::kPrimalSmoothed;
  throw ConfigError("unknown update rule '" + name + "'");
}

bool is_bwk(Variant variant) {
  return variant == Variant::kUcbBwk || variant == Variant::kGreedyBwk;
}

double default_sigma(int d, int horizon) {
  return std::sqrt(static_cast<double>(d) / horizon * std::log(2.0 * horizon));
}

double default_bwk_eps(int m, double gamma, double budget) {
  return std::min(0.5, std::sqrt(m * gamma / budget));
}

void AlgorithmConfig::validate(int d, int m) const {
  if (d < 1 || m < 1) throw ConfigError("instance needs d, m >= 1");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (eps && !(*eps >= 0.0 && *eps <= 1.0)) throw ConfigError("eps must lie in [0,1]");
  if (objective && objective->dim() != d) throw ConfigError("objective dimension mismatch");
  if (target && target->dim() != d) throw ConfigError("target set dimension mismatch");
  if (known_mean && (known_mean->rows() != d || known_mean->cols() != m)) {
    throw ConfigError("known_mean shape mismatch");
  }
  switch (variant) {
    case Variant::kUcbBwcr:
    case Variant::kCombined:
      if (!objective && !target) throw ConfigError("variant needs an objective or a target set");
      break;
    case Variant::kUcbBwk:
    case Variant::kGreedyBwk:
      if (d < 2) throw ConfigError("knapsack variants need a reward and at least one resource");
      if (!(budget > 0.0)) throw ConfigError("knapsack variants need a positive budget");
      break;
    case Variant::kDualOco:
      if (objective.has_value() == target.has_value()) {
        throw ConfigError("dual_oco takes exactly one of objective or target set");
      }
      break;
    case Variant::kFwPrimal:
      if (!objective) throw ConfigError("fw_primal needs an objective");
      if (!objective->smoothness() && !sigma && !sigma_auto) {
        throw ConfigError("fw_primal needs a smooth objective or a smoothing parameter");
      }
      break;
    case Variant::kFwBwc:
      if (!target) throw ConfigError("fw_bwc needs a target set");
      break;
  }
  if (variant == Variant::kCombined) {
    if (objective && theta_update == UpdateRule::kPrimal && !objective->smoothness()) {
      throw ConfigError("primal objective updates need a smooth objective");
    }
  }
}

AlgorithmState::AlgorithmState(AlgorithmConfig cfg, int d_in, int m_in,
                               std::shared_ptr<const ContextualModel> contexts)
    : config(std::move(cfg)),
      d(d_in),
      m(m_in),
      gamma(config.gamma.value_or(default_gamma(m_in, config.horizon, d_in, config.delta))),
      confidence(d_in, m_in, gamma) {
  config.validate(d, m);
  if (config.sigma_auto && !config.sigma) config.sigma = default_sigma(d, config.horizon);
  if (config.use_contexts) {
    if (!contexts) throw ConfigError("use_contexts requires a contextual instance");
    ellipsoid.emplace(std::move(contexts));
  }
  theta = Vec::Zero(d);
  phi = Vec::Zero(d);
  budget_spent = Vec::Zero(d);
  last_policy = PolicyDistribution::uniform(m);
  const Hypercube initial = hypercube();
  xbar = initial.ucb * last_policy.weights;
  zbar = xbar;
  last_x = xbar;
  last_z = zbar;

  const int horizon = config.horizon;
  switch (config.variant) {
    case Variant::kUcbBwcr:
      ucb_solver = std::make_shared<UcbStepSolver>(
          config.objective, config.target.value_or(ConvexSet::unit_box(d)));
      break;
    case Variant::kUcbBwk:
      eps = config.eps.value_or(default_bwk_eps(m, gamma, config.budget));
      break;
    case Variant::kGreedyBwk:
      eps = config.eps.value_or(0.0);
      phi = Vec::Zero(d - 1);
      phi_oco = OcoState::make(OcoKind::kEntropic, d - 1, Norm::kL1, 1.0, horizon, true);
      phi = phi_oco->theta;
      break;
    case Variant::kDualOco: {
      linear_objective = config.objective ? *config.objective
                                          : Objective::neg_distance(*config.target, config.norm);
      const Objective& f = *linear_objective;
      if (!std::isfinite(f.lipschitz())) {
        throw ConfigError("dual_oco needs a finite Lipschitz constant");
      }
      theta_oco = OcoState::make(config.oco, d, dual_of(f.norm()), f.lipschitz(), horizon);
      break;
    }
    case Variant::kFwPrimal:
      linear_objective = *config.objective;
      break;
    case Variant::kFwBwc:
      break;
    case Variant::kCombined:
      if (config.objective) {
        linear_objective = *config.objective;
        if (config.theta_update == UpdateRule::kDual) {
          if (!std::isfinite(linear_objective->lipschitz())) {
            throw ConfigError("dual objective updates need a finite Lipschitz constant");
          }
          theta_oco = OcoState::make(config.oco, d, dual_of(linear_objective->norm()),
                                     linear_objective->lipschitz(), horizon);
        }
      }
      if (config.target && config.phi_update == UpdateRule::kDual) {
        phi_oco = OcoState::make(config.oco, d, dual_of(config.norm), 1.0, horizon);
      }
      break;
  }
}

Hypercube AlgorithmState::hypercube() const {
  if (config.known_mean) return Hypercube::degenerate(*config.known_mean);
  return ellipsoid ? ellipsoid->envelope() : confidence.hypercube();
}

int argmin_column(const Mat& a, const Vec& theta) {
  const Vec scores = a.transpose() * theta;
  int best = 0;
  for (int i = 1; i < scores.size(); ++i) {
    if (scores[i] < scores[best] - kTieTol) best = i;
  }
  return best;
}

std::optional<PolicyDistribution> solve_one_constraint(const Vec& a, const Vec& b, double h,
                                                       bool allow_idle) {
  const int m = static_cast<int>(a.size());
  // Candidate supports: single arms, the idle point, and pairs on the line b.p = h.
  // Index m stands for the idle direction (a = b = 0).
  auto coef_a = [&](int i) { return i < m ? a[i] : 0.0; };
  auto coef_b = [&](int i) { return i < m ? b[i] : 0.0; };
  const int n = allow_idle ? m + 1 : m;
  std::optional<PolicyDistribution> best;
  double best_value = std::numeric_limits<double>::infinity();
  auto consider = [&](int i, int j, double wi) {
    const double value = wi * coef_a(i) + (1.0 - wi) * (j >= 0 ? coef_a(j) : 0.0);
    if (value < best_value - kTieTol) {
      PolicyDistribution p{Vec::Zero(m), allow_idle};
      if (i < m) p.weights[i] += wi;
      if (j >= 0 && j < m) p.weights[j] += 1.0 - wi;
      best_value = value;
      best = p;
    }
  };
  for (int i = 0; i < n; ++i) {
    if (coef_b(i) <= h + kTieTol) consider(i, -1, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double bi = coef_b(i);
      const double bj = coef_b(j);
      if ((bi - h) * (bj - h) >= 0.0) continue;
      const double wi = (h - bj) / (bi - bj);
      consider(i, j, wi);
    }
  }
  return best;
}

Decision step_ucb_bwcr(AlgorithmState& state) {
  begin_step(state);
  const Hypercube hc = state.hypercube();
  const UcbStepResult res = state.ucb_solver->solve(hc);
  Decision dec{res.policy, false};
  state.last_policy = dec.policy;
  if (res.feasible) {
    state.last_x = res.optimistic_point;
    state.last_z = res.feasible_point;
  } else {
    state.last_x = hc.ucb * dec.policy.weights;
    state.last_z = state.last_x;
  }
  state.last_a = Mat();
  return dec;
}

Decision step_ucb_bwk(AlgorithmState& state) {
  begin_step(state);
  if (state.stopped || budget_exhausted(state)) {
    state.stopped = true;
    return {PolicyDistribution::idle(state.m), true};
  }
  const Hypercube hc = state.hypercube();
  const int d = state.d;
  LpProblem lp;
  lp.r = hc.ucb.row(0).transpose();
  lp.consumption = hc.lcb.bottomRows(d - 1);
  lp.budget_ratio = state.config.budget / state.config.horizon;
  lp.eps = state.eps;
  lp.allow_idle = state.config.allow_idle;
  PolicyDistribution policy;
  if (auto sol = solve_lp(lp)) {
    policy = sol->policy;
  } else if (state.config.allow_idle) {
    policy = PolicyDistribution::idle(state.m);
  } else {
    // Arm whose largest lower-bound consumption is smallest.
    const Vec worst = lp.consumption.colwise().maxCoeff().transpose();
    int best = 0;
    for (int i = 1; i < state.m; ++i) {
      if (worst[i] < worst[best] - kTieTol) best = i;
    }
    policy = PolicyDistribution::point_mass(state.m, best);
  }
  Mat a(d, state.m);
  a.row(0) = hc.ucb.row(0);
  a.bottomRows(d - 1) = hc.lcb.bottomRows(d - 1);
  record_choice(state, a, policy);
  return {policy, false};
}

Decision step_dual(AlgorithmState& state) {
  begin_step(state);
  const Hypercube hc = state.hypercube();
  const Mat a = vertex(hc, state.theta);
  const int arm = argmin_column(a, state.theta);
  const PolicyDistribution policy = PolicyDistribution::point_mass(state.m, arm);
  record_choice(state, a, policy);
  return {policy, false};
}

Decision step_fw_primal(AlgorithmState& state) {
  begin_step(state);
  const UpdateRule rule =
      state.config.sigma ? UpdateRule::kPrimalSmoothed : UpdateRule::kPrimal;
  state.theta = theta_from_primal(state, rule);
  const Hypercube hc = state.hypercube();
  const Mat a = vertex(hc, state.theta);
  const int arm = argmin_column(a, state.theta);
  const PolicyDistribution policy = PolicyDistribution::point_mass(state.m, arm);
  record_choice(state, a, policy);
  return {policy, false};
}

Decision step_fw_bwc(AlgorithmState& state) {
  begin_step(state);
  const Hypercube hc = state.hypercube();
  const ConvexSet& set = *state.config.target;
  if (set.contains(state.xbar)) {
    const PolicyDistribution policy = PolicyDistribution::uniform(state.m);
    state.theta = Vec::Zero(state.d);
    record_choice(state, hc.ucb, policy);
    return {policy, false};
  }
  state.theta = state.xbar - set.project(state.xbar, state.config.norm);
  const Mat a = vertex(hc, state.theta);
  const int arm = argmin_column(a, state.theta);
  const PolicyDistribution policy = PolicyDistribution::point_mass(state.m, arm);
  record_choice(state, a, policy);
  return {policy, false};
}

Decision step_combined(AlgorithmState& state) {
  begin_step(state);
  const AlgorithmConfig& cfg = state.config;
  if (state.linear_objective && cfg.theta_update != UpdateRule::kDual) {
    state.theta = theta_from_primal(state, cfg.theta_update);
  }
  if (cfg.target && cfg.phi_update != UpdateRule::kDual) {
    state.phi = phi_from_primal(state, cfg.phi_update);
  }
  const Hypercube hc = state.hypercube();
  const Mat w_theta = vertex(hc, state.theta);
  const Mat w_phi = vertex(hc, state.phi);
  const Vec a = w_theta.transpose() * state.theta;
  const Vec b = w_phi.transpose() * state.phi;
  const double h = cfg.target ? cfg.target->support(state.phi) : 0.0;
  auto solved = solve_one_constraint(a, b, h, cfg.allow_idle);
  const PolicyDistribution policy = solved ? *solved : PolicyDistribution::uniform(state.m);
  state.last_a = w_theta;
  state.last_policy = policy;
  state.last_x = w_theta * policy.weights;
  state.last_z = w_phi * policy.weights;
  return {policy, false};
}

Decision step_greedy_bwk(AlgorithmState& state) {
  begin_step(state);
  if (state.stopped || budget_exhausted(state)) {
    state.stopped = true;
    return {PolicyDistribution::idle(state.m), true};
  }
  const Hypercube hc = state.hypercube();
  const int d = state.d;
  const double cap = (1.0 - state.eps) * state.config.budget / state.config.horizon;
  const Vec reward = hc.ucb.row(0).transpose();
  const Vec denom = hc.lcb.bottomRows(d - 1).transpose() * state.phi;
  // Best ratio among arms with positive weighted consumption.
  int ratio_arm = -1;
  for (int i = 0; i < state.m; ++i) {
    if (denom[i] <= 0.0) continue;
    if (ratio_arm < 0 || reward[i] * denom[ratio_arm] > reward[ratio_arm] * denom[i] + kTieTol) {
      ratio_arm = i;
    }
  }
  // Best reward among arms that consume nothing under phi; they play at p = 1.
  int free_arm = -1;
  for (int i = 0; i < state.m; ++i) {
    if (denom[i] > 0.0) continue;
    if (free_arm < 0 || reward[i] > reward[free_arm] + kTieTol) free_arm = i;
  }
  PolicyDistribution policy = PolicyDistribution::idle(state.m);
  const double ratio_p = ratio_arm >= 0 ? std::min(1.0, cap / denom[ratio_arm]) : 0.0;
  const double ratio_value = ratio_arm >= 0 ? reward[ratio_arm] * ratio_p : -1.0;
  if (free_arm >= 0 && reward[free_arm] >= ratio_value - kTieTol) {
    policy.weights[free_arm] = 1.0;
  } else if (ratio_arm >= 0) {
    policy.weights[ratio_arm] = ratio_p;
  }
  Mat a(d, state.m);
  a.row(0) = hc.ucb.row(0);
  a.bottomRows(d - 1) = hc.lcb.bottomRows(d - 1);
  record_choice(state, a, policy);
  return {policy, false};
}

Decision step(AlgorithmState& state) {
  switch (state.config.variant) {
    case Variant::kUcbBwcr: return step_ucb_bwcr(state);
    case Variant::kUcbBwk: return step_ucb_bwk(state);
    case Variant::kDualOco: return step_dual(state);
    case Variant::kFwPrimal: return step_fw_primal(state);
    case Variant::kFwBwc: return step_fw_bwc(state);
    case Variant::kCombined: return step_combined(state);
    case Variant::kGreedyBwk: return step_greedy_bwk(state);
  }
  throw ContractError("unknown variant");
}

void observe(AlgorithmState& state, ArmChoice arm, const Vec& v) {
  if (v.size() != state.d) throw ContractError("observe: observation dimension mismatch");
  if (v.minCoeff() < 0.0 || v.maxCoeff() > 1.0) throw ContractError("observe: v outside [0,1]");
  state.confidence.record(arm, v);
  if (state.ellipsoid && arm) state.ellipsoid->record(*arm, v);
  if (is_bwk(state.config.variant)) state.budget_spent += v;
  ++state.t;
  const double w = 1.0 / state.t;
  state.xbar = (1.0 - w) * state.xbar + w * state.last_x;
  state.zbar = (1.0 - w) * state.zbar + w * state.last_z;

  const AlgorithmConfig& cfg = state.config;
  if (state.theta_oco) {
    // Loss f*(theta) - theta . x_t has gradient argmax_y - x_t.
    const Vec grad = state.linear_objective->fenchel_argmax(state.theta) - state.last_x;
    state.theta_oco = oco_step(*state.theta_oco, grad);
    state.theta = state.theta_oco->theta;
  }
  if (state.phi_oco) {
    Vec grad;
    if (cfg.variant == Variant::kGreedyBwk) {
      // Loss (B/T) sum(phi) - phi . (consumption estimate), phi on the simplex.
      const double cap = cfg.budget / cfg.horizon;
      grad = Vec::Constant(state.d - 1, cap) - state.last_x.tail(state.d - 1);
    } else {
      grad = cfg.target->support_point(state.phi) - state.last_z;
    }
    state.phi_oco = oco_step(*state.phi_oco, grad);
    state.phi = state.phi_oco->theta;
  }
}

}  // namespace bwcr
