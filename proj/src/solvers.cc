#include "bwcr/solvers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bwcr/simplex.h"

namespace bwcr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PolicyDistribution clean_policy(const Vec& raw, bool allow_idle) {
  Vec p = raw.cwiseMax(0.0);
  const double total = p.sum();
  if (!allow_idle || total > 1.0) {
    if (total > 0.0) p /= total;
  }
  return {p, allow_idle};
}

// Dense row builder for LinearProgram blocks.
class RowSet {
 public:
  explicit RowSet(int cols) : cols_(cols) {}
  Eigen::RowVectorXd& add(double rhs) {
    rows_.emplace_back(Eigen::RowVectorXd::Zero(cols_));
    rhs_.push_back(rhs);
    return rows_.back();
  }
  void emit(Mat& a, Vec& b) const {
    a.resize(static_cast<Eigen::Index>(rows_.size()), cols_);
    b.resize(static_cast<Eigen::Index>(rows_.size()));
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      a.row(static_cast<Eigen::Index>(r)) = rows_[r];
      b[static_cast<Eigen::Index>(r)] = rhs_[r];
    }
  }

 private:
  int cols_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<double> rhs_;
};

}  // namespace

void LpProblem::validate() const {
  if (r.size() == 0) throw ContractError("LP needs at least one arm");
  if (consumption.cols() != r.size()) throw ContractError("LP consumption shape mismatch");
  if (!(budget_ratio > 0.0)) throw ContractError("LP budget ratio must be positive");
  if (!(eps >= 0.0 && eps <= 1.0)) throw ContractError("LP eps must lie in [0,1]");
  if (r.minCoeff() < 0.0 || r.maxCoeff() > 1.0) throw ContractError("LP rewards outside [0,1]");
  if (consumption.size() > 0 && (consumption.minCoeff() < 0.0 || consumption.maxCoeff() > 1.0)) {
    throw ContractError("LP consumption outside [0,1]");
  }
}

std::optional<LpSolution> solve_lp(const LpProblem& problem) {
  problem.validate();
  const int m = static_cast<int>(problem.r.size());
  const int k = static_cast<int>(problem.consumption.rows());
  LinearProgram lp;
  lp.c = problem.r;
  const double cap = (1.0 - problem.eps) * problem.budget_ratio;
  Mat a_ub(k + (problem.allow_idle ? 1 : 0), m);
  Vec b_ub(a_ub.rows());
  if (k > 0) {
    a_ub.topRows(k) = problem.consumption;
    b_ub.head(k).setConstant(cap);
  }
  if (problem.allow_idle) {
    a_ub.row(k).setOnes();
    b_ub[k] = 1.0;
  } else {
    lp.a_eq = Mat::Ones(1, m);
    lp.b_eq = Vec::Ones(1);
  }
  lp.a_ub = std::move(a_ub);
  lp.b_ub = std::move(b_ub);
  const LpResult res = solve_linear_program(lp);
  if (res.status != LpStatus::kOptimal) return std::nullopt;
  LpSolution sol{clean_policy(res.x, problem.allow_idle), 0.0};
  sol.value = problem.r.dot(sol.policy.weights);
  return sol;
}

UcbStepSolver::UcbStepSolver(std::optional<Objective> objective, ConvexSet set)
    : objective_(std::move(objective)), set_(std::move(set)) {
  if (objective_ && objective_->dim() != set_.dim()) {
    throw ContractError("objective and set dimensions differ");
  }
  const int e = epigraph_count();
  shift_ = Vec::Zero(e);
  upper_ = Vec::Zero(e);
  if (!objective_ || objective_->kind() == Objective::Kind::kLinear) return;
  const Objective& f = *objective_;
  const int d = f.dim();
  if (f.kind() == Objective::Kind::kSeparable) {
    for (int j = 0; j < d; ++j) {
      const SeparableTerm& term = f.terms()[j];
      // Concave on [0,1]: the minimum sits at an endpoint.
      shift_[j] = std::max(0.0, -std::min(term.value(0.0), term.value(1.0)));
      upper_[j] = term.value(term.conjugate_argmax(0.0)) + shift_[j];
    }
  } else {
    const double lip = std::isfinite(f.lipschitz()) ? f.lipschitz() : 1.0;
    const Vec mid = Vec::Constant(d, 0.5);
    shift_[0] = std::abs(f.value(mid)) + lip * NormPair{f.norm()}.ones_norm(d) + 1.0;
    upper_[0] = f.fenchel(Vec::Zero(d)) + shift_[0];
  }
  add_cut_at(Vec::Constant(d, 0.5));
}

int UcbStepSolver::epigraph_count() const {
  if (!objective_ || objective_->kind() == Objective::Kind::kLinear) return 0;
  return objective_->kind() == Objective::Kind::kSeparable ? objective_->dim() : 1;
}

void UcbStepSolver::add_cut_at(const Vec& x) {
  const Objective& f = *objective_;
  const int d = f.dim();
  auto push = [&](int term, double point, Vec grad, double offset) {
    int same_term = 0;
    for (const Cut& c : cuts_) {
      if (c.term != term) continue;
      ++same_term;
      if (std::abs(c.slope_point - point) <= 1e-12 && (c.gradient - grad).norm() <= 1e-12) return;
    }
    if (static_cast<std::size_t>(same_term) >= kMaxCutsPerTerm) {
      // Evict the cut of this term that has been slack the longest.
      auto stale = cuts_.end();
      for (auto it = cuts_.begin(); it != cuts_.end(); ++it) {
        if (it->term == term && (stale == cuts_.end() || it->last_tight < stale->last_tight)) {
          stale = it;
        }
      }
      cuts_.erase(stale);
    }
    cuts_.push_back({term, point, std::move(grad), offset, clock_});
  };
  if (f.kind() == Objective::Kind::kSeparable) {
    for (int j = 0; j < d; ++j) {
      const SeparableTerm& term = f.terms()[j];
      // Tangents of sqrt are taken slightly off zero, where the slope is finite.
      const double at = term.kind == SeparableTerm::Kind::kSqrt ? std::max(x[j], 1e-9) : x[j];
      const double slope = term.derivative(at);
      Vec g = Vec::Zero(d);
      g[j] = slope;
      push(j, at, std::move(g), term.value(at) - slope * at);
    }
  } else {
    const Vec g = f.supergradient(x);
    push(0, x.sum(), g, f.value(x) - g.dot(x));
  }
}

UcbStepResult UcbStepSolver::solve(const Hypercube& hc) {
  hc.validate();
  const int d = hc.d();
  const int m = hc.m();
  if (d != set_.dim()) throw ContractError("hypercube and set dimensions differ");
  const bool by_vertices = set_.kind() == ConvexSet::Kind::kVertices;
  const int nv = by_vertices ? static_cast<int>(set_.points().cols()) : 0;
  const int e = epigraph_count();
  // Variables: [p (m) | x (d) | y (d) | mu (nv) | s (e)].
  const int px = m;
  const int py = m + d;
  const int pmu = m + 2 * d;
  const int ps = pmu + nv;
  const int n = ps + e;

  UcbStepResult best;
  best.policy = PolicyDistribution::uniform(m);
  double best_value = -kInf;

  for (int round = 0; round < kMaxRounds; ++round) {
    LinearProgram lp;
    lp.c = Vec::Zero(n);
    if (objective_ && objective_->kind() == Objective::Kind::kLinear) {
      lp.c.segment(px, d) = objective_->coefficients();
    }
    if (e > 0) lp.c.tail(e).setOnes();

    RowSet ub(n);
    for (int j = 0; j < d; ++j) {
      for (int base : {px, py}) {
        auto& lower = ub.add(0.0);  // lcb_j . p - v_j <= 0
        lower.head(m) = hc.lcb.row(j);
        lower[base + j] = -1.0;
        auto& upper = ub.add(0.0);  // v_j - ucb_j . p <= 0
        upper.head(m) = -hc.ucb.row(j);
        upper[base + j] = 1.0;
      }
    }
    if (!by_vertices) {
      for (int k = 0; k < set_.a().rows(); ++k) {
        auto& row = ub.add(set_.b()[k]);
        row.segment(py, d) = set_.a().row(k);
      }
      // y already lies in [0, 1]^d through the confidence rows.
      for (int j = 0; j < d; ++j) {
        if (set_.hi()[j] < 1.0) ub.add(set_.hi()[j])[py + j] = 1.0;
        if (set_.lo()[j] > 0.0) ub.add(-set_.lo()[j])[py + j] = -1.0;
      }
    }
    for (int k = 0; k < e; ++k) ub.add(upper_[k])[ps + k] = 1.0;
    for (const Cut& cut : cuts_) {
      auto& row = ub.add(cut.offset + shift_[cut.term]);
      row[ps + cut.term] = 1.0;
      row.segment(px, d) = -cut.gradient.transpose();
    }
    ub.emit(lp.a_ub, lp.b_ub);

    RowSet eq(n);
    eq.add(1.0).head(m).setOnes();
    if (by_vertices) {
      for (int j = 0; j < d; ++j) {
        auto& row = eq.add(0.0);
        row[py + j] = 1.0;
        row.segment(pmu, nv) = -set_.points().row(j);
      }
      eq.add(1.0).segment(pmu, nv).setOnes();
    }
    eq.emit(lp.a_eq, lp.b_eq);

    const LpResult res = solve_linear_program(lp);
    ++clock_;
    if (res.status == LpStatus::kInfeasible) {
      best.feasible = false;
      best.policy = PolicyDistribution::uniform(m);
      return best;
    }
    if (res.status != LpStatus::kOptimal) throw ContractError("optimistic step LP unbounded");

    const Eigen::Index first_cut = lp.a_ub.rows() - static_cast<Eigen::Index>(cuts_.size());
    for (std::size_t k = 0; k < cuts_.size(); ++k) {
      const Eigen::Index row = first_cut + static_cast<Eigen::Index>(k);
      if (lp.b_ub[row] - lp.a_ub.row(row).dot(res.x) <= 1e-9) cuts_[k].last_tight = clock_;
    }
    const Vec x = res.x.segment(px, d).cwiseMax(0.0).cwiseMin(1.0);
    const double actual = objective_ ? objective_->value(x) : 0.0;
    if (actual > best_value || round == 0) {
      best_value = actual;
      best.feasible = true;
      best.policy = clean_policy(res.x.head(m), false);
      best.value = actual;
      best.optimistic_point = x;
      best.feasible_point = res.x.segment(py, d);
    }
    if (e == 0) break;
    const double bound = res.value - shift_.sum();
    if (bound - best_value <= kGapTol * std::max(1.0, std::abs(bound))) break;
    add_cut_at(x);
  }
  return best;
}

UcbStepResult solve_ucb_step(const Hypercube& hc, const std::optional<Objective>& f,
                             const ConvexSet& set) {
  UcbStepSolver solver(f, set);
  return solver.solve(hc);
}

double psi_saddle(const Hypercube& hc, const Objective& f, const Vec& p) {
  const double radius = f.lipschitz();
  if (!std::isfinite(radius)) throw UnsupportedError("psi_saddle needs a finite Lipschitz constant");
  const Norm dual = dual_of(f.norm());
  auto value = [&](const Vec& theta) { return f.fenchel(theta) - theta.dot(vertex(hc, theta) * p); };
  Vec best = Vec::Zero(f.dim());
  double best_val = value(best);
  double scale = radius / std::sqrt(static_cast<double>(f.dim()) + 1.0);
  for (int stage = 0; stage < 40; ++stage) {
    Vec theta = best;
    for (int k = 0; k < 400; ++k) {
      const Vec g = f.fenchel_argmax(theta) - vertex(hc, theta) * p;
      if (g.squaredNorm() == 0.0) break;
      theta = project_to_ball(theta - (scale / std::sqrt(k + 1.0)) * g, dual, radius);
      const double v = value(theta);
      if (v < best_val) {
        best_val = v;
        best = theta;
      }
    }
    scale *= 0.5;
  }
  return best_val;
}

double g_saddle(const Hypercube& hc, const ConvexSet& set, Norm norm, const Vec& p) {
  const Norm dual = dual_of(norm);
  auto value = [&](const Vec& theta) {
    return theta.dot(vertex(hc, theta) * p) - set.support(theta);
  };
  const int d = hc.d();
  Vec best = Vec::Zero(d);
  double best_val = 0.0;
  double scale = 1.0 / std::sqrt(static_cast<double>(d) + 1.0);
  for (int stage = 0; stage < 40; ++stage) {
    Vec theta = best;
    for (int k = 0; k < 400; ++k) {
      const Vec g = vertex(hc, theta) * p - set.support_point(theta);
      if (g.squaredNorm() == 0.0) break;
      theta = project_to_ball(theta + (scale / std::sqrt(k + 1.0)) * g, dual, 1.0);
      const double v = value(theta);
      if (v > best_val) {
        best_val = v;
        best = theta;
      }
    }
    scale *= 0.5;
  }
  return best_val;
}

const char* to_string(OcoKind kind) {
  return kind == OcoKind::kOgd ? "ogd" : "entropic";
}

OcoKind oco_kind_from_string(const std::string& name) {
  if (name == "ogd") return OcoKind::kOgd;
  if (name == "entropic") return OcoKind::kEntropic;
  throw ConfigError("unknown oco kind '" + name + "'");
}

OcoState OcoState::make(OcoKind kind, int d, Norm dual, double radius, int horizon,
                        bool nonnegative) {
  if (d < 1 || !(radius > 0.0) || horizon < 1) throw ContractError("bad OCO parameters");
  if (kind == OcoKind::kEntropic && dual != Norm::kL1) {
    throw UnsupportedError("entropic updates need the L1 dual ball");
  }
  OcoState s;
  s.kind = kind;
  s.dual = dual;
  s.radius = radius;
  s.horizon = horizon;
  s.nonnegative = nonnegative;
  s.theta = Vec::Zero(d);
  s.cumulative_grad = Vec::Zero(d);
  if (nonnegative) s.theta.setConstant(radius / d);
  return s;
}

double OcoState::ogd_eta() const {
  if (fixed_eta > 0.0) return fixed_eta;
  const double g_bound = std::sqrt(static_cast<double>(theta.size()));
  return (radius / g_bound) / std::sqrt(static_cast<double>(std::max(t, 1)));
}

double OcoState::entropic_eta() const {
  if (fixed_eta > 0.0) return fixed_eta;
  const double experts = nonnegative ? theta.size() : 2.0 * theta.size();
  return std::sqrt(2.0 * std::log(std::max(experts, 2.0)) / horizon) / radius;
}

OcoState ogd_step(OcoState state, const Vec& grad) {
  if (grad.size() != state.theta.size() || !grad.allFinite()) {
    throw ContractError("ogd_step: bad gradient");
  }
  ++state.t;
  state.theta = project_to_ball(state.theta - state.ogd_eta() * grad, state.dual, state.radius);
  return state;
}

OcoState entropic_step(OcoState state, const Vec& grad) {
  if (state.dual != Norm::kL1) throw UnsupportedError("entropic_step needs the L1 dual ball");
  if (grad.size() != state.theta.size() || !grad.allFinite()) {
    throw ContractError("entropic_step: bad gradient");
  }
  ++state.t;
  state.cumulative_grad += grad;
  const double eta = state.entropic_eta();
  const int d = static_cast<int>(grad.size());
  // Expert +radius e_j has cumulative loss radius * G_j, expert -radius e_j has -radius * G_j.
  const Vec plus = -eta * state.radius * state.cumulative_grad;
  double top = plus.maxCoeff();
  if (!state.nonnegative) top = std::max(top, (-plus).maxCoeff());
  Vec w_plus = (plus.array() - top).exp();
  Vec w_minus = state.nonnegative ? Vec(Vec::Zero(d)) : Vec((-plus.array() - top).exp());
  const double total = w_plus.sum() + w_minus.sum();
  state.theta = state.radius * (w_plus - w_minus) / total;
  return state;
}

OcoState oco_step(OcoState state, const Vec& grad) {
  return state.kind == OcoKind::kOgd ? ogd_step(std::move(state), grad)
                                     : entropic_step(std::move(state), grad);
}

}  // namespace bwcr
