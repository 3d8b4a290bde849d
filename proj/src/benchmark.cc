#include "bwcr/benchmark.h"

#include <cmath>
#include <limits>

#include "bwcr/confidence.h"
#include "bwcr/solvers.h"

namespace bwcr {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Visits every point of the simplex grid {p : p_i = k_i * step, sum p = 1}
// restricted to a box around `center` of half-width `radius` (radius >= 1
// covers the whole simplex).
template <typename Visit>
void walk_grid(int m, double step, const Vec& center, double radius, Visit visit) {
  const long long n = std::llround(1.0 / step);
  std::vector<long long> lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = std::max(0LL, static_cast<long long>(std::floor((center[i] - radius) / step)));
    hi[i] = std::min(n, static_cast<long long>(std::ceil((center[i] + radius) / step)));
  }
  std::vector<long long> k(m, 0);
  Vec p(m);
  auto rec = [&](auto&& self, int i, long long remaining) -> void {
    if (i == m - 1) {
      if (remaining < lo[i] || remaining > hi[i]) return;
      k[i] = remaining;
      for (int j = 0; j < m; ++j) p[j] = static_cast<double>(k[j]) / n;
      visit(p);
      return;
    }
    for (long long v = lo[i]; v <= std::min(hi[i], remaining); ++v) {
      k[i] = v;
      self(self, i + 1, remaining - v);
    }
  };
  rec(rec, 0, n);
}

}  // namespace

BenchmarkResult compute_opt(const Mat& mean, const std::optional<Objective>& f,
                            const std::optional<ConvexSet>& set) {
  const int d = static_cast<int>(mean.rows());
  const UcbStepResult res =
      solve_ucb_step(Hypercube::degenerate(mean), f, set.value_or(ConvexSet::unit_box(d)));
  BenchmarkResult out;
  out.feasible = res.feasible;
  out.p_star = res.policy;
  if (!res.feasible) {
    out.opt_value = kNaN;
    return out;
  }
  out.x_star = mean * res.policy.weights;
  out.opt_value = f ? f->value(out.x_star) : 0.0;
  return out;
}

BenchmarkResult compute_opt(const InstanceModel& instance, const std::optional<Objective>& f,
                            const std::optional<ConvexSet>& set) {
  return compute_opt(instance.mean(), f, set);
}

BenchmarkResult compute_opt_grid(const Mat& mean, const std::optional<Objective>& f,
                                 const std::optional<ConvexSet>& set, double step,
                                 double refine_to, double feas_tol) {
  const int m = static_cast<int>(mean.cols());
  BenchmarkResult out;
  out.opt_value = kNaN;
  double best = -std::numeric_limits<double>::infinity();
  Vec best_p;
  auto visit = [&](const Vec& p) {
    const Vec x = mean * p;
    if (set && !set->contains(x, feas_tol)) return;
    const double v = f ? f->value(x) : 0.0;
    if (v > best) {
      best = v;
      best_p = p;
    }
  };
  walk_grid(m, step, Vec::Constant(m, 0.5), 1.0, visit);
  if (best_p.size() == 0) return out;
  for (double h = step / 10.0; h >= refine_to * (1.0 - 1e-9); h /= 10.0) {
    walk_grid(m, h, Vec(best_p), 10.0 * h, visit);
  }
  out.feasible = true;
  out.p_star = PolicyDistribution{best_p, false};
  out.x_star = mean * best_p;
  out.opt_value = best;
  return out;
}

RegretTrace regret_trace(const RunHistory& history, int horizon, const BenchmarkResult& bench,
                         const std::optional<Objective>& f, const std::optional<ConvexSet>& set,
                         Norm norm, bool knapsack) {
  history.validate();
  if (history.size() == 0) throw ContractError("regret_trace: empty history");
  if (horizon < static_cast<int>(history.size())) throw ContractError("history exceeds horizon");
  RegretTrace trace;
  trace.horizon = horizon;
  const int d = static_cast<int>(history.observations.front().size());
  Vec sum = Vec::Zero(d);
  auto areg1_at = [&](const Vec& avg) {
    if (!f || !bench.feasible) return f ? kNaN : 0.0;
    return bench.opt_value - f->value(avg);
  };
  auto areg2_at = [&](const Vec& avg) { return set ? set->distance(avg, norm) : 0.0; };
  for (std::size_t t = 0; t < history.size(); ++t) {
    sum += history.observations[t];
    const Vec avg = sum / static_cast<double>(t + 1);
    trace.areg1.push_back(areg1_at(avg));
    trace.areg2.push_back(areg2_at(avg));
  }
  trace.final_average = sum / static_cast<double>(horizon);
  trace.final_areg1 = areg1_at(trace.final_average);
  trace.final_areg2 = areg2_at(trace.final_average);
  if (knapsack) {
    trace.total_reward = sum[0];
    trace.reg_bwk = horizon * bench.opt_value - trace.total_reward;
  }
  return trace;
}

RegretDecomposition decompose_regret(const Objective& f, const BenchmarkResult& bench,
                                     const Vec& xbar_t, const Vec& average_v) {
  RegretDecomposition out;
  out.areg1 = bench.opt_value - f.value(average_v);
  out.optimization_term = bench.opt_value - f.value(xbar_t);
  const double gap = norm_of(xbar_t - average_v, f.norm());
  out.estimation_term = gap == 0.0 ? 0.0 : f.lipschitz() * gap;
  return out;
}

}  // namespace bwcr
