#ifndef BWCR_BENCHMARK_H_
#define BWCR_BENCHMARK_H_

#include <optional>
#include <vector>

#include "bwcr/core.h"
#include "bwcr/geometry.h"
#include "bwcr/objective.h"

namespace bwcr {

struct BenchmarkResult {
  bool feasible = false;
  PolicyDistribution p_star;
  // f(V p*); NaN when infeasible, 0 for constraint-only problems.
  double opt_value = 0.0;
  Vec x_star;
};

// Best fixed mixed strategy: max f(V p) subject to V p in S. Solved exactly by
// the optimistic-step solver on the degenerate hypercube lcb = ucb = V.
BenchmarkResult compute_opt(const Mat& mean, const std::optional<Objective>& f,
                            const std::optional<ConvexSet>& set);
BenchmarkResult compute_opt(const InstanceModel& instance, const std::optional<Objective>& f,
                            const std::optional<ConvexSet>& set);

// Grid search over the simplex (step `step`), refined around the best point
// down to `refine_to`. Feasibility is checked with tolerance `feas_tol`.
// Independent of the exact route; intended for m <= 4.
BenchmarkResult compute_opt_grid(const Mat& mean, const std::optional<Objective>& f,
                                 const std::optional<ConvexSet>& set, double step = 1e-3,
                                 double refine_to = 1e-5, double feas_tol = 1e-9);

struct RegretTrace {
  int horizon = 0;
  // Per observed step t: averages over the first t observations.
  std::vector<double> areg1;
  std::vector<double> areg2;
  // Final values with the 1/T normalization (steps after a stop count as zero).
  double final_areg1 = 0.0;
  double final_areg2 = 0.0;
  Vec final_average;
  // Knapsack runs: total reward (component 0) and T * LP - total reward.
  double total_reward = 0.0;
  double reg_bwk = 0.0;
};

RegretTrace regret_trace(const RunHistory& history, int horizon, const BenchmarkResult& bench,
                         const std::optional<Objective>& f, const std::optional<ConvexSet>& set,
                         Norm norm = Norm::kL2, bool knapsack = false);

// Split of the final objective regret into an optimization term
// f(x*) - f(xbar) and an estimation term L ||xbar - avg v||; their sum bounds
// the regret by concavity and the Lipschitz property.
struct RegretDecomposition {
  double areg1 = 0.0;
  double optimization_term = 0.0;
  double estimation_term = 0.0;

  bool holds(double tol = 1e-9) const {
    return areg1 <= optimization_term + estimation_term + tol;
  }
};

RegretDecomposition decompose_regret(const Objective& f, const BenchmarkResult& bench,
                                     const Vec& xbar_t, const Vec& average_v);

}  // namespace bwcr

#endif  // BWCR_BENCHMARK_H_
