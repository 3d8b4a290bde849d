#ifndef BWCR_SOLVERS_H_
#define BWCR_SOLVERS_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "bwcr/confidence.h"
#include "bwcr/core.h"
#include "bwcr/geometry.h"
#include "bwcr/objective.h"

namespace bwcr {

// max r.p  s.t.  C p <= (1 - eps) * budget_ratio * 1,  p in the simplex
// (or sum p <= 1 with allow_idle).
struct LpProblem {
  Vec r;
  Mat consumption;
  double budget_ratio = 1.0;
  double eps = 0.0;
  bool allow_idle = false;

  void validate() const;
};

struct LpSolution {
  PolicyDistribution policy;
  double value = 0.0;
};

// nullopt when infeasible.
std::optional<LpSolution> solve_lp(const LpProblem& problem);

struct UcbStepResult {
  bool feasible = false;
  PolicyDistribution policy;
  // Optimistic objective value max over A in H of f(A p); 0 without objective.
  double value = 0.0;
  // Optimistic point A p attaining `value`, and a point of S reachable as A' p.
  Vec optimistic_point;
  Vec feasible_point;
};

// Optimistic step: maximize max_{A in H} f(A p) over p in the simplex subject
// to min_{A in H} d(A p, S) <= 0. Because {A p : A in H} is the box
// [lcb p, ucb p], this is the convex program
//   max f(x)  s.t.  lcb p <= x <= ucb p,  lcb p <= y <= ucb p,  y in S,
// solved exactly: an LP for linear f, Kelley cutting planes otherwise.
// A missing objective turns the step into a pure feasibility problem.
class UcbStepSolver {
 public:
  UcbStepSolver(std::optional<Objective> objective, ConvexSet set);

  UcbStepResult solve(const Hypercube& hc);

  const std::optional<Objective>& objective() const { return objective_; }
  const ConvexSet& set() const { return set_; }
  std::size_t cut_count() const { return cuts_.size(); }

  static constexpr double kGapTol = 1e-7;
  static constexpr int kMaxRounds = 500;
  static constexpr std::size_t kMaxCutsPerTerm = 8;

 private:
  struct Cut {
    int term;  // epigraph variable index
    double slope_point;
    Vec gradient;
    double offset;  // cut: s_term <= offset + gradient . x
    std::uint64_t last_tight = 0;  // solve round at which the cut last bound
  };

  int epigraph_count() const;
  void add_cut_at(const Vec& x);

  std::optional<Objective> objective_;
  ConvexSet set_;
  std::vector<Cut> cuts_;
  std::uint64_t clock_ = 0;
  Vec shift_;
  Vec upper_;
};

UcbStepResult solve_ucb_step(const Hypercube& hc, const std::optional<Objective>& f,
                             const ConvexSet& set);

// Saddle-point evaluations of the optimistic step, used to cross-check the
// exact solver:
//   psi(p) = min over ||theta||_* <= L of f*(theta) - theta . (vertex(theta) p)
//   g(p)   = max over ||theta||_* <= 1 of theta . (vertex(theta) p) - h_S(theta)
double psi_saddle(const Hypercube& hc, const Objective& f, const Vec& p);
double g_saddle(const Hypercube& hc, const ConvexSet& set, Norm norm, const Vec& p);

enum class OcoKind { kOgd, kEntropic };

const char* to_string(OcoKind kind);
OcoKind oco_kind_from_string(const std::string& name);

// Online learner over the dual ball {theta : ||theta||_dual <= radius}.
// With `nonnegative` the entropic learner is restricted to the scaled simplex
// {theta >= 0, sum theta = radius}.
struct OcoState {
  OcoKind kind = OcoKind::kOgd;
  Norm dual = Norm::kL2;
  double radius = 1.0;
  int horizon = 1;
  bool nonnegative = false;
  // Overrides the default step size when positive.
  double fixed_eta = 0.0;

  int t = 0;
  Vec theta;
  // Entropic: cumulative gradient, the learner's sufficient statistic.
  Vec cumulative_grad;

  static OcoState make(OcoKind kind, int d, Norm dual, double radius, int horizon,
                       bool nonnegative = false);

  double ogd_eta() const;
  double entropic_eta() const;
};

// theta' = Proj(theta - eta_t grad) with eta_t = (radius / sqrt(d)) / sqrt(t).
OcoState ogd_step(OcoState state, const Vec& grad);
// Follow-the-regularized-leader with entropy over the signed unit directions
// (exponentiated gradient). Requires the L1 dual ball.
OcoState entropic_step(OcoState state, const Vec& grad);
OcoState oco_step(OcoState state, const Vec& grad);

}  // namespace bwcr

#endif  // BWCR_SOLVERS_H_
