#ifndef BWCR_VERIFY_ORACLES_H_
#define BWCR_VERIFY_ORACLES_H_

// Brute-force reference computations. They share no code paths with the
// library routines they check beyond the data types.

#include <optional>
#include <vector>

#include "bwcr/confidence.h"
#include "bwcr/core.h"
#include "bwcr/geometry.h"
#include "bwcr/objective.h"
#include "bwcr/rng.h"
#include "bwcr/solvers.h"

namespace bwcr::oracle {

// Per arm, the minimum of theta . A_i over all 2^(d m) corner matrices of the
// hypercube. Requires d * m <= 20.
Vec corner_minimum(const Hypercube& hc, const Vec& theta);

// Optimal value of the knapsack LP by enumerating basic solutions: every
// choice of m tight constraints among p >= 0, the resource rows and the
// simplex row is solved and the best feasible point kept.
std::optional<double> lp_by_vertices(const LpProblem& lp, double feas_tol = 1e-10);

// max of a concave scalar function over [lo, hi] by golden-section search.
double concave_interval_max(const SeparableTerm& term, double lo, double hi);

struct GridStep {
  bool feasible = false;
  double value = 0.0;
  Vec p;
};

// Optimistic step over the simplex grid {k / steps}: for fixed p the reachable
// points form the box [lcb p, ucb p], so the optimistic value of a separable
// objective is the sum of per-coordinate interval maxima and feasibility is
// box-meets-S. S must be a box or a single halfspace.
GridStep ucb_step_grid(const Hypercube& hc, const std::vector<SeparableTerm>& terms,
                       const ConvexSet& set, int steps);

// Euclidean distance to a box, coordinatewise.
double box_distance(const Vec& z, const Vec& lo, const Vec& hi);
// Euclidean distance to {y : a.y <= b} and the projection onto it.
double halfspace_distance(const Vec& z, const Vec& a, double b);
Vec halfspace_projection(const Vec& z, const Vec& a, double b);

// min of c.w over {w : (w - center)' gram (w - center) <= radius2}, estimated
// from `samples` surface points whose directions are drawn by rejection from
// the cube [-1, 1]^n.
double ellipsoid_min_sampled(const Vec& center, const Mat& gram, double radius2, const Vec& c,
                             int samples, Rng& rng);

}  // namespace bwcr::oracle

#endif  // BWCR_VERIFY_ORACLES_H_
