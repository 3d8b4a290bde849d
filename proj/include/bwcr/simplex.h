#ifndef BWCR_SIMPLEX_H_
#define BWCR_SIMPLEX_H_

#include "bwcr/core.h"

namespace bwcr {

// maximize c.x  subject to  a_ub x <= b_ub,  a_eq x = b_eq,  x >= 0.
// Empty matrices (zero rows) mean "no constraints of that type".
struct LinearProgram {
  Vec c;
  Mat a_ub;
  Vec b_ub;
  Mat a_eq;
  Vec b_eq;

  int num_vars() const { return static_cast<int>(c.size()); }
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vec x;
  double value = 0.0;
  // Optimal dual multipliers: dual_ub >= 0, dual_eq free, and
  // a_ub' dual_ub + a_eq' dual_eq >= c with b_ub.dual_ub + b_eq.dual_eq == value.
  Vec dual_ub;
  Vec dual_eq;
  int pivots = 0;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double feasibility_tol = 1e-9;
  int max_pivots = 200000;
};

// Dense two-phase tableau simplex: Bland's entering rule, Harris ratio test,
// periodic refactorization from the original data.
LpResult solve_linear_program(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace bwcr

#endif  // BWCR_SIMPLEX_H_
