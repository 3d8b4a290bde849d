#ifndef BWCR_VERIFY_ACCEPTANCE_H_
#define BWCR_VERIFY_ACCEPTANCE_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace bwcr::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  // Wall-clock allowance; non-positive means none.
  double budget_seconds = 0.0;
};

CriterionResult check_confidence_coverage();   // 1
CriterionResult check_vertex_optimality();     // 2
CriterionResult check_lp_solver();             // 3
CriterionResult check_optimistic_step();       // 4
CriterionResult check_frank_wolfe();           // 5
CriterionResult check_smoothing();             // 6
CriterionResult check_regret_scaling();        // 7
CriterionResult check_knapsack_safety();       // 8
CriterionResult check_ogd_regret();            // 9
CriterionResult check_error_decomposition();   // 10
CriterionResult check_contextual_coverage();   // 11
CriterionResult check_reproducibility();       // 12

inline constexpr int kCriterionCount = 12;

// Runs the selected criteria (all when `ids` is empty) in id order.
std::vector<CriterionResult> run(const std::vector<int>& ids = {});

// "PASS [ 7] regret scaling (12.3 s): detail"
std::string format(const CriterionResult& result);
void print_table(std::ostream& os, const std::vector<CriterionResult>& results);

}  // namespace bwcr::acceptance

#endif  // BWCR_VERIFY_ACCEPTANCE_H_
