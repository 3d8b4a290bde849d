#include "bwcr/simplex.h"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <vector>

namespace bwcr {
namespace {

constexpr double kHarrisTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Pivots between rebuilds of the tableau from the original data.
constexpr int kRefactorEvery = 32;

// Tableau layout: rows 0..R-1 are constraints, row R is the objective row
// holding reduced costs (maximization: a negative entry may enter). Column N
// is the right-hand side.
class Tableau {
 public:
  Tableau(int rows, int cols) : t_(rows + 1, cols + 1), basis_(rows, -1) { t_.setZero(); }

  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double& at(int r, int c) { return t_(r, c); }
  double at(int r, int c) const { return t_(r, c); }
  double& rhs(int r) { return t_(r, cols()); }
  double& obj(int c) { return t_(rows(), c); }
  double obj_value() const { return t_(rows(), cols()); }
  std::vector<int>& basis() { return basis_; }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double factor = t_(i, c);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(r);
    }
    basis_[r] = c;
  }

  // Records the constraint rows as the reference for refactor().
  void snapshot() { orig_ = t_.topRows(rows()); }

  // Installs an objective row (rhs entry zero) and prices out the basis.
  void set_cost(const Eigen::RowVectorXd& cost) {
    cost_ = cost;
    t_.row(rows()) = cost;
    price_out();
  }

  // Recomputes B^-1 [A | b] and the reduced costs for the current basis from
  // the original data, discarding the rounding accumulated by pivots.
  void refactor() {
    const int n = rows();
    if (n == 0) return;
    Mat basis_cols(n, n);
    for (int r = 0; r < n; ++r) basis_cols.col(r) = orig_.col(basis_[r]);
    const Eigen::PartialPivLU<Mat> lu(basis_cols);
    const Mat fresh = lu.solve(orig_);
    if (!fresh.allFinite()) return;
    t_.topRows(n) = fresh;
    for (int r = 0; r < n; ++r) {
      t_.col(basis_[r]).head(n).setZero();
      t_(r, basis_[r]) = 1.0;
    }
    t_.row(n) = cost_;
    price_out();
    since_refactor_ = 0;
  }

  // Cheaper variant of refactor(): recomputes only the right-hand side and the
  // objective row. Used where the tableau body is about to be read only for
  // the basis, values and duals.
  void refresh() {
    const int n = rows();
    if (n == 0) return;
    Mat basis_cols(n, n);
    Vec basic_cost(n);
    for (int r = 0; r < n; ++r) {
      basis_cols.col(r) = orig_.col(basis_[r]);
      basic_cost[r] = cost_[basis_[r]];
    }
    const Eigen::PartialPivLU<Mat> lu(basis_cols);
    const Vec values = lu.solve(orig_.col(cols()));
    // The objective row is cost - y A with y B = cost_B.
    const Vec y = lu.transpose().solve(basic_cost);
    const Eigen::RowVectorXd reduced = cost_ - y.transpose() * orig_;
    if (!values.allFinite() || !reduced.allFinite()) return;
    t_.col(cols()).head(n) = values;
    t_.row(n) = reduced;
    for (int r = 0; r < n; ++r) t_(n, basis_[r]) = 0.0;
  }

  // Rewrites the objective row so that basic columns have zero reduced cost.
  void price_out() {
    for (int r = 0; r < rows(); ++r) {
      const double factor = obj(basis_[r]);
      if (factor != 0.0) t_.row(rows()) -= factor * t_.row(r);
    }
  }

  // Runs Bland-rule pivots over columns [0, allowed). Rows whose basic column is
  // at least `pinned` hold zero-level artificials: they block any entering
  // column with a nonzero entry so the artificial never moves off zero.
  // Returns false when unbounded.
  bool optimize(int allowed, int pinned, const SimplexOptions& opt, int& pivots) {
    while (true) {
      int enter = -1;
      for (int c = 0; c < allowed; ++c) {
        if (obj(c) < -opt.pivot_tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return true;
      // Ratio test (Harris two-pass). Rows whose ratio is within kHarrisTol of
      // the minimum compete on pivot size, so a tiny pivot on a degenerate row
      // never wins over a sound one. A row holding a pinned artificial must
      // take the pivot if the entering column touches it.
      int leave = -1;
      for (int r = 0; r < rows(); ++r) {
        if (basis_[r] < pinned || std::abs(at(r, enter)) <= opt.pivot_tol) continue;
        if (leave < 0 || std::abs(at(r, enter)) > std::abs(at(leave, enter))) leave = r;
      }
      if (leave < 0) {
        double bound = kInf;
        for (int r = 0; r < rows(); ++r) {
          const double a = at(r, enter);
          if (a > opt.pivot_tol) bound = std::min(bound, (std::max(0.0, rhs(r)) + kHarrisTol) / a);
        }
        for (int r = 0; r < rows(); ++r) {
          const double a = at(r, enter);
          if (a <= opt.pivot_tol || std::max(0.0, rhs(r)) / a > bound) continue;
          if (leave < 0 || a > at(leave, enter) * (1.0 + 1e-9) ||
              (a >= at(leave, enter) * (1.0 - 1e-9) && basis_[r] < basis_[leave])) {
            leave = r;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (++pivots > opt.max_pivots) throw ContractError("simplex: pivot limit exceeded");
      if (++since_refactor_ >= kRefactorEvery) refactor();
    }
  }

 private:
  // Row-major: pivots are row operations.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> t_;
  Mat orig_;
  Eigen::RowVectorXd cost_;
  std::vector<int> basis_;
  int since_refactor_ = 0;
};

}  // namespace

void LinearProgram::validate() const {
  const int n = num_vars();
  if (n == 0) throw ContractError("linear program has no variables");
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n)) {
    throw ContractError("inequality block has inconsistent shape");
  }
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n)) {
    throw ContractError("equality block has inconsistent shape");
  }
  if (!c.allFinite() || !a_ub.allFinite() || !b_ub.allFinite() || !a_eq.allFinite() ||
      !b_eq.allFinite()) {
    throw ContractError("linear program has non-finite data");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

LpResult solve_linear_program(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  const int n = lp.num_vars();
  const int k_ub = static_cast<int>(lp.a_ub.rows());
  const int k_eq = static_cast<int>(lp.a_eq.rows());
  const int rows = k_ub + k_eq;
  // Columns: [x (n) | slacks (k_ub) | artificials]. A row whose slack enters
  // with coefficient +1 starts with the slack basic; only the other rows get an
  // artificial column.
  const int slack0 = n;
  const int art0 = n + k_ub;
  std::vector<double> sign(rows, 1.0);
  std::vector<int> art_col(rows, -1);
  int cols = art0;
  for (int r = 0; r < rows; ++r) {
    const bool is_ub = r < k_ub;
    sign[r] = (is_ub ? lp.b_ub[r] : lp.b_eq[r - k_ub]) < 0.0 ? -1.0 : 1.0;
    if (!is_ub || sign[r] < 0.0) art_col[r] = cols++;
  }

  Tableau tab(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const bool is_ub = r < k_ub;
    const double b = is_ub ? lp.b_ub[r] : lp.b_eq[r - k_ub];
    for (int c = 0; c < n; ++c) {
      tab.at(r, c) = sign[r] * (is_ub ? lp.a_ub(r, c) : lp.a_eq(r - k_ub, c));
    }
    if (is_ub) tab.at(r, slack0 + r) = sign[r];
    if (art_col[r] >= 0) tab.at(r, art_col[r]) = 1.0;
    tab.rhs(r) = sign[r] * b;
    tab.basis()[r] = art_col[r] >= 0 ? art_col[r] : slack0 + r;
  }

  LpResult result;
  result.dual_ub = Vec::Zero(k_ub);
  result.dual_eq = Vec::Zero(k_eq);

  tab.snapshot();

  // Phase 1: maximize -(sum of artificials).
  Eigen::RowVectorXd cost = Eigen::RowVectorXd::Zero(cols + 1);
  cost.segment(art0, cols - art0).setOnes();
  tab.set_cost(cost);
  tab.optimize(cols, cols, options, result.pivots);
  tab.refresh();
  if (std::abs(tab.obj_value()) > options.feasibility_tol) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  bool driven = false;
  // Drive zero-level artificials out of the basis where a real column can replace them.
  // Rows with no usable entry are redundant and keep their artificial at zero.
  for (int r = 0; r < rows; ++r) {
    if (tab.basis()[r] < art0) continue;
    int best = -1;
    for (int c = 0; c < art0; ++c) {
      if (std::abs(tab.at(r, c)) > 1e-7 &&
          (best < 0 || std::abs(tab.at(r, c)) > std::abs(tab.at(r, best)))) {
        best = c;
      }
    }
    if (best >= 0) {
      tab.pivot(r, best);
      driven = true;
    }
  }
  if (driven) tab.refactor();

  // Phase 2: artificials stay in the tableau (their reduced costs give the
  // duals of rows that never had a +1 slack) but may not re-enter.
  cost.setZero();
  cost.head(n) = -lp.c.transpose();
  tab.set_cost(cost);
  if (!tab.optimize(art0, art0, options, result.pivots)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  tab.refresh();

  result.status = LpStatus::kOptimal;
  result.x = Vec::Zero(n);
  for (int r = 0; r < rows; ++r) {
    const int b = tab.basis()[r];
    if (b < n) result.x[b] = std::max(0.0, tab.rhs(r));
  }
  result.value = lp.c.dot(result.x);
  for (int r = 0; r < k_ub; ++r) {
    // Reduced cost of the slack column equals the original-row multiplier.
    result.dual_ub[r] = std::max(0.0, tab.obj(slack0 + r));
  }
  for (int r = 0; r < k_eq; ++r) {
    result.dual_eq[r] = sign[k_ub + r] * tab.obj(art_col[k_ub + r]);
  }
  return result;
}

}  // namespace bwcr
