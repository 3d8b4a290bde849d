#ifndef BWCR_CONFIDENCE_H_
#define BWCR_CONFIDENCE_H_

#include <memory>
#include <vector>

#include "bwcr/core.h"

namespace bwcr {

// sqrt(gamma * nu / n) + gamma / n.
double rad(double nu, double n, double gamma);

// log(m * T * d / delta).
double default_gamma(int m, int horizon, int d, double delta);

// Entrywise confidence bounds for the mean matrix.
struct Hypercube {
  Mat lcb;
  Mat ucb;

  int d() const { return static_cast<int>(lcb.rows()); }
  int m() const { return static_cast<int>(lcb.cols()); }
  bool contains(const Mat& v, double tol = 0.0) const;
  void validate() const;

  // lcb == ucb == mean.
  static Hypercube degenerate(const Mat& mean);
  // [0,1] everywhere.
  static Hypercube vacuous(int d, int m);
};

// Corner of the hypercube minimizing theta . A_i for every column i at once:
// row j comes from ucb when theta_j <= 0 and from lcb otherwise.
Mat vertex(const Hypercube& hc, const Vec& theta);

class ConfidenceState {
 public:
  ConfidenceState(int d, int m, double gamma);

  int d() const { return static_cast<int>(sums_.rows()); }
  int m() const { return static_cast<int>(sums_.cols()); }
  double gamma() const { return gamma_; }
  int t() const { return t_; }
  const Eigen::VectorXi& counts() const { return counts_; }
  const Mat& sums() const { return sums_; }
  int total_plays() const { return counts_.sum(); }

  // Records one observation of `arm`, or only advances time for an idle step.
  void record(ArmChoice arm, const Vec& v);

  // sums / (k + 1), as required by the radius lemma.
  Mat empirical_mean() const;
  Hypercube hypercube() const;

 private:
  double gamma_;
  int t_ = 0;
  Eigen::VectorXi counts_;
  Mat sums_;
};

// Per-component least-squares confidence ellipsoids for the contextual model:
//   E_j = { w : (w - w_hat_j)' B_j (w - w_hat_j) <= radius2 }.
class EllipsoidState {
 public:
  // Inverses are rebuilt from the Gram matrix after this many rank-one updates.
  static constexpr int kRefreshInterval = 10000;

  explicit EllipsoidState(std::shared_ptr<const ContextualModel> model,
                          double radius2 = -1.0);

  int n() const { return model_->n; }
  int d() const { return model_->d(); }
  int m() const { return model_->m(); }
  double radius2() const { return radius2_; }
  const Mat& gram(int j) const { return gram_[j]; }
  const Mat& gram_inverse(int j) const { return inverse_[j]; }
  Vec center(int j) const { return inverse_[j] * rhs_[j]; }

  void record(int arm, const Vec& v);

  double min_linear(int j, const Vec& c) const;
  double max_linear(int j, const Vec& c) const;
  bool contains(int j, const Vec& w, double tol = 1e-12) const;

  // Entrywise bounds on x_ji . w_j over E_j, clipped to [0,1].
  Hypercube envelope() const;

 private:
  void refresh(int j);

  std::shared_ptr<const ContextualModel> model_;
  double radius2_;
  std::vector<Mat> gram_;
  std::vector<Mat> inverse_;
  std::vector<Vec> rhs_;
  std::vector<Vec> centers_;
  int updates_since_refresh_ = 0;
};

}  // namespace bwcr

#endif  // BWCR_CONFIDENCE_H_
