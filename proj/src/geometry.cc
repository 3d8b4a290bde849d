#include "bwcr/geometry.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bwcr/simplex.h"

namespace bwcr {
namespace {

constexpr int kDykstraMaxCycles = 200000;
constexpr double kDykstraTol = 1e-13;
constexpr int kAwayStepMaxIters = 200000;
constexpr double kAwayStepGapTol = 1e-14;

void check_dim(const Vec& x, int d, const char* what) {
  if (x.size() != d) throw ContractError(std::string(what) + ": dimension mismatch");
  if (!x.allFinite()) throw ContractError(std::string(what) + ": non-finite input");
}

}  // namespace

const char* to_string(Norm norm) {
  switch (norm) {
    case Norm::kL2: return "l2";
    case Norm::kLinf: return "linf";
    case Norm::kL1: return "l1";
  }
  return "unknown";
}

Norm norm_from_string(const std::string& name) {
  if (name == "l2") return Norm::kL2;
  if (name == "linf") return Norm::kLinf;
  if (name == "l1") return Norm::kL1;
  throw ConfigError("unknown norm '" + name + "'");
}

Norm dual_of(Norm norm) {
  switch (norm) {
    case Norm::kL2: return Norm::kL2;
    case Norm::kLinf: return Norm::kL1;
    case Norm::kL1: return Norm::kLinf;
  }
  return Norm::kL2;
}

double norm_of(const Vec& x, Norm norm) {
  if (x.size() == 0) return 0.0;
  switch (norm) {
    case Norm::kL2: return x.norm();
    case Norm::kLinf: return x.lpNorm<Eigen::Infinity>();
    case Norm::kL1: return x.lpNorm<1>();
  }
  return 0.0;
}

double NormPair::ones_norm(int d) const {
  switch (primal) {
    case Norm::kL2: return std::sqrt(static_cast<double>(d));
    case Norm::kLinf: return 1.0;
    case Norm::kL1: return static_cast<double>(d);
  }
  return 0.0;
}

Vec project_to_ball(const Vec& x, Norm norm, double radius) {
  if (!(radius >= 0.0)) throw ContractError("ball radius must be nonnegative");
  switch (norm) {
    case Norm::kL2: {
      const double r = x.norm();
      return r <= radius ? x : Vec(x * (radius / r));
    }
    case Norm::kLinf:
      return x.cwiseMax(-radius).cwiseMin(radius);
    case Norm::kL1: {
      if (x.lpNorm<1>() <= radius) return x;
      // Sort-based simplex projection of |x| followed by sign restoration.
      std::vector<double> u(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = std::abs(x[i]);
      std::sort(u.begin(), u.end(), std::greater<>());
      double cumulative = 0.0;
      double tau = 0.0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
        if (u[k] > candidate) tau = candidate;
      }
      Vec y(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::max(std::abs(x[i]) - tau, 0.0);
        y[i] = x[i] < 0.0 ? -mag : mag;
      }
      return y;
    }
  }
  return x;
}

ConvexSet ConvexSet::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw ContractError("box: bad bounds");
  if (!lo.allFinite() || !hi.allFinite()) throw ContractError("box: non-finite bounds");
  lo = lo.cwiseMax(0.0).cwiseMin(1.0);
  hi = hi.cwiseMax(0.0).cwiseMin(1.0);
  if ((hi - lo).minCoeff() < 0.0) throw ContractError("box: empty after clipping to [0,1]");
  return ConvexSet(Kind::kBox, std::move(lo), std::move(hi));
}

ConvexSet ConvexSet::unit_box(int d) { return box(Vec::Zero(d), Vec::Ones(d)); }

ConvexSet ConvexSet::halfspaces(Mat a, Vec b) {
  const int d = static_cast<int>(a.cols());
  return halfspaces(std::move(a), std::move(b), Vec::Zero(d), Vec::Ones(d));
}

ConvexSet ConvexSet::halfspaces(Mat a, Vec b, Vec lo, Vec hi) {
  ConvexSet base = box(std::move(lo), std::move(hi));
  if (a.cols() != base.dim() || a.rows() != b.size() || a.rows() == 0) {
    throw ContractError("halfspaces: inconsistent shapes");
  }
  if (!a.allFinite() || !b.allFinite()) throw ContractError("halfspaces: non-finite data");
  ConvexSet set(Kind::kHalfspaces, base.lo_, base.hi_);
  set.a_ = std::move(a);
  set.b_ = std::move(b);
  // Nonemptiness: phase-one feasibility of {a y <= b, lo <= y <= hi}.
  LinearProgram lp;
  const int d = set.dim();
  lp.c = Vec::Zero(d);
  lp.a_ub.resize(set.a_.rows() + 2 * d, d);
  lp.a_ub << set.a_, Mat::Identity(d, d), -Mat::Identity(d, d);
  lp.b_ub.resize(lp.a_ub.rows());
  lp.b_ub << set.b_, set.hi_, -set.lo_;
  if (solve_linear_program(lp).status != LpStatus::kOptimal) {
    throw ContractError("halfspaces: set is empty");
  }
  return set;
}

ConvexSet ConvexSet::vertices(Mat points, bool downward_closed) {
  if (points.rows() == 0 || points.cols() == 0) throw ContractError("vertices: empty list");
  if (!points.allFinite()) throw ContractError("vertices: non-finite data");
  points = points.cwiseMax(0.0).cwiseMin(1.0);
  ConvexSet set(Kind::kVertices, points.rowwise().minCoeff(), points.rowwise().maxCoeff());
  set.points_ = std::move(points);
  set.declared_downward_closed_ = downward_closed;
  return set;
}

bool ConvexSet::is_downward_closed() const {
  switch (kind_) {
    case Kind::kBox: return lo_.isZero(0.0);
    case Kind::kHalfspaces: return lo_.isZero(0.0) && a_.minCoeff() >= 0.0;
    case Kind::kVertices: return declared_downward_closed_;
  }
  return false;
}

bool ConvexSet::contains(const Vec& x, double tol) const {
  check_dim(x, dim(), "contains");
  switch (kind_) {
    case Kind::kBox:
      return (x - lo_).minCoeff() >= -tol && (hi_ - x).minCoeff() >= -tol;
    case Kind::kHalfspaces:
      return (x - lo_).minCoeff() >= -tol && (hi_ - x).minCoeff() >= -tol &&
             (b_ - a_ * x).minCoeff() >= -tol;
    case Kind::kVertices:
      return (x - project_vertices_l2(x)).norm() <= tol;
  }
  return false;
}

Vec ConvexSet::support_point(const Vec& theta) const {
  check_dim(theta, dim(), "support");
  switch (kind_) {
    case Kind::kBox: {
      Vec s(dim());
      for (int i = 0; i < dim(); ++i) s[i] = theta[i] > 0.0 ? hi_[i] : lo_[i];
      return s;
    }
    case Kind::kHalfspaces: {
      const int d = dim();
      LinearProgram lp;
      lp.c = theta;
      lp.a_ub.resize(a_.rows() + 2 * d, d);
      lp.a_ub << a_, Mat::Identity(d, d), -Mat::Identity(d, d);
      lp.b_ub.resize(lp.a_ub.rows());
      lp.b_ub << b_, hi_, -lo_;
      const LpResult res = solve_linear_program(lp);
      if (res.status != LpStatus::kOptimal) throw ContractError("support: LP failed");
      return res.x.cwiseMax(lo_).cwiseMin(hi_);
    }
    case Kind::kVertices: {
      Eigen::Index best = 0;
      (points_.transpose() * theta).maxCoeff(&best);
      return points_.col(best);
    }
  }
  return Vec();
}

double ConvexSet::support(const Vec& theta) const {
  if (kind_ == Kind::kBox) {
    check_dim(theta, dim(), "support");
    double total = 0.0;
    for (int i = 0; i < dim(); ++i) total += std::max(theta[i] * lo_[i], theta[i] * hi_[i]);
    return total;
  }
  return theta.dot(support_point(theta));
}

Vec project_halfspace_box(const Vec& x, const Vec& a, double b, const Vec& lo, const Vec& hi) {
  auto clip = [&](double lambda) { return Vec((x - lambda * a).cwiseMax(lo).cwiseMin(hi)); };
  Vec y = clip(0.0);
  if (a.dot(y) <= b) return y;
  // a . clip(lambda) is continuous, piecewise linear and nonincreasing in lambda.
  std::vector<double> breaks;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (double bound : {lo[i], hi[i]}) {
      const double lambda = (x[i] - bound) / a[i];
      if (lambda > 0.0) breaks.push_back(lambda);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  double left = 0.0;
  double left_val = a.dot(y);
  for (double right : breaks) {
    const double right_val = a.dot(clip(right));
    if (right_val <= b) {
      const double span = left_val - right_val;
      const double lambda = span > 0.0 ? left + (left_val - b) / span * (right - left) : right;
      return clip(lambda);
    }
    left = right;
    left_val = right_val;
  }
  // Past the last breakpoint every coordinate is pinned; the set is empty.
  throw ContractError("project_halfspace_box: empty set");
}

Vec ConvexSet::project_l2(const Vec& x) const {
  switch (kind_) {
    case Kind::kBox:
      return x.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::kHalfspaces: {
      if (a_.rows() == 1) return project_halfspace_box(x, a_.row(0).transpose(), b_[0], lo_, hi_);
      // Dykstra's alternating projections over the sets {a_k y <= b_k} n box.
      const int k_count = static_cast<int>(a_.rows());
      Vec y = x;
      std::vector<Vec> increments(k_count, Vec::Zero(dim()));
      for (int cycle = 0; cycle < kDykstraMaxCycles; ++cycle) {
        const Vec before = y;
        for (int k = 0; k < k_count; ++k) {
          const Vec shifted = y + increments[k];
          y = project_halfspace_box(shifted, a_.row(k).transpose(), b_[k], lo_, hi_);
          increments[k] = shifted - y;
        }
        if ((y - before).lpNorm<Eigen::Infinity>() <= kDykstraTol) break;
      }
      return y;
    }
    case Kind::kVertices:
      return project_vertices_l2(x);
  }
  return x;
}

Vec ConvexSet::project_vertices_l2(const Vec& x) const {
  const int n = static_cast<int>(points_.cols());
  // Away-step Frank-Wolfe on lambda in the simplex; y = points * lambda.
  Vec lambda = Vec::Zero(n);
  Eigen::Index start = 0;
  (points_.colwise() - x).colwise().squaredNorm().minCoeff(&start);
  lambda[start] = 1.0;
  Vec y = points_.col(start);
  for (int iter = 0; iter < kAwayStepMaxIters; ++iter) {
    const Vec residual = y - x;
    const Vec g = points_.transpose() * residual;
    Eigen::Index fw = 0;
    g.minCoeff(&fw);
    int away = -1;
    for (int i = 0; i < n; ++i) {
      if (lambda[i] > 0.0 && (away < 0 || g[i] > g[away])) away = i;
    }
    const double lg = lambda.dot(g);
    const double fw_gap = lg - g[fw];
    if (fw_gap <= kAwayStepGapTol) break;
    const double away_gap = g[away] - lg;
    Vec dir;
    double max_step;
    bool forward = fw_gap >= away_gap;
    if (forward) {
      dir = points_.col(fw) - y;
      max_step = 1.0;
    } else {
      dir = y - points_.col(away);
      max_step = lambda[away] / (1.0 - lambda[away]);
    }
    const double dd = dir.squaredNorm();
    if (dd <= 0.0) break;
    const double step = std::clamp(-residual.dot(dir) / dd, 0.0, max_step);
    if (step <= 0.0) break;
    if (forward) {
      lambda *= (1.0 - step);
      lambda[fw] += step;
    } else {
      lambda *= (1.0 + step);
      lambda[away] -= step;
      if (step == max_step) lambda[away] = 0.0;
    }
    lambda = lambda.cwiseMax(0.0);
    lambda /= lambda.sum();
    y = points_ * lambda;
  }
  return y;
}

Vec ConvexSet::project_polyhedral(const Vec& x, Norm norm) const {
  // minimize ||y - x|| (L1 or Linf) with y in S, as an LP over (y or lambda, t).
  const int d = dim();
  const bool by_vertices = kind_ == Kind::kVertices;
  const int ny = by_vertices ? static_cast<int>(points_.cols()) : d;
  const int nt = norm == Norm::kL1 ? d : 1;
  Mat map = by_vertices ? points_ : Mat(Mat::Identity(d, d));
  LinearProgram lp;
  lp.c = Vec::Zero(ny + nt);
  lp.c.tail(nt).setConstant(-1.0);
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < d; ++i) {
    Eigen::RowVectorXd up = Eigen::RowVectorXd::Zero(ny + nt);
    up.head(ny) = map.row(i);
    up[ny + (nt == 1 ? 0 : i)] = -1.0;
    rows.push_back(up);
    rhs.push_back(x[i]);
    Eigen::RowVectorXd down = Eigen::RowVectorXd::Zero(ny + nt);
    down.head(ny) = -map.row(i);
    down[ny + (nt == 1 ? 0 : i)] = -1.0;
    rows.push_back(down);
    rhs.push_back(-x[i]);
  }
  if (!by_vertices) {
    for (int k = 0; k < a_.rows(); ++k) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ny + nt);
      r.head(d) = a_.row(k);
      rows.push_back(r);
      rhs.push_back(b_[k]);
    }
    for (int i = 0; i < d; ++i) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ny + nt);
      r[i] = 1.0;
      rows.push_back(r);
      rhs.push_back(hi_[i]);
      r[i] = -1.0;
      rows.push_back(r);
      rhs.push_back(-lo_[i]);
    }
  } else {
    lp.a_eq = Mat::Zero(1, ny + nt);
    lp.a_eq.leftCols(ny).setOnes();
    lp.b_eq = Vec::Ones(1);
  }
  lp.a_ub.resize(static_cast<Eigen::Index>(rows.size()), ny + nt);
  lp.b_ub.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lp.a_ub.row(static_cast<Eigen::Index>(r)) = rows[r];
    lp.b_ub[static_cast<Eigen::Index>(r)] = rhs[r];
  }
  const LpResult res = solve_linear_program(lp);
  if (res.status != LpStatus::kOptimal) throw ContractError("projection LP failed");
  return map * res.x.head(ny);
}

Vec ConvexSet::project(const Vec& x, Norm norm) const {
  check_dim(x, dim(), "project");
  // Clamping is a nearest point of a box in every l_p norm.
  if (norm == Norm::kL2 || kind_ == Kind::kBox) return project_l2(x);
  return project_polyhedral(x, norm);
}

double ConvexSet::distance(const Vec& x, Norm norm) const {
  return norm_of(x - project(x, norm), norm);
}

ConvexSet ConvexSet::shrink(double eps) const {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ContractError("shrink: eps must lie in [0,1]");
  if (!is_downward_closed()) {
    throw UnsupportedError("shrink requires a downward-closed set");
  }
  const double scale = 1.0 - eps;
  switch (kind_) {
    case Kind::kBox:
      return box(lo_, hi_ * scale);
    case Kind::kHalfspaces:
      return halfspaces(a_, b_ * scale, lo_, hi_ * scale);
    case Kind::kVertices:
      return vertices(points_ * scale, true);
  }
  return *this;
}

SmoothedDistance smoothed_distance(const Vec& z, const ConvexSet& set, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("smoothed_distance: sigma must be positive");
  const Vec pi = set.project(z, Norm::kL2);
  const Vec diff = z - pi;
  const double r = diff.norm();
  SmoothedDistance out;
  if (r == 0.0) {
    out.gradient = Vec::Zero(z.size());
  } else if (r >= sigma) {
    out.value = r - 0.5 * sigma;
    out.gradient = diff / r;
  } else {
    out.value = r * r / (2.0 * sigma);
    out.gradient = diff / sigma;
  }
  return out;
}

}  // namespace bwcr
