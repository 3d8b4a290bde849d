#include "oracles.h"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace bwcr::oracle {

Vec corner_minimum(const Hypercube& hc, const Vec& theta) {
  const int d = hc.d();
  const int m = hc.m();
  const int bits = d * m;
  if (bits > 20) throw std::invalid_argument("corner_minimum: too many corners");
  Vec best = Vec::Constant(m, std::numeric_limits<double>::infinity());
  Mat corner(d, m);
  for (long mask = 0; mask < (1L << bits); ++mask) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) {
        corner(j, i) = (mask >> (i * d + j)) & 1 ? hc.ucb(j, i) : hc.lcb(j, i);
      }
    }
    for (int i = 0; i < m; ++i) best[i] = std::min(best[i], theta.dot(corner.col(i)));
  }
  return best;
}

std::optional<double> lp_by_vertices(const LpProblem& lp, double feas_tol) {
  const int m = static_cast<int>(lp.r.size());
  const int k = static_cast<int>(lp.consumption.rows());
  // Rows of g . p <= h. The simplex row comes last; without idling it must be tight.
  std::vector<Vec> g;
  std::vector<double> h;
  for (int i = 0; i < m; ++i) {
    Vec e = Vec::Zero(m);
    e[i] = -1.0;
    g.push_back(e);
    h.push_back(0.0);
  }
  const double cap = (1.0 - lp.eps) * lp.budget_ratio;
  for (int r = 0; r < k; ++r) {
    g.push_back(lp.consumption.row(r).transpose());
    h.push_back(cap);
  }
  g.push_back(Vec::Ones(m));
  h.push_back(1.0);
  const int rows = static_cast<int>(g.size());
  const int simplex_row = rows - 1;

  std::optional<double> best;
  std::vector<int> chosen;
  std::function<void(int)> recurse = [&](int start) {
    if (static_cast<int>(chosen.size()) == m) {
      if (!lp.allow_idle &&
          std::find(chosen.begin(), chosen.end(), simplex_row) == chosen.end()) {
        return;
      }
      Mat a(m, m);
      Vec rhs(m);
      for (int q = 0; q < m; ++q) {
        a.row(q) = g[chosen[q]].transpose();
        rhs[q] = h[chosen[q]];
      }
      Eigen::FullPivLU<Mat> lu(a);
      if (!lu.isInvertible()) return;
      const Vec p = lu.solve(rhs);
      for (int q = 0; q < rows; ++q) {
        if (g[q].dot(p) > h[q] + feas_tol) return;
      }
      if (!lp.allow_idle && std::abs(p.sum() - 1.0) > feas_tol) return;
      const double value = lp.r.dot(p);
      if (!best || value > *best) best = value;
      return;
    }
    for (int q = start; q < rows; ++q) {
      chosen.push_back(q);
      recurse(q + 1);
      chosen.pop_back();
    }
  };
  recurse(0);
  return best;
}

double concave_interval_max(const SeparableTerm& term, double lo, double hi) {
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = term.value(x1);
  double f2 = term.value(x2);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = term.value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = term.value(x1);
    }
  }
  return std::max({term.value(lo), term.value(hi), f1, f2});
}

namespace {

bool box_meets_set(const Vec& lo, const Vec& hi, const ConvexSet& set) {
  const Vec l = lo.cwiseMax(set.lo());
  const Vec u = hi.cwiseMin(set.hi());
  if ((u - l).minCoeff() < -1e-12) return false;
  if (set.kind() == ConvexSet::Kind::kBox) return true;
  if (set.kind() != ConvexSet::Kind::kHalfspaces || set.a().rows() != 1) {
    throw std::invalid_argument("ucb_step_grid: S must be a box or one halfspace");
  }
  double smallest = 0.0;
  for (int j = 0; j < l.size(); ++j) smallest += std::min(set.a()(0, j) * l[j], set.a()(0, j) * u[j]);
  return smallest <= set.b()[0] + 1e-12;
}

}  // namespace

GridStep ucb_step_grid(const Hypercube& hc, const std::vector<SeparableTerm>& terms,
                       const ConvexSet& set, int steps) {
  const int m = hc.m();
  GridStep best;
  best.value = -std::numeric_limits<double>::infinity();
  std::vector<int> counts(m, 0);
  std::function<void(int, int)> recurse = [&](int i, int left) {
    if (i == m - 1) {
      counts[i] = left;
      Vec p(m);
      for (int q = 0; q < m; ++q) p[q] = static_cast<double>(counts[q]) / steps;
      const Vec lo = hc.lcb * p;
      const Vec hi = hc.ucb * p;
      if (!box_meets_set(lo, hi, set)) return;
      double value = 0.0;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        value += concave_interval_max(terms[j], lo[j], hi[j]);
      }
      if (!best.feasible || value > best.value) best = {true, value, p};
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[i] = c;
      recurse(i + 1, left - c);
    }
  };
  recurse(0, steps);
  if (!best.feasible) best.value = 0.0;
  return best;
}

double box_distance(const Vec& z, const Vec& lo, const Vec& hi) {
  double sum = 0.0;
  for (int j = 0; j < z.size(); ++j) {
    const double gap = z[j] < lo[j] ? lo[j] - z[j] : (z[j] > hi[j] ? z[j] - hi[j] : 0.0);
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

double halfspace_distance(const Vec& z, const Vec& a, double b) {
  return std::max(0.0, a.dot(z) - b) / a.norm();
}

Vec halfspace_projection(const Vec& z, const Vec& a, double b) {
  const double excess = a.dot(z) - b;
  if (excess <= 0.0) return z;
  return z - (excess / a.squaredNorm()) * a;
}

double ellipsoid_min_sampled(const Vec& center, const Mat& gram, double radius2, const Vec& c,
                             int samples, Rng& rng) {
  const int n = static_cast<int>(center.size());
  // Surface point: center + sqrt(radius2) * U^{-1} u with gram = U' U, |u| = 1.
  const Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("gram not positive definite");
  const Mat upper = llt.matrixU();
  const Mat upper_inv = upper.inverse();
  const double r = std::sqrt(radius2);
  double best = std::numeric_limits<double>::infinity();
  Vec u(n);
  for (int s = 0; s < samples;) {
    for (int k = 0; k < n; ++k) u[k] = rng.uniform(-1.0, 1.0);
    const double norm = u.norm();
    if (norm > 1.0 || norm < 1e-3) continue;
    ++s;
    const Vec w = center + r * (upper_inv * (u / norm));
    best = std::min(best, c.dot(w));
  }
  return best;
}

}  // namespace bwcr::oracle
