#include "bwcr/confidence.h"

#include <algorithm>
#include <cmath>

namespace bwcr {

double rad(double nu, double n, double gamma) {
  if (!(n >= 1.0)) throw ContractError("rad: count must be at least 1");
  if (!(nu >= 0.0)) throw ContractError("rad: mean estimate must be nonnegative");
  if (!(gamma > 0.0)) throw ContractError("rad: gamma must be positive");
  return std::sqrt(gamma * nu / n) + gamma / n;
}

double default_gamma(int m, int horizon, int d, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ContractError("delta must lie in (0,1)");
  return std::log(static_cast<double>(m) * horizon * d / delta);
}

bool Hypercube::contains(const Mat& v, double tol) const {
  return ((v - lcb).minCoeff() >= -tol) && ((ucb - v).minCoeff() >= -tol);
}

void Hypercube::validate() const {
  if (lcb.rows() != ucb.rows() || lcb.cols() != ucb.cols()) {
    throw ContractError("hypercube bound shapes differ");
  }
  if (lcb.size() == 0) return;
  if (lcb.minCoeff() < 0.0 || ucb.maxCoeff() > 1.0 || (ucb - lcb).minCoeff() < 0.0) {
    throw ContractError("hypercube requires 0 <= lcb <= ucb <= 1");
  }
}

Hypercube Hypercube::degenerate(const Mat& mean) { return {mean, mean}; }

Hypercube Hypercube::vacuous(int d, int m) { return {Mat::Zero(d, m), Mat::Ones(d, m)}; }

Mat vertex(const Hypercube& hc, const Vec& theta) {
  if (theta.size() != hc.d()) throw ContractError("vertex: theta dimension mismatch");
  Mat w(hc.d(), hc.m());
  for (int j = 0; j < hc.d(); ++j) {
    w.row(j) = theta[j] <= 0.0 ? hc.ucb.row(j) : hc.lcb.row(j);
  }
  return w;
}

ConfidenceState::ConfidenceState(int d, int m, double gamma)
    : gamma_(gamma), counts_(Eigen::VectorXi::Zero(m)), sums_(Mat::Zero(d, m)) {
  if (d < 1 || m < 1) throw ContractError("confidence state needs d, m >= 1");
  if (!(gamma > 0.0)) throw ContractError("gamma must be positive");
}

void ConfidenceState::record(ArmChoice arm, const Vec& v) {
  ++t_;
  if (!arm) return;
  if (*arm < 0 || *arm >= m()) throw std::out_of_range("record: arm out of range");
  if (v.size() != d()) throw ContractError("record: observation dimension mismatch");
  ++counts_[*arm];
  sums_.col(*arm) += v;
}

Mat ConfidenceState::empirical_mean() const {
  Mat mean = sums_;
  for (int i = 0; i < m(); ++i) mean.col(i) /= counts_[i] + 1.0;
  return mean;
}

Hypercube ConfidenceState::hypercube() const {
  const Mat mean = empirical_mean();
  Hypercube hc{Mat(d(), m()), Mat(d(), m())};
  for (int i = 0; i < m(); ++i) {
    const double n = counts_[i] + 1.0;
    for (int j = 0; j < d(); ++j) {
      const double mu = mean(j, i);
      const double width = 2.0 * rad(mu, n, gamma_);
      hc.ucb(j, i) = std::min(1.0, mu + width);
      hc.lcb(j, i) = std::max(0.0, mu - width);
    }
  }
  return hc;
}

EllipsoidState::EllipsoidState(std::shared_ptr<const ContextualModel> model, double radius2)
    : model_(std::move(model)) {
  if (!model_) throw ContractError("ellipsoid state needs a contextual model");
  radius2_ = radius2 > 0.0 ? radius2 : static_cast<double>(model_->n);
  const int n = model_->n;
  for (int j = 0; j < model_->d(); ++j) {
    gram_.push_back(Mat::Identity(n, n));
    inverse_.push_back(Mat::Identity(n, n));
    rhs_.push_back(Vec::Zero(n));
    centers_.push_back(Vec::Zero(n));
  }
}

void EllipsoidState::record(int arm, const Vec& v) {
  if (arm < 0 || arm >= m()) throw std::out_of_range("ellipsoid record: arm out of range");
  if (v.size() != d()) throw ContractError("ellipsoid record: observation dimension mismatch");
  ++updates_since_refresh_;
  const bool rebuild = updates_since_refresh_ >= kRefreshInterval;
  for (int j = 0; j < d(); ++j) {
    const Vec& x = model_->contexts[j][arm];
    gram_[j].noalias() += x * x.transpose();
    rhs_[j] += v[j] * x;
    if (rebuild) {
      refresh(j);
    } else {
      const Vec bx = inverse_[j] * x;
      inverse_[j].noalias() -= (bx * bx.transpose()) / (1.0 + x.dot(bx));
    }
    centers_[j] = inverse_[j] * rhs_[j];
  }
  if (rebuild) updates_since_refresh_ = 0;
}

void EllipsoidState::refresh(int j) {
  inverse_[j] = gram_[j].ldlt().solve(Mat::Identity(n(), n()));
}

double EllipsoidState::min_linear(int j, const Vec& c) const {
  if (!c.allFinite()) throw ContractError("min_linear: non-finite direction");
  const double spread = std::sqrt(radius2_ * std::max(0.0, c.dot(inverse_[j] * c)));
  return c.dot(centers_[j]) - spread;
}

double EllipsoidState::max_linear(int j, const Vec& c) const {
  if (!c.allFinite()) throw ContractError("max_linear: non-finite direction");
  const double spread = std::sqrt(radius2_ * std::max(0.0, c.dot(inverse_[j] * c)));
  return c.dot(centers_[j]) + spread;
}

bool EllipsoidState::contains(int j, const Vec& w, double tol) const {
  const Vec diff = w - centers_[j];
  return diff.dot(gram_[j] * diff) <= radius2_ + tol;
}

Hypercube EllipsoidState::envelope() const {
  Hypercube hc{Mat(d(), m()), Mat(d(), m())};
  for (int j = 0; j < d(); ++j) {
    for (int i = 0; i < m(); ++i) {
      const Vec& x = model_->contexts[j][i];
      hc.lcb(j, i) = std::clamp(min_linear(j, x), 0.0, 1.0);
      hc.ucb(j, i) = std::clamp(max_linear(j, x), 0.0, 1.0);
    }
  }
  return hc;
}

}  // namespace bwcr
