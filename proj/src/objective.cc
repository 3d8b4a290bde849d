#include "bwcr/objective.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>

namespace bwcr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Supergradients of sqrt are evaluated no closer to zero than this.
constexpr double kSqrtFloor = 1e-12;

std::once_flag clip_warning;

void warn_clipped() {
  std::call_once(clip_warning, [] {
    std::cerr << "warning: objective evaluated outside [0,1]^d; input clipped\n";
  });
}

// Bisection for the root of a decreasing function on [0,1], clamped to the ends.
template <typename F>
double decreasing_root(F derivative) {
  if (derivative(0.0) <= 0.0) return 0.0;
  if (derivative(1.0) >= 0.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double SeparableTerm::value(double x) const {
  switch (kind) {
    case Kind::kSqrt: return weight * std::sqrt(x);
    case Kind::kLog1p: return weight * std::log1p(x);
    case Kind::kQuadratic: return weight * (1.0 - (x - center) * (x - center));
  }
  return 0.0;
}

double SeparableTerm::derivative(double x) const {
  switch (kind) {
    case Kind::kSqrt: return weight / (2.0 * std::sqrt(std::max(x, kSqrtFloor)));
    case Kind::kLog1p: return weight / (1.0 + x);
    case Kind::kQuadratic: return -2.0 * weight * (x - center);
  }
  return 0.0;
}

double SeparableTerm::conjugate_argmax(double theta) const {
  // theta + value'(y) is decreasing in y; clamp its root to [0,1].
  switch (kind) {
    case Kind::kSqrt: {
      if (theta >= 0.0) return 1.0;
      const double root = weight / (2.0 * -theta);
      return std::min(1.0, root * root);
    }
    case Kind::kLog1p:
      if (theta >= 0.0) return 1.0;
      return std::clamp(weight / -theta - 1.0, 0.0, 1.0);
    case Kind::kQuadratic:
      return std::clamp(center + theta / (2.0 * weight), 0.0, 1.0);
  }
  return 0.0;
}

double SeparableTerm::prox(double z, double a) const {
  if (kind == Kind::kQuadratic) {
    const double y = (2.0 * weight * center + z / a) / (2.0 * weight + 1.0 / a);
    return std::clamp(y, 0.0, 1.0);
  }
  return decreasing_root([&](double y) {
    const double slope = kind == Kind::kSqrt
                             ? (y <= 0.0 ? kInf : weight / (2.0 * std::sqrt(y)))
                             : derivative(y);
    return slope - (y - z) / a;
  });
}

double SeparableTerm::curvature() const {
  switch (kind) {
    case Kind::kSqrt: return kInf;
    case Kind::kLog1p: return weight;
    case Kind::kQuadratic: return 2.0 * weight;
  }
  return kInf;
}

double SeparableTerm::slope() const {
  switch (kind) {
    case Kind::kSqrt: return kInf;
    case Kind::kLog1p: return weight;
    case Kind::kQuadratic: return 2.0 * weight * std::max(center, 1.0 - center);
  }
  return kInf;
}

const char* to_string(SeparableTerm::Kind kind) {
  switch (kind) {
    case SeparableTerm::Kind::kSqrt: return "sqrt";
    case SeparableTerm::Kind::kLog1p: return "log1p";
    case SeparableTerm::Kind::kQuadratic: return "quadratic";
  }
  return "unknown";
}

SeparableTerm::Kind separable_kind_from_string(const std::string& name) {
  if (name == "sqrt") return SeparableTerm::Kind::kSqrt;
  if (name == "log1p") return SeparableTerm::Kind::kLog1p;
  if (name == "quadratic") return SeparableTerm::Kind::kQuadratic;
  throw ConfigError("unknown separable term '" + name + "'");
}

Objective Objective::linear(Vec c, Norm norm) {
  if (c.size() == 0 || !c.allFinite()) throw ContractError("linear objective: bad coefficients");
  Objective f(Kind::kLinear, static_cast<int>(c.size()), norm);
  f.lipschitz_ = norm_of(c, dual_of(norm));
  f.smoothness_ = 0.0;
  f.c_ = std::move(c);
  return f;
}

Objective Objective::neg_distance(ConvexSet set, Norm norm) {
  Objective f(Kind::kNegDistance, set.dim(), norm);
  f.lipschitz_ = 1.0;
  f.set_ = std::make_shared<const ConvexSet>(std::move(set));
  return f;
}

Objective Objective::separable(std::vector<SeparableTerm> terms, Norm norm) {
  if (terms.empty()) throw ContractError("separable objective needs at least one term");
  Vec slopes(static_cast<Eigen::Index>(terms.size()));
  double curvature = 0.0;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (!(terms[j].weight > 0.0)) throw ContractError("separable term weight must be positive");
    slopes[static_cast<Eigen::Index>(j)] = terms[j].slope();
    curvature += terms[j].curvature();
  }
  Objective f(Kind::kSeparable, static_cast<int>(terms.size()), norm);
  f.lipschitz_ = slopes.allFinite() ? norm_of(slopes, dual_of(norm)) : kInf;
  // Per-coordinate curvature bounds add up because (y_j - z_j)^2 <= 1 on the cube.
  if (std::isfinite(curvature)) f.smoothness_ = curvature;
  f.terms_ = std::move(terms);
  return f;
}

Objective Objective::custom(int d, std::function<double(const Vec&)> value,
                            std::function<Vec(const Vec&)> supergradient, double lipschitz,
                            Norm norm) {
  if (d < 1 || !value || !supergradient) throw ContractError("custom objective: bad arguments");
  if (!(lipschitz > 0.0)) throw ContractError("custom objective: Lipschitz constant required");
  Objective f(Kind::kCustom, d, norm);
  f.lipschitz_ = lipschitz;
  f.custom_value_ = std::move(value);
  f.custom_gradient_ = std::move(supergradient);
  return f;
}

Objective Objective::with_lipschitz(double lipschitz) const {
  if (!(lipschitz > 0.0)) throw ContractError("Lipschitz constant must be positive");
  Objective copy = *this;
  copy.lipschitz_ = lipschitz;
  return copy;
}

Vec Objective::clip(const Vec& x) const {
  if (x.size() != dim_) throw ContractError("objective: dimension mismatch");
  if (!x.allFinite()) throw ContractError("objective: non-finite input");
  if (x.minCoeff() < 0.0 || x.maxCoeff() > 1.0) {
    warn_clipped();
    return x.cwiseMax(0.0).cwiseMin(1.0);
  }
  return x;
}

double Objective::value(const Vec& input) const {
  const Vec x = clip(input);
  switch (kind_) {
    case Kind::kLinear: return c_.dot(x);
    case Kind::kNegDistance: return -set_->distance(x, norm_);
    case Kind::kSeparable: {
      double total = 0.0;
      for (int j = 0; j < dim_; ++j) total += terms_[j].value(x[j]);
      return total;
    }
    case Kind::kCustom: return custom_value_(x);
  }
  return 0.0;
}

Vec Objective::supergradient(const Vec& input) const {
  const Vec x = clip(input);
  switch (kind_) {
    case Kind::kLinear: return c_;
    case Kind::kNegDistance: {
      const Vec diff = x - set_->project(x, norm_);
      const double r = norm_of(diff, norm_);
      if (r == 0.0) return Vec::Zero(dim_);
      if (norm_ == Norm::kL2) return -diff / r;
      // A norming functional of diff: ||g||_* = 1 and g.diff = ||diff||.
      Vec g = Vec::Zero(dim_);
      if (norm_ == Norm::kL1) {
        for (int j = 0; j < dim_; ++j) g[j] = diff[j] > 0.0 ? 1.0 : (diff[j] < 0.0 ? -1.0 : 0.0);
      } else {
        Eigen::Index k = 0;
        diff.cwiseAbs().maxCoeff(&k);
        g[k] = diff[k] > 0.0 ? 1.0 : -1.0;
      }
      return -g;
    }
    case Kind::kSeparable: {
      Vec g(dim_);
      for (int j = 0; j < dim_; ++j) g[j] = terms_[j].derivative(x[j]);
      return g;
    }
    case Kind::kCustom: return custom_gradient_(x);
  }
  return Vec();
}

Vec Objective::fenchel_argmax(const Vec& theta) const {
  if (theta.size() != dim_ || !theta.allFinite()) throw ContractError("fenchel: bad theta");
  switch (kind_) {
    case Kind::kLinear: {
      Vec y(dim_);
      for (int j = 0; j < dim_; ++j) y[j] = theta[j] + c_[j] > 0.0 ? 1.0 : 0.0;
      return y;
    }
    case Kind::kNegDistance:
      return set_->support_point(theta);
    case Kind::kSeparable: {
      Vec y(dim_);
      for (int j = 0; j < dim_; ++j) y[j] = terms_[j].conjugate_argmax(theta[j]);
      return y;
    }
    case Kind::kCustom: {
      // Projected supergradient ascent on y -> y.theta + f(y) over the cube.
      Vec y = Vec::Constant(dim_, 0.5);
      Vec best = y;
      double best_val = y.dot(theta) + custom_value_(y);
      for (int k = 0; k < 500; ++k) {
        y = (y + (theta + custom_gradient_(y)) / (k + 1.0)).cwiseMax(0.0).cwiseMin(1.0);
        const double val = y.dot(theta) + custom_value_(y);
        if (val > best_val) {
          best_val = val;
          best = y;
        }
      }
      return best;
    }
  }
  return Vec();
}

double Objective::fenchel(const Vec& theta) const {
  switch (kind_) {
    case Kind::kLinear: {
      if (theta.size() != dim_) throw ContractError("fenchel: dimension mismatch");
      return (theta + c_).cwiseMax(0.0).sum();
    }
    case Kind::kNegDistance:
      return set_->support(theta);
    case Kind::kSeparable: {
      if (theta.size() != dim_) throw ContractError("fenchel: dimension mismatch");
      double total = 0.0;
      for (int j = 0; j < dim_; ++j) {
        const double y = terms_[j].conjugate_argmax(theta[j]);
        total += theta[j] * y + terms_[j].value(y);
      }
      return total;
    }
    case Kind::kCustom: {
      const Vec y = fenchel_argmax(theta);
      return y.dot(theta) + custom_value_(y);
    }
  }
  return 0.0;
}

Vec minimize_dual(const Objective& f, const Vec& z, double radius, double q, int stages,
                  int iters_per_stage) {
  const Norm dual = dual_of(f.norm());
  auto objective = [&](const Vec& theta) {
    return f.fenchel(theta) + 0.5 * q * theta.squaredNorm() - theta.dot(z);
  };
  const double g_bound = std::sqrt(static_cast<double>(f.dim())) + q * radius;
  Vec best = Vec::Zero(f.dim());
  double best_val = objective(best);
  double scale = radius / std::max(g_bound, 1e-12);
  for (int s = 0; s < stages; ++s) {
    Vec theta = best;
    for (int k = 0; k < iters_per_stage; ++k) {
      const Vec g = f.fenchel_argmax(theta) + q * theta - z;
      if (g.squaredNorm() == 0.0) break;
      theta = project_to_ball(theta - (scale / std::sqrt(k + 1.0)) * g, dual, radius);
      const double val = objective(theta);
      if (val < best_val) {
        best_val = val;
        best = theta;
      }
    }
    scale *= 0.5;
  }
  return best;
}

double duality_gap_check(const Objective& f, const Vec& z) {
  double radius = f.lipschitz();
  if (!std::isfinite(radius)) radius = norm_of(f.supergradient(z), dual_of(f.norm())) + 1.0;
  const Vec theta = minimize_dual(f, z, radius, 0.0);
  return std::abs(f.value(z) - (f.fenchel(theta) - theta.dot(z)));
}

SmoothedObjective::SmoothedObjective(Objective base, double sigma)
    : base_(std::move(base)), sigma_(sigma) {
  if (!(sigma_ > 0.0)) throw ContractError("smoothing parameter must be positive");
  if (base_.norm() != Norm::kL2) throw UnsupportedError("smoothing is implemented for L2 only");
  if (!std::isfinite(base_.lipschitz())) {
    throw UnsupportedError("smoothing needs a finite Lipschitz constant");
  }
}

double SmoothedObjective::smoothness() const { return base_.dim() * base_.lipschitz() / sigma_; }

Vec SmoothedObjective::dual_point(const Vec& z) const {
  const double lip = base_.lipschitz();
  const int d = base_.dim();
  switch (base_.kind()) {
    case Objective::Kind::kNegDistance:
      return -smoothed_distance(z, base_.target(), sigma_).gradient;
    case Objective::Kind::kLinear:
    case Objective::Kind::kSeparable: {
      // theta_j = (z_j - y_j) / a with y_j = prox(z_j, a); a = sigma/L + mu
      // grows until the ball constraint holds.
      auto theta_for = [&](double a) {
        Vec theta(d);
        for (int j = 0; j < d; ++j) {
          const double y = base_.kind() == Objective::Kind::kLinear
                               ? std::clamp(z[j] + a * base_.coefficients()[j], 0.0, 1.0)
                               : base_.terms()[j].prox(z[j], a);
          theta[j] = (z[j] - y) / a;
        }
        return theta;
      };
      const double a0 = sigma_ / lip;
      Vec theta = theta_for(a0);
      if (theta.norm() <= lip) return theta;
      double lo = a0;
      double hi = 2.0 * a0;
      while (theta_for(hi).norm() > lip) hi *= 2.0;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (theta_for(mid).norm() > lip) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      return theta_for(hi);
    }
    case Objective::Kind::kCustom:
      return minimize_dual(base_, z, lip, sigma_ / lip, 20, 500);
  }
  return Vec();
}

double SmoothedObjective::value(const Vec& z) const {
  if (base_.kind() == Objective::Kind::kNegDistance) {
    return -smoothed_distance(z, base_.target(), sigma_).value;
  }
  const Vec theta = dual_point(z);
  return base_.fenchel(theta) + sigma_ / (2.0 * base_.lipschitz()) * theta.squaredNorm() -
         theta.dot(z);
}

Vec SmoothedObjective::gradient(const Vec& z) const { return -dual_point(z); }

SmoothedObjective smoothed(const Objective& f, double sigma) { return SmoothedObjective(f, sigma); }

double smoothed_value_generic(const Objective& f, double sigma, const Vec& z) {
  const double lip = f.lipschitz();
  const double q = sigma / lip;
  const Vec theta = minimize_dual(f, z, lip, q);
  return f.fenchel(theta) + 0.5 * q * theta.squaredNorm() - theta.dot(z);
}

}  // namespace bwcr
