#ifndef BWCR_OBJECTIVE_H_
#define BWCR_OBJECTIVE_H_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bwcr/core.h"
#include "bwcr/geometry.h"

namespace bwcr {

// One coordinate of a separable concave objective, scaled by weight > 0.
struct SeparableTerm {
  enum class Kind {
    kSqrt,       // w * sqrt(x)
    kLog1p,      // w * log(1 + x)
    kQuadratic,  // w * (1 - (x - center)^2)
  };
  Kind kind = Kind::kSqrt;
  double weight = 1.0;
  double center = 0.5;

  double value(double x) const;
  double derivative(double x) const;
  // max over y in [0,1] of theta * y + value(y), and its maximizer.
  double conjugate_argmax(double theta) const;
  // argmax over y in [0,1] of value(y) - (y - z)^2 / (2 a).
  double prox(double z, double a) const;
  // sup |value''| on [0,1].
  double curvature() const;
  // sup |value'| on [0,1].
  double slope() const;
};

const char* to_string(SeparableTerm::Kind kind);
SeparableTerm::Kind separable_kind_from_string(const std::string& name);

// Concave function on [0,1]^d with the constants used by the algorithms.
class Objective {
 public:
  enum class Kind { kLinear, kNegDistance, kSeparable, kCustom };

  static Objective linear(Vec c, Norm norm = Norm::kL2);
  // -d(x, S) under `norm`.
  static Objective neg_distance(ConvexSet set, Norm norm = Norm::kL2);
  static Objective separable(std::vector<SeparableTerm> terms, Norm norm = Norm::kL2);
  // User-supplied concave function; the Lipschitz constant is taken on trust.
  static Objective custom(int d, std::function<double(const Vec&)> value,
                          std::function<Vec(const Vec&)> supergradient, double lipschitz,
                          Norm norm = Norm::kL2);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  Norm norm() const { return norm_; }
  double lipschitz() const { return lipschitz_; }
  // Smoothness constant; nullopt when f is not smooth.
  std::optional<double> smoothness() const { return smoothness_; }
  bool verified() const { return kind_ != Kind::kCustom; }

  const Vec& coefficients() const { return c_; }
  const ConvexSet& target() const { return *set_; }
  const std::vector<SeparableTerm>& terms() const { return terms_; }

  Objective with_lipschitz(double lipschitz) const;

  // Inputs outside [0,1]^d are clipped (one warning per process).
  double value(const Vec& x) const;
  Vec supergradient(const Vec& x) const;

  // f*(theta) = max over y in [0,1]^d of y.theta + f(y). For neg_distance this
  // is h_S(theta), valid on the dual unit ball where the two agree.
  double fenchel(const Vec& theta) const;
  // A maximizer y of the conjugate problem; it is a subgradient of f*.
  Vec fenchel_argmax(const Vec& theta) const;

 private:
  Objective(Kind kind, int dim, Norm norm) : kind_(kind), dim_(dim), norm_(norm) {}
  Vec clip(const Vec& x) const;

  Kind kind_;
  int dim_;
  Norm norm_;
  double lipschitz_ = 0.0;
  std::optional<double> smoothness_;
  Vec c_;
  std::shared_ptr<const ConvexSet> set_;
  std::vector<SeparableTerm> terms_;
  std::function<double(const Vec&)> custom_value_;
  std::function<Vec(const Vec&)> custom_gradient_;
};

// |f(z) - min over ||theta||_* <= L of (f*(theta) - theta.z)|, the inner
// minimum found by restarted projected subgradient. Test instrument.
double duality_gap_check(const Objective& f, const Vec& z);

// Minimizes f*(theta) + q/2 ||theta||^2 - theta.z over the dual ball of radius
// `radius` by projected subgradient. Returns the minimizer.
Vec minimize_dual(const Objective& f, const Vec& z, double radius, double q, int stages = 40,
                  int iters_per_stage = 500);

// f_sigma(z) = min over ||theta||_2 <= L of f*(theta) + sigma/(2L) ||theta||^2 - theta.z.
// Concave, with f_sigma - sigma L / 2 <= f <= f_sigma and gradient -theta*(z).
class SmoothedObjective {
 public:
  SmoothedObjective(Objective base, double sigma);

  const Objective& base() const { return base_; }
  double sigma() const { return sigma_; }
  // d L / sigma.
  double smoothness() const;

  double value(const Vec& z) const;
  Vec gradient(const Vec& z) const;
  // Minimizing dual vector theta*(z).
  Vec dual_point(const Vec& z) const;

 private:
  Objective base_;
  double sigma_;
};

SmoothedObjective smoothed(const Objective& f, double sigma);

// Same quantity by generic projected gradient (500 iterations, step 1/(k+1)).
double smoothed_value_generic(const Objective& f, double sigma, const Vec& z);

}  // namespace bwcr

#endif  // BWCR_OBJECTIVE_H_
