#ifndef BWCR_GEOMETRY_H_
#define BWCR_GEOMETRY_H_

#include <string>

#include "bwcr/core.h"

namespace bwcr {

enum class Norm { kL2, kLinf, kL1 };

const char* to_string(Norm norm);
Norm norm_from_string(const std::string& name);

Norm dual_of(Norm norm);
double norm_of(const Vec& x, Norm norm);

struct NormPair {
  Norm primal = Norm::kL2;

  Norm dual() const { return dual_of(primal); }
  // Norm of the all-ones vector in dimension d.
  double ones_norm(int d) const;
};

// Projection of x onto the ball {y : ||y||_norm <= radius}.
Vec project_to_ball(const Vec& x, Norm norm, double radius);

// Nonempty closed convex subset of [0,1]^d in one of three representations.
// Every representation is intersected with a coordinate box clipped to [0,1].
class ConvexSet {
 public:
  enum class Kind { kBox, kHalfspaces, kVertices };

  static ConvexSet box(Vec lo, Vec hi);
  static ConvexSet unit_box(int d);
  // {x : a x <= b, lo <= x <= hi}; lo/hi default to the unit box.
  static ConvexSet halfspaces(Mat a, Vec b);
  static ConvexSet halfspaces(Mat a, Vec b, Vec lo, Vec hi);
  // Convex hull of the columns of `points`.
  static ConvexSet vertices(Mat points, bool downward_closed = false);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(lo_.size()); }
  const Vec& lo() const { return lo_; }
  const Vec& hi() const { return hi_; }
  const Mat& a() const { return a_; }
  const Vec& b() const { return b_; }
  const Mat& points() const { return points_; }
  bool is_downward_closed() const;

  bool contains(const Vec& x, double tol = 1e-9) const;
  // max over s in S of theta . s, and a maximizer.
  double support(const Vec& theta) const;
  Vec support_point(const Vec& theta) const;
  Vec project(const Vec& x, Norm norm = Norm::kL2) const;
  double distance(const Vec& x, Norm norm = Norm::kL2) const;
  // {(1 - eps) x : x in S}. Requires a downward-closed representation.
  ConvexSet shrink(double eps) const;

 private:
  ConvexSet(Kind kind, Vec lo, Vec hi) : kind_(kind), lo_(std::move(lo)), hi_(std::move(hi)) {}

  Vec project_l2(const Vec& x) const;
  Vec project_polyhedral(const Vec& x, Norm norm) const;
  Vec project_vertices_l2(const Vec& x) const;

  Kind kind_;
  Vec lo_;
  Vec hi_;
  Mat a_;
  Vec b_;
  Mat points_;
  bool declared_downward_closed_ = false;
};

// Projection onto {y : a.y <= b, lo <= y <= hi} in the Euclidean norm, exact
// up to rounding (breakpoint search on the single multiplier).
Vec project_halfspace_box(const Vec& x, const Vec& a, double b, const Vec& lo, const Vec& hi);

struct SmoothedDistance {
  double value = 0.0;
  Vec gradient;
};

// Smoothed Euclidean distance max_{||theta||<=1} theta.z - h_S(theta) - sigma/2 ||theta||^2.
// With r = d(z, S): value r - sigma/2 when r >= sigma, else r^2 / (2 sigma).
SmoothedDistance smoothed_distance(const Vec& z, const ConvexSet& set, double sigma);

}  // namespace bwcr

#endif  // BWCR_GEOMETRY_H_
