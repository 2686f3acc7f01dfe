#pragma once

#include <array>
#include <vector>

#include "ffdshell/linalg.hpp"

namespace ffdshell {

/// Open (clamped) knot vector of a given degree.
class KnotVector {
 public:
  KnotVector() = default;
  /// Throws ValidationError unless the knots are nondecreasing, open, and
  /// define at least degree+1 basis functions.
  KnotVector(int degree, std::vector<double> knots);

  /// Open uniform knot vector on [a, b] with `num_elements` equal spans.
  static KnotVector open_uniform(int degree, int num_elements, double a = 0.0, double b = 1.0);

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  /// Distinct knot values; consecutive pairs bound the Bezier elements.
  std::vector<double> breaks() const;
  int num_elements() const { return static_cast<int>(breaks().size()) - 1; }

  /// Knot averages; control points placed here reproduce the identity map.
  std::vector<double> greville() const;

 private:
  int degree_ = 0;
  std::vector<double> knots_;
};

/// Index i with knots[i] <= u < knots[i+1]; u == back() maps to the last
/// nonempty span. Throws DomainError outside [front, back].
int find_span(const KnotVector& kv, double u);

/// Nonzero basis functions N_{first..first+p} and their derivatives.
struct BasisEval {
  int first = 0;
  int degree = 0;
  int max_deriv = 0;
  std::vector<double> values;  // (max_deriv + 1) x (degree + 1), row-major

  double operator()(int k, int j) const { return values[k * (degree + 1) + j]; }
};

BasisEval basis_and_derivs(const KnotVector& kv, double u, int max_deriv);

/// Position and parametric derivatives of a surface up to second order.
struct SurfacePoint {
  Vec3 x = Vec3::Zero();
  Vec3 du = Vec3::Zero();
  Vec3 dv = Vec3::Zero();
  Vec3 duu = Vec3::Zero();
  Vec3 duv = Vec3::Zero();
  Vec3 dvv = Vec3::Zero();
};

/// Nonzero basis functions of a surface at one point with derivative slots
/// {value, u, v, uu, uv, vv}.
struct SurfaceBasis {
  std::vector<int> index;
  std::array<std::vector<double>, 6> d;
  int size() const { return static_cast<int>(index.size()); }
};

/// Tensor-product NURBS surface. Control points are stored u-major
/// (index = i * nv + j). Thickness is one coefficient per control point.
class NurbsPatch {
 public:
  NurbsPatch() = default;
  NurbsPatch(KnotVector ku, KnotVector kv, std::vector<Vec3> points, std::vector<double> weights = {},
             std::vector<double> thickness = {});

  const KnotVector& ku() const { return ku_; }
  const KnotVector& kv() const { return kv_; }
  int nu() const { return ku_.num_basis(); }
  int nv() const { return kv_.num_basis(); }
  int num_points() const { return nu() * nv(); }
  int index(int i, int j) const { return i * nv() + j; }

  const std::vector<Vec3>& points() const { return points_; }
  std::vector<Vec3>& points() { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& thickness() const { return thickness_; }
  std::vector<double>& thickness() { return thickness_; }
  bool unit_weights() const;

  void set_uniform_thickness(double t);

  /// Axis-aligned bounding box diagonal of the control net.
  double bbox_diagonal() const;

 private:
  KnotVector ku_, kv_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
  std::vector<double> thickness_;
};

/// Rational evaluation with quotient-rule derivatives (max_deriv <= 2).
SurfacePoint eval_surface(const NurbsPatch& patch, double u, double v, int max_deriv = 2);

/// Tensor product of two univariate evaluations; index = i * nv + j.
SurfaceBasis tensor_basis(const BasisEval& bu, const BasisEval& bv, int nv);

/// In-place conversion of polynomial basis values to rational ones,
/// R_k = w_k N_k / sum(w N), with quotient-rule derivatives.
void rationalize(SurfaceBasis& b, const std::vector<double>& w);

/// Rational basis functions R_k = w_k N_k / W and their derivatives.
SurfaceBasis rational_basis(const NurbsPatch& patch, double u, double v);

/// Scalar coefficient field (e.g. thickness) evaluated with the rational basis.
double eval_scalar(const NurbsPatch& patch, const std::vector<double>& coeffs, double u, double v);

/// Trivariate polynomial B-spline block; index = (i * nv + j) * nw + k.
class BsplineVolume {
 public:
  BsplineVolume() = default;
  BsplineVolume(KnotVector ku, KnotVector kv, KnotVector kw, std::vector<Vec3> points);

  const KnotVector& knots(int dir) const { return dir == 0 ? ku_ : (dir == 1 ? kv_ : kw_); }
  std::array<int, 3> shape() const { return {ku_.num_basis(), kv_.num_basis(), kw_.num_basis()}; }
  int num_points() const { return ku_.num_basis() * kv_.num_basis() * kw_.num_basis(); }
  int index(int i, int j, int k) const { return (i * kv_.num_basis() + j) * kw_.num_basis() + k; }
  const std::vector<Vec3>& points() const { return points_; }
  std::vector<Vec3>& points() { return points_; }

 private:
  KnotVector ku_, kv_, kw_;
  std::vector<Vec3> points_;
};

struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;
};

/// Trivariate basis values at theta. Throws ContainmentError naming the
/// offending coordinate when theta lies outside the parametric box.
SparseRow basis_row(const BsplineVolume& block, const Vec3& theta);
Vec3 eval_volume(const BsplineVolume& block, const Vec3& theta);

}  // namespace ffdshell
