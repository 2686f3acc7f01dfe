#pragma once

#include <array>
#include <vector>

#include "ffdshell/solver.hpp"

namespace ffdshell {

/// Axis-aligned trivariate B-spline block whose baseline lattice realizes
/// the identity map on [lo, hi].
struct FfdBlock {
  Vec3 lo = Vec3::Zero(), hi = Vec3::Ones();
  std::array<int, 3> degree{1, 1, 1};
  BsplineVolume volume;

  std::array<int, 3> shape() const { return volume.shape(); }
  int num_points() const { return volume.num_points(); }
  /// Lattice coordinates stacked as 3 * index + component.
  Vec lattice() const;
};

/// Control points at Greville abscissae of open uniform knots.
FfdBlock build_identity_block(const Vec3& lo, const Vec3& hi, std::array<int, 3> degree, std::array<int, 3> shape);

/// Identity block enclosing the baseline FE nodes of `patches`, padded by
/// `margin` times the box extent (degenerate directions get a unit-free pad).
FfdBlock enclosing_block(const CoupledSystem& sys, const std::vector<int>& patches, std::array<int, 3> degree,
                         std::array<int, 3> shape, double margin = 0.01);

/// Linear homogeneous relation on lattice offsets.
///  FixLayer:       offsets of layer `layer` along `axis` are zero
///                  (negative layer counts from the far end).
///  CollinearLine:  lines along `axis` move rigidly in the transverse
///                  components, so they stay parallel to the axis.
///  EqualAlongAxis: lines along `axis` share one offset per component.
struct LatticeConstraint {
  enum class Kind { FixLayer, CollinearLine, EqualAlongAxis };
  Kind kind = Kind::FixLayer;
  int axis = 0;
  int layer = 0;
  std::array<bool, 3> components{true, true, true};
};

/// full = R q for the active lattice entries; entries outside every class
/// are fixed at zero offset.
struct Reduction {
  SpMat R;                               // (ncomp * nL) x nq, 0/1 entries
  std::vector<std::vector<int>> groups;  // full-vector entries per variable
  int num_free() const { return static_cast<int>(R.cols()); }
};

/// `ncomp` is 3 for geometry (filtered by `active`) or 1 for thickness.
Reduction reduce_variables(std::array<int, 3> shape, int ncomp, std::array<bool, 3> active,
                           const std::vector<LatticeConstraint>& constraints);

/// Per-patch composed operators D = pinv(M) A_FFD with A_FFD evaluated at
/// the baseline FE nodes, so P_IGA = D P_FFD.
struct FfdMap {
  std::vector<int> patches;
  std::vector<Mat> D;             // n_cp(patch) x n_lattice
  std::vector<double> residual;   // baseline fit residual per patch
};

FfdMap build_ffd_map(const CoupledSystem& sys, const FfdBlock& block, const std::vector<int>& patches);

/// Writes D * lattice into the member patches of a global geometry vector.
void apply_ffd_shape(const FfdMap& map, const CoupledSystem& sys, const Vec& lattice3, Vec& P);

/// Max physical gap per intersection for the current geometry, evaluated at
/// the frozen quadrature-mesh parameters.
std::vector<double> intersection_gaps(const CoupledSystem& sys);

struct ShapeBlockSpec {
  FfdBlock block;
  std::vector<int> patches;
  std::array<bool, 3> components{false, false, true};
  std::vector<LatticeConstraint> constraints;
};

struct ThicknessBlockSpec {
  FfdBlock block;
  std::vector<int> patches;
  std::vector<LatticeConstraint> constraints;
};

struct DesignSpec {
  std::vector<ShapeBlockSpec> shape;
  std::vector<ThicknessBlockSpec> thickness;
  std::vector<int> constant_thickness;  // one variable per listed patch
};

/// Reduced design variables with affine maps to spline coefficients:
///   P(qs) = P0 + Gs qs,   t(qt) = t0 + Gt qt.
/// Shape variables are lattice offsets; thickness variables are offsets of
/// lattice thickness values or of per-patch constants.
class DesignSpace {
 public:
  DesignSpace(const CoupledSystem& sys, DesignSpec spec);

  const DesignSpec& spec() const { return spec_; }
  int num_shape() const { return static_cast<int>(Gs_.cols()); }
  int num_thickness() const { return static_cast<int>(Gt_.cols()); }

  Vec geometry(const Vec& qs) const { return P0_ + Gs_ * qs; }
  Vec thickness(const Vec& qt) const { return t0_ + Gt_ * qt; }
  const Mat& shape_jacobian() const { return Gs_; }
  const Mat& thickness_jacobian() const { return Gt_; }
  const Vec& baseline_geometry() const { return P0_; }
  /// Baseline thickness as represented by the design maps.
  const Vec& baseline_thickness() const { return t0_; }

  /// Offset bounds keeping every lattice (or patch) thickness in [lo, hi].
  void thickness_bounds(double lo, double hi, Vec& ql, Vec& qu) const;
  /// Offset bounds of +-fraction of the block extent per shape variable.
  void shape_bounds(double fraction, Vec& ql, Vec& qu) const;

  /// Largest baseline fit residual over all FFD maps.
  double max_fit_residual() const;

  /// Per-block maps and reductions, for diagnostics and lattice-level checks.
  const std::vector<FfdMap>& shape_maps() const { return shape_maps_; }
  const std::vector<Reduction>& shape_reductions() const { return shape_red_; }
  const std::vector<FfdMap>& thickness_maps() const { return thick_maps_; }

 private:
  DesignSpec spec_;
  Vec P0_, t0_;
  Mat Gs_, Gt_;
  std::vector<FfdMap> shape_maps_, thick_maps_;
  std::vector<Reduction> shape_red_, thick_red_;
  std::vector<Vec> thick_lattice0_;  // fitted baseline lattice thickness per block
  std::vector<std::pair<int, double>> shape_extent_;         // per shape variable: component, block extent
  std::vector<std::pair<double, double>> thick_base_range_;  // per thickness variable: min/max baseline value
};

}  // namespace ffdshell
