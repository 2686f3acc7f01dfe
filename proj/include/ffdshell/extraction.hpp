#pragma once

#include <memory>
#include <vector>

#include "ffdshell/fe_space.hpp"
#include "ffdshell/spline.hpp"

namespace ffdshell {

/// Linkage between spline coefficients and nodal Lagrange coefficients of one
/// patch. Row i of M holds the rational basis values at node i, so
/// P_FE = M P_IGA gives physical node positions and M^T phi = R.
struct ExtractionMap {
  SpMat M;
  std::vector<Vec2> nodes;
  FeSpace fe;
  int patch = -1;
};

ExtractionMap build_extraction(const NurbsPatch& patch, int patch_id = -1);

/// Cached least-squares solver for M x = b (M tall, full column rank).
class SplineProjector {
 public:
  SplineProjector() = default;
  explicit SplineProjector(const SpMat& M);

  /// argmin ||M x - b||; `residual` receives the max-norm of M x - b.
  Mat solve(const Mat& rhs, double* residual = nullptr) const;
  Vec solve(const Vec& rhs, double* residual = nullptr) const;
  int cols() const { return static_cast<int>(M_.cols()); }

 private:
  SpMat M_;
  std::shared_ptr<Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>>> qr_;
};

/// Sparse matrix of trivariate block basis values at the given points.
/// Throws ContainmentError naming the point index when one lies outside.
SpMat build_ffd_eval(const BsplineVolume& block, const std::vector<Vec3>& points, int patch_id = -1);

}  // namespace ffdshell
