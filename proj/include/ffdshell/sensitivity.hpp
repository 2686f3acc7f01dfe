#pragma once

#include "ffdshell/solver.hpp"

namespace ffdshell {

/// Partial derivatives of a scalar functional f(u, P, t) in the global
/// spline-coefficient layout. Empty vectors are treated as zero.
struct Partials {
  double value = 0.0;
  Vec du, dP, dt;
};

/// Internal energy and its partials from an assembly made with kGeometry.
Partials internal_energy_partials(const SystemAssembly& a);

/// Factorized tangent and cross partials at a converged state. Total
/// derivatives use one transposed solve per functional:
///   K^T lambda = df/du,   df/dP = f_P - dR/dP^T lambda,   df/dt = f_t - dR/dt^T lambda
/// with Dirichlet rows and columns dropped throughout.
class AdjointSolver {
 public:
  AdjointSolver(const CoupledSystem& sys, const Vec& u);

  const SystemAssembly& assembly() const { return a_; }
  void total(const Partials& f, Vec& dP, Vec& dt) const;

  /// Forward sensitivities du/dz for geometry directions (columns of G,
  /// 3N rows) or thickness directions (N rows).
  Mat direct_shape(const Mat& G) const;
  Mat direct_thickness(const Mat& G) const;

 private:
  std::vector<int> free_;
  int n_ = 0;
  SystemAssembly a_;
  FreeSolver solver_;
};

}  // namespace ffdshell
