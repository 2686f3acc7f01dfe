#include "ffdshell/sensitivity.hpp"

#include "ffdshell/errors.hpp"

namespace ffdshell {

Partials internal_energy_partials(const SystemAssembly& a) {
  if (a.dWint_du.size() == 0) throw ValidationError("internal energy partials need a geometry assembly");
  return {a.W_int, a.dWint_du, a.dWint_dP, a.dWint_dt};
}

AdjointSolver::AdjointSolver(const CoupledSystem& sys, const Vec& u)
    : free_(sys.free_dofs()),
      n_(sys.num_dofs()),
      a_(sys.assemble(u, kEnergy | kResidual | kTangent | kGeometry)),
      solver_(a_.K, free_) {}

void AdjointSolver::total(const Partials& f, Vec& dP, Vec& dt) const {
  dP = f.dP.size() ? f.dP : Vec::Zero(n_);
  dt = f.dt.size() ? f.dt : Vec::Zero(a_.dR_dt.cols());
  if (f.du.size() == 0) return;
  const Vec lambda = prolong_from(solver_.solve_transpose(restrict_to(f.du, free_)), free_, n_);
  dP -= a_.dR_dP.transpose() * lambda;
  dt -= a_.dR_dt.transpose() * lambda;
}

namespace {
Mat direct(const FreeSolver& solver, const SpMat& dR, const Mat& G, const std::vector<int>& free, int n) {
  Mat out(n, G.cols());
  for (int j = 0; j < G.cols(); ++j) {
    const Vec rhs = -(dR * G.col(j));
    out.col(j) = prolong_from(solver.solve(restrict_to(rhs, free)), free, n);
  }
  return out;
}
}  // namespace

Mat AdjointSolver::direct_shape(const Mat& G) const { return direct(solver_, a_.dR_dP, G, free_, n_); }

Mat AdjointSolver::direct_thickness(const Mat& G) const { return direct(solver_, a_.dR_dt, G, free_, n_); }

}  // namespace ffdshell
