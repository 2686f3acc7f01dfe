#pragma once

#include <array>
#include <string>
#include <vector>

#include "ffdshell/coupling.hpp"
#include "ffdshell/extraction.hpp"
#include "ffdshell/shell.hpp"

namespace ffdshell {

/// Zero-displacement constraint on the control points next to a side.
/// Pin fixes the boundary row, Clamp also fixes the adjacent row.
struct BoundarySpec {
  enum class Style { Pin, Clamp };
  int patch = 0;
  Side side = Side::u0;
  std::array<bool, 3> components{true, true, true};
  Style style = Style::Clamp;
};

/// Complete analysis model definition.
struct SystemSpec {
  std::vector<NurbsPatch> patches;
  std::vector<IntersectionSpec> intersections;
  Material material;
  std::vector<LoadSpec> loads;
  std::vector<BoundarySpec> boundary;
  double alpha = 1e3;
  bool load_geometry_partials = true;  // include dW_ext/dP in shape sensitivities
};

struct NewtonOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double step_tol = 1e-10;  // relative Newton increment that also counts as converged
  double stall_step_tol = 1e-6;  // relative increment below which a stalled residual counts as converged
  int max_iter = 30;
  int load_steps = 1;
  int divergence_window = 5;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> history;
  bool converged = false;
  int load_steps = 1;
  std::string message;
};

/// Global quantities on spline coefficients of all patches. Displacement,
/// geometry and residual vectors have 3 entries per control point
/// (3 * (offset + cp) + c); thickness vectors one per control point.
struct SystemAssembly {
  double W_int = 0.0;  // shell strain energy
  double W_pen = 0.0;  // penalty energy
  double W_ext = 0.0;  // work of the loads on the displacement
  Vec R;               // d(W_int + W_pen - W_ext)/du
  SpMat K;             // dR/du
  SpMat dR_dP;         // dR/dP at fixed u
  SpMat dR_dt;         // dR/dt
  Vec dWint_du;        // dW_int/du (shell energy only)
  Vec dWint_dP;        // dW_int/dP at fixed u
  Vec dWint_dt;        // dW_int/dt
};

class CoupledSystem {
 public:
  explicit CoupledSystem(SystemSpec spec);

  const SystemSpec& spec() const { return spec_; }
  int num_patches() const { return static_cast<int>(spec_.patches.size()); }
  int num_cps() const { return num_cps_; }
  int num_dofs() const { return 3 * num_cps_; }
  int cp_offset(int patch) const { return offsets_[patch]; }
  const ExtractionMap& extraction(int patch) const { return ext_[patch]; }
  const std::vector<Element>& elements(int patch) const { return elems_[patch]; }
  const std::vector<IntersectionCoupling>& couplings() const { return couplings_; }
  const Material& material() const { return spec_.material; }

  /// Current geometry and thickness coefficients (global layout).
  const Vec& geometry() const { return P_; }
  const Vec& thickness() const { return t_; }
  void set_geometry(const Vec& P);
  void set_thickness(const Vec& t);
  /// Patch with the current control points and thickness.
  NurbsPatch current_patch(int patch) const;

  void set_load_factor(double f) { load_factor_ = f; }
  double load_factor() const { return load_factor_; }

  const std::vector<int>& free_dofs() const { return free_; }
  const std::vector<int>& fixed_dofs() const { return fixed_; }

  SystemAssembly assemble(const Vec& u, unsigned flags) const;

  double internal_energy(const Vec& u) const;

  struct Volume {
    double value = 0.0;
    double area = 0.0;
    Vec dP;  // 3N
    Vec dt;  // N
  };
  Volume volume(bool gradients) const;

  /// Global operators mapping spline coefficients to penalty node inputs.
  const SpMat& coupling_operator() const { return C_; }
  const SpMat& coupling_thickness_operator() const { return Ct_; }

  /// FE nodal reference positions / displacements of one patch.
  Vec patch_nodes(int patch, const Vec& global3) const;

 private:
  void build_dirichlet();
  void build_coupling_operators();
  Vec patch_slice3(int patch, const Vec& global3) const;
  Vec patch_slice1(int patch, const Vec& global1) const;

  SystemSpec spec_;
  std::vector<int> offsets_;
  int num_cps_ = 0;
  std::vector<ExtractionMap> ext_;
  std::vector<SpMat> E3_;  // M expanded to 3 components
  std::vector<std::vector<Element>> elems_;
  std::vector<std::vector<std::vector<Element>>> edge_elems_;  // [patch][side]
  std::vector<IntersectionCoupling> couplings_;
  std::vector<int> coupling_row_;  // first node row of each coupling
  SpMat C_, Ct_;
  Vec P_, t_;
  std::vector<int> free_, fixed_;
  double load_factor_ = 1.0;
};

/// Newton-Raphson on the free DoFs. `u` holds the start value (warm start)
/// and receives the final iterate.
SolveReport newton_solve(CoupledSystem& sys, Vec& u, const NewtonOptions& opt = {});

/// Sparse LU on the free-DoF block with a residual check that flags
/// singular (under-constrained) systems.
class FreeSolver {
 public:
  FreeSolver(const SpMat& K, const std::vector<int>& free);
  Vec solve(const Vec& rhs_free) const;
  Vec solve_transpose(const Vec& rhs_free) const;

 private:
  SpMat Kf_;
  mutable Eigen::SparseLU<SpMat> lu_;  // transpose() is non-const in Eigen
};

/// Displacement field of one patch at (s, t), interpolated with the patch
/// basis from the global coefficient vector u.
Vec3 eval_displacement(const CoupledSystem& sys, const Vec& u, int patch, double s, double t);

/// Restriction/prolongation between full and free DoF vectors.
Vec restrict_to(const Vec& full, const std::vector<int>& idx);
Vec prolong_from(const Vec& part, const std::vector<int>& idx, int n);
SpMat restrict_matrix(const SpMat& A, const std::vector<int>& rows, const std::vector<int>& cols);

}  // namespace ffdshell
