#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ffdshell/ffd.hpp"
#include "ffdshell/sensitivity.hpp"
#include "ffdshell/sqp.hpp"

namespace ffdshell {

enum class DesignMode { Shape, Thickness, Both };
DesignMode parse_design_mode(const std::string& s);
std::string to_string(DesignMode m);

struct ProblemOptions {
  DesignMode mode = DesignMode::Shape;
  double reg_lambda = 0.0;       // shape-gradient regularization weight
  int reg_component = 2;         // coordinate penalized by the regularization
  bool volume_constraint = true;
  double shape_bound_fraction = 1.0;  // shape offsets within +-fraction of the block extent
  double thickness_min = 0.0;    // absolute bounds; <= 0 selects 0.1 / 5 times the mean baseline
  double thickness_max = 0.0;
  NewtonOptions newton;
  int fallback_load_steps = 8;   // retry from zero with load stepping when the warm start fails
};

/// One objective evaluation.
struct EvalRecord {
  int index = 0;
  double objective = 0.0;  // normalized
  double W_int = 0.0;
  double regularization = 0.0;
  double volume = 0.0;
  double grad_norm = 0.0;
  int newton_iterations = 0;
  bool ok = false;
};

/// Internal-energy minimization over reduced FFD variables. The optimizer
/// sees nondimensional variables x (shape offsets divided by the block
/// extent of their component, thickness offsets divided by the mean
/// baseline thickness), the objective divided by the baseline internal
/// energy and the volume constraint (V - V0) / V0.
class OptProblem {
 public:
  OptProblem(CoupledSystem& sys, const DesignSpace& design, ProblemOptions opt);

  int num_vars() const { return ns_ + nt_; }
  int num_shape_vars() const { return ns_; }
  int num_thickness_vars() const { return nt_; }
  const Vec& lower() const { return lb_; }
  const Vec& upper() const { return ub_; }
  const ProblemOptions& options() const { return opt_; }
  const CoupledSystem& system() const { return sys_; }
  const DesignSpace& design() const { return ds_; }

  double baseline_energy() const { return W0_; }
  double baseline_volume() const { return V0_; }

  /// Design variables in lattice units for scaled x.
  Vec shape_offsets(const Vec& x) const;
  Vec thickness_offsets(const Vec& x) const;

  /// Sets geometry and thickness of the system for x.
  void apply(const Vec& x);

  /// Objective, gradient and volume constraint. Returns false when the
  /// analysis did not converge.
  bool evaluate(const Vec& x, NlpEval& out);
  NlpProblem nlp();

  /// Regularization  sum_I c_I int |grad(P_c - P0_c)|^2 dS  (c_I = 1 when
  /// `weighted` is false) and its gradient wrt the global geometry.
  double shape_gradient_seminorm(const Vec& P, bool weighted, Vec* grad = nullptr) const;

  const Vec& state() const { return u_; }
  const std::vector<EvalRecord>& history() const { return history_; }
  void write_history_csv(std::ostream& os) const;

  /// Central finite differences of objective and constraint along random
  /// unit directions; returns the largest errors relative to the gradient
  /// norm (robust to directions where the derivative cancels).
  struct GradientCheck {
    double objective = 0.0;
    double volume = 0.0;
  };
  GradientCheck gradient_check(const Vec& x, int directions, double h, unsigned seed = 1);

 private:
  bool solve_state();

  CoupledSystem& sys_;
  const DesignSpace& ds_;
  ProblemOptions opt_;
  int ns_ = 0, nt_ = 0;
  Vec scale_;  // x -> q per variable
  Vec lb_, ub_;
  Vec P_base_, t_base_;
  SpMat Kreg_;       // c_I-weighted regularization stiffness on control points
  SpMat Kreg_unit_;  // unweighted
  double W0_ = 0.0, V0_ = 0.0;
  Vec u_, u_base_;
  std::vector<EvalRecord> history_;
  int last_newton_iterations_ = 0;
};

struct OptimizationOutcome {
  OptResult result;
  Vec x;
  double W_int = 0.0;
  double reduction = 0.0;  // 1 - W / W0
  double volume_error = 0.0;
  std::vector<double> gaps;
};

/// Runs the optimizer, re-applies the final design and reports.
OptimizationOutcome run_optimization(OptProblem& problem, const Optimizer& optimizer);

}  // namespace ffdshell
