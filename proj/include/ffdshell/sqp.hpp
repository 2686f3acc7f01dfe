#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ffdshell/linalg.hpp"

namespace ffdshell {

/// Convex QP  min 1/2 d^T B d + g^T d  s.t.  A d = b,  lo <= d <= hi
/// with B symmetric positive definite.
struct QpResult {
  Vec d;
  Vec lambda;  // equality multipliers, B d + g = A^T lambda + bound terms
  bool ok = false;
  int iterations = 0;
};

/// Dual active-set method (Goldfarb-Idnani). Starts from the unconstrained
/// minimizer, so no feasible starting point is needed.
QpResult solve_qp(const Mat& B, const Vec& g, const Mat& A, const Vec& b, const Vec& lo, const Vec& hi);

/// Smooth NLP  min f(x)  s.t.  c(x) = 0,  lb <= x <= ub.
struct NlpEval {
  double f = 0.0;
  Vec g;  // df/dx
  Vec c;  // equality constraint values
  Mat J;  // dc/dx
};

struct NlpProblem {
  int n = 0;
  int m_eq = 0;
  Vec lb, ub;
  /// Returns false when the point cannot be evaluated (e.g. the analysis
  /// did not converge); the optimizer then treats the merit as infinite.
  std::function<bool(const Vec& x, NlpEval& out)> evaluate;
};

struct OptimizerOptions {
  double tol = 1e-8;         // KKT residual and step tolerance
  double ctol = 1e-8;        // constraint violation tolerance
  double ftol = 0.0;         // stop on relative objective change of an accepted step (0: off)
  int max_iter = 100;
  double init_step = 0.1;    // length of the first step (B0 = |g0| / init_step I)
  double armijo = 1e-4;
  double min_alpha = 1e-8;
  std::function<void(int iter, const Vec& x, const NlpEval& e)> callback;
};

struct OptIteration {
  int iter = 0;
  double f = 0.0;
  double cviol = 0.0;
  double kkt = 0.0;
  double step = 0.0;
  double alpha = 0.0;
  int evaluations = 0;
};

struct OptResult {
  Vec x;
  NlpEval eval;
  Vec lambda;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::string message;
  std::vector<OptIteration> history;
};

/// Adapter interface so problem definitions do not depend on the algorithm.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual OptResult minimize(const NlpProblem& p, const Vec& x0) const = 0;
};

/// SQP with damped BFGS Hessian of the Lagrangian and an l1 merit
/// backtracking line search.
class SqpOptimizer : public Optimizer {
 public:
  explicit SqpOptimizer(OptimizerOptions opt = {}) : opt_(std::move(opt)) {}
  OptResult minimize(const NlpProblem& p, const Vec& x0) const override;
  const OptimizerOptions& options() const { return opt_; }

 private:
  OptimizerOptions opt_;
};

}  // namespace ffdshell
