#include "ffdshell/problem.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "ffdshell/errors.hpp"

namespace ffdshell {

DesignMode parse_design_mode(const std::string& s) {
  if (s == "shape") return DesignMode::Shape;
  if (s == "thickness") return DesignMode::Thickness;
  if (s == "both") return DesignMode::Both;
  throw ValidationError("unknown design mode '" + s + "' (expected shape, thickness or both)");
}

std::string to_string(DesignMode m) {
  switch (m) {
    case DesignMode::Shape: return "shape";
    case DesignMode::Thickness: return "thickness";
    case DesignMode::Both: return "both";
  }
  return "";
}

namespace {

// Unweighted and c_I-weighted  int A^{ab} phi_i,a phi_j,b dA  on control
// points, using the baseline metric.
void regularization_matrices(const CoupledSystem& sys, SpMat& unit, SpMat& weighted) {
  const int N = sys.num_cps();
  TripletList tu, tw;
  const Material& m = sys.material();
  for (int p = 0; p < sys.num_patches(); ++p) {
    const Vec X = sys.patch_nodes(p, sys.geometry());
    const SpMat& M = sys.extraction(p).M;
    const int nfe = static_cast<int>(M.rows());
    TripletList tl;
    double area = 0.0;
    const auto& elems = sys.elements(p);
    for (const Element& e : elems) {
      for (std::size_t q = 0; q < e.weight.size(); ++q) {
        Vec3 A1 = Vec3::Zero(), A2 = Vec3::Zero();
        for (std::size_t a = 0; a < e.nodes.size(); ++a) {
          A1 += e.phi[q][1][a] * X.segment<3>(3 * e.nodes[a]);
          A2 += e.phi[q][2][a] * X.segment<3>(3 * e.nodes[a]);
        }
        Eigen::Matrix2d G;
        G << A1.dot(A1), A1.dot(A2), A1.dot(A2), A2.dot(A2);
        const Eigen::Matrix2d Gi = G.inverse();
        const double dA = e.weight[q] * A1.cross(A2).norm();
        area += dA;
        for (std::size_t a = 0; a < e.nodes.size(); ++a) {
          const Eigen::Vector2d da(e.phi[q][1][a], e.phi[q][2][a]);
          for (std::size_t b = 0; b < e.nodes.size(); ++b) {
            const Eigen::Vector2d db(e.phi[q][1][b], e.phi[q][2][b]);
            tl.emplace_back(e.nodes[a], e.nodes[b], dA * da.dot(Gi * db));
          }
        }
      }
    }
    SpMat Kfe(nfe, nfe);
    Kfe.setFromTriplets(tl.begin(), tl.end());
    const SpMat K = M.transpose() * Kfe * M;
    double tmean = 0.0;
    for (int k = 0; k < M.cols(); ++k) tmean += sys.thickness()[sys.cp_offset(p) + k];
    tmean /= static_cast<double>(M.cols());
    const double hA = area / static_cast<double>(elems.size());
    const double c = m.E * tmean * tmean * tmean / (12.0 * hA * (1.0 - m.nu * m.nu));
    const int o = sys.cp_offset(p);
    for (int k = 0; k < K.outerSize(); ++k)
      for (SpMat::InnerIterator it(K, k); it; ++it) {
        tu.emplace_back(o + it.row(), o + it.col(), it.value());
        tw.emplace_back(o + it.row(), o + it.col(), c * it.value());
      }
  }
  unit.resize(N, N);
  unit.setFromTriplets(tu.begin(), tu.end());
  weighted.resize(N, N);
  weighted.setFromTriplets(tw.begin(), tw.end());
}

}  // namespace

OptProblem::OptProblem(CoupledSystem& sys, const DesignSpace& design, ProblemOptions opt)
    : sys_(sys), ds_(design), opt_(std::move(opt)) {
  const bool shape = opt_.mode != DesignMode::Thickness;
  const bool thick = opt_.mode != DesignMode::Shape;
  ns_ = shape ? ds_.num_shape() : 0;
  nt_ = thick ? ds_.num_thickness() : 0;
  if (num_vars() == 0) throw ValidationError("design space has no variables for mode " + to_string(opt_.mode));

  P_base_ = sys_.geometry();
  t_base_ = thick ? ds_.baseline_thickness() : sys_.thickness();
  sys_.set_geometry(P_base_);
  sys_.set_thickness(t_base_);
  if (t_base_.minCoeff() <= 0.0) throw ValidationError("baseline thickness must be positive");

  scale_.resize(num_vars());
  lb_.resize(num_vars());
  ub_.resize(num_vars());
  if (shape) {
    Vec ext_lo, ext_hi, ql, qu;
    ds_.shape_bounds(1.0, ext_lo, ext_hi);
    ds_.shape_bounds(opt_.shape_bound_fraction, ql, qu);
    for (int i = 0; i < ns_; ++i) {
      scale_[i] = ext_hi[i];
      lb_[i] = ql[i] / scale_[i];
      ub_[i] = qu[i] / scale_[i];
    }
  }
  if (thick) {
    const double tmean = t_base_.mean();
    const double lo = opt_.thickness_min > 0.0 ? opt_.thickness_min : 0.1 * tmean;
    const double hi = opt_.thickness_max > 0.0 ? opt_.thickness_max : 5.0 * tmean;
    Vec ql, qu;
    ds_.thickness_bounds(lo, hi, ql, qu);
    for (int i = 0; i < nt_; ++i) {
      scale_[ns_ + i] = tmean;
      lb_[ns_ + i] = ql[i] / tmean;
      ub_[ns_ + i] = qu[i] / tmean;
    }
  }

  regularization_matrices(sys_, Kreg_unit_, Kreg_);

  if (!solve_state()) throw SolverError("baseline analysis did not converge");
  u_base_ = u_;
  W0_ = sys_.internal_energy(u_);
  V0_ = sys_.volume(false).value;
  if (!(W0_ > 0.0)) throw ValidationError("baseline internal energy is zero; the model is unloaded");
  if (!(V0_ > 0.0)) throw ValidationError("baseline volume must be positive");
}

Vec OptProblem::shape_offsets(const Vec& x) const {
  return x.head(ns_).cwiseProduct(scale_.head(ns_));
}

Vec OptProblem::thickness_offsets(const Vec& x) const {
  return x.tail(nt_).cwiseProduct(scale_.tail(nt_));
}

void OptProblem::apply(const Vec& x) {
  if (x.size() != num_vars()) throw ValidationError("design vector has the wrong length");
  sys_.set_geometry(ns_ ? ds_.geometry(shape_offsets(x)) : P_base_);
  sys_.set_thickness(nt_ ? ds_.thickness(thickness_offsets(x)) : t_base_);
}

bool OptProblem::solve_state() {
  Vec u = u_.size() ? u_ : Vec();
  SolveReport r;
  try {
    r = newton_solve(sys_, u, opt_.newton);
    if (!r.converged && opt_.fallback_load_steps > 1) {
      NewtonOptions o = opt_.newton;
      o.load_steps = opt_.fallback_load_steps;
      u = Vec();
      r = newton_solve(sys_, u, o);
    }
  } catch (const Error&) {
    return false;
  }
  last_newton_iterations_ = r.iterations;
  if (!r.converged) return false;
  u_ = u;
  return true;
}

double OptProblem::shape_gradient_seminorm(const Vec& P, bool weighted, Vec* grad) const {
  const SpMat& K = weighted ? Kreg_ : Kreg_unit_;
  Vec d(sys_.num_cps());
  for (int k = 0; k < d.size(); ++k) d[k] = P[3 * k + opt_.reg_component] - P_base_[3 * k + opt_.reg_component];
  const Vec Kd = K * d;
  if (grad) {
    *grad = Vec::Zero(P.size());
    for (int k = 0; k < d.size(); ++k) (*grad)[3 * k + opt_.reg_component] = 2.0 * Kd[k];
  }
  return d.dot(Kd);
}

bool OptProblem::evaluate(const Vec& x, NlpEval& out) {
  EvalRecord rec;
  rec.index = static_cast<int>(history_.size());
  const Vec u_prev = u_;
  try {
    apply(x);
  } catch (const Error&) {
    history_.push_back(rec);
    return false;
  }
  const bool solved = solve_state();
  rec.newton_iterations = last_newton_iterations_;
  if (!solved) {
    u_ = u_prev;
    history_.push_back(rec);
    return false;
  }
  AdjointSolver adj(sys_, u_);
  const Partials fp = internal_energy_partials(adj.assembly());
  Vec gP, gt;
  adj.total(fp, gP, gt);

  double reg = 0.0;
  if (opt_.reg_lambda > 0.0 && ns_) {
    Vec greg;
    reg = opt_.reg_lambda * shape_gradient_seminorm(sys_.geometry(), true, &greg);
    gP += opt_.reg_lambda * greg;
  }

  out.f = (fp.value + reg) / W0_;
  out.g.resize(num_vars());
  if (ns_) out.g.head(ns_) = (ds_.shape_jacobian().transpose() * gP).cwiseProduct(scale_.head(ns_)) / W0_;
  if (nt_) out.g.tail(nt_) = (ds_.thickness_jacobian().transpose() * gt).cwiseProduct(scale_.tail(nt_)) / W0_;

  const CoupledSystem::Volume v = sys_.volume(true);
  if (opt_.volume_constraint) {
    out.c = Vec::Constant(1, (v.value - V0_) / V0_);
    out.J.resize(1, num_vars());
    if (ns_)
      out.J.row(0).head(ns_) = (ds_.shape_jacobian().transpose() * v.dP).cwiseProduct(scale_.head(ns_)) / V0_;
    if (nt_)
      out.J.row(0).tail(nt_) = (ds_.thickness_jacobian().transpose() * v.dt).cwiseProduct(scale_.tail(nt_)) / V0_;
  } else {
    out.c.resize(0);
    out.J.resize(0, num_vars());
  }

  rec.objective = out.f;
  rec.W_int = fp.value;
  rec.regularization = reg;
  rec.volume = v.value;
  rec.grad_norm = out.g.norm();
  rec.ok = true;
  history_.push_back(rec);
  return true;
}

NlpProblem OptProblem::nlp() {
  NlpProblem p;
  p.n = num_vars();
  p.m_eq = opt_.volume_constraint ? 1 : 0;
  p.lb = lb_;
  p.ub = ub_;
  p.evaluate = [this](const Vec& x, NlpEval& e) { return evaluate(x, e); };
  return p;
}

void OptProblem::write_history_csv(std::ostream& os) const {
  os << "evaluation,ok,objective,W_int,regularization,volume,grad_norm,newton_iterations\n";
  os << std::setprecision(12);
  for (const EvalRecord& r : history_)
    os << r.index << ',' << (r.ok ? 1 : 0) << ',' << r.objective << ',' << r.W_int << ',' << r.regularization << ','
       << r.volume << ',' << r.grad_norm << ',' << r.newton_iterations << '\n';
}

OptProblem::GradientCheck OptProblem::gradient_check(const Vec& x, int directions, double h, unsigned seed) {
  GradientCheck out;
  NlpEval e0;
  if (!evaluate(x, e0)) throw SolverError("gradient check: analysis failed at the base point");
  const Vec u0 = u_;
  std::mt19937 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < directions; ++k) {
    Vec d(num_vars());
    for (int i = 0; i < d.size(); ++i) d[i] = N(rng);
    d /= d.norm();
    NlpEval ep, em;
    u_ = u0;
    if (!evaluate(x + h * d, ep)) throw SolverError("gradient check: analysis failed");
    u_ = u0;
    if (!evaluate(x - h * d, em)) throw SolverError("gradient check: analysis failed");
    const double fd = (ep.f - em.f) / (2 * h);
    const double an = e0.g.dot(d);
    out.objective = std::max(out.objective, std::abs(fd - an) / std::max(e0.g.norm(), 1e-300));
    if (opt_.volume_constraint) {
      const double fdv = (ep.c[0] - em.c[0]) / (2 * h);
      const double anv = e0.J.row(0).dot(d);
      out.volume = std::max(out.volume, std::abs(fdv - anv) / std::max(e0.J.row(0).norm(), 1e-300));
    }
  }
  u_ = u0;
  apply(x);
  return out;
}

OptimizationOutcome run_optimization(OptProblem& problem, const Optimizer& optimizer) {
  OptimizationOutcome o;
  o.result = optimizer.minimize(problem.nlp(), Vec::Zero(problem.num_vars()));
  o.x = o.result.x;
  NlpEval e;
  if (!problem.evaluate(o.x, e)) throw SolverError("final design could not be analyzed");
  o.W_int = problem.history().back().W_int;
  o.reduction = 1.0 - o.W_int / problem.baseline_energy();
  o.volume_error = std::abs(problem.history().back().volume - problem.baseline_volume()) / problem.baseline_volume();
  o.gaps = intersection_gaps(problem.system());
  return o;
}

}  // namespace ffdshell
