#include "ffdshell/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ffdshell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraint rows of the QP: equalities first, then one row per finite
// bound written as n^T d >= rhs.
struct QpRows {
  const Mat& A;
  const Vec& b;
  std::vector<int> var;    // bound rows: variable index
  std::vector<int> sign;   // +1 lower bound, -1 upper bound
  std::vector<double> rhs;

  int num_eq() const { return static_cast<int>(A.rows()); }
  int size() const { return num_eq() + static_cast<int>(var.size()); }
  bool is_eq(int id) const { return id < num_eq(); }

  Vec normal(int id, int n) const {
    if (is_eq(id)) return A.row(id).transpose();
    Vec e = Vec::Zero(n);
    e[var[id - num_eq()]] = sign[id - num_eq()];
    return e;
  }
  double right(int id) const { return is_eq(id) ? b[id] : rhs[id - num_eq()]; }
  double slack(int id, const Vec& x) const {
    if (is_eq(id)) return A.row(id).dot(x) - b[id];
    const int k = id - num_eq();
    return sign[k] * x[var[k]] - rhs[k];
  }
};

}  // namespace

QpResult solve_qp(const Mat& B, const Vec& g, const Mat& A, const Vec& b, const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(g.size());
  QpResult res;
  Eigen::LLT<Mat> llt(B);
  if (llt.info() != Eigen::Success) return res;

  QpRows rows{A, b, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lo[i])) rows.var.push_back(i), rows.sign.push_back(1), rows.rhs.push_back(lo[i]);
    if (std::isfinite(hi[i])) rows.var.push_back(i), rows.sign.push_back(-1), rows.rhs.push_back(-hi[i]);
  }

  Vec x = -llt.solve(g);
  std::vector<int> active;
  std::vector<double> u;

  // Primal direction z and multiplier change r for adding normal np.
  auto directions = [&](const Vec& np, Vec& z, Vec& r) {
    const Vec Bnp = llt.solve(np);
    if (active.empty()) {
      z = Bnp;
      r.resize(0);
      return;
    }
    Mat N(n, active.size());
    for (std::size_t j = 0; j < active.size(); ++j) N.col(j) = rows.normal(active[j], n);
    const Mat W = llt.solve(N);
    const Mat M = N.transpose() * W;
    r = M.ldlt().solve(W.transpose() * np);
    z = Bnp - W * r;
  };
  auto degenerate = [&](const Vec& z, const Vec& np) {
    return std::abs(z.dot(np)) <= 1e-12 * std::max(1.0, np.dot(llt.solve(np)));
  };
  auto drop = [&](int k) {
    active.erase(active.begin() + k);
    u.erase(u.begin() + k);
  };

  for (int e = 0; e < rows.num_eq(); ++e) {
    const Vec np = rows.normal(e, n);
    Vec z, r;
    directions(np, z, r);
    const double s = rows.slack(e, x);
    if (degenerate(z, np)) {
      if (std::abs(s) <= 1e-10 * std::max(1.0, std::abs(rows.right(e)))) continue;  // dependent but consistent
      return res;
    }
    const double t = -s / z.dot(np);
    x += t * z;
    for (std::size_t j = 0; j < active.size(); ++j) u[j] -= t * r[j];
    active.push_back(e);
    u.push_back(t);
  }

  const int max_iter = 10 * (n + rows.size()) + 10;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    int p = -1;
    double worst = 0.0;
    for (int id = rows.num_eq(); id < rows.size(); ++id) {
      const double s = rows.slack(id, x);
      if (s < -1e-12 * std::max(1.0, std::abs(rows.right(id))) && s < worst) worst = s, p = id;
    }
    if (p < 0) {
      res.ok = true;
      break;
    }
    const Vec np = rows.normal(p, n);
    double up = 0.0;
    for (int inner = 0; inner < max_iter; ++inner) {
      Vec z, r;
      directions(np, z, r);
      double t1 = kInf;
      int k = -1;
      for (std::size_t j = 0; j < active.size(); ++j)
        if (!rows.is_eq(active[j]) && r[j] > 0.0 && u[j] / r[j] < t1) t1 = u[j] / r[j], k = static_cast<int>(j);
      const bool dual_only = degenerate(z, np);
      const double t2 = dual_only ? kInf : -rows.slack(p, x) / z.dot(np);
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) return res;  // infeasible
      if (!dual_only) x += t * z;
      for (std::size_t j = 0; j < active.size(); ++j) u[j] -= t * r[j];
      up += t;
      if (t == t2) {
        active.push_back(p);
        u.push_back(up);
        break;
      }
      drop(k);
    }
  }
  if (!res.ok) return res;
  for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
  res.d = x;
  res.lambda = Vec::Zero(rows.num_eq());
  for (std::size_t j = 0; j < active.size(); ++j)
    if (rows.is_eq(active[j])) res.lambda[active[j]] = u[j];
  return res;
}

OptResult SqpOptimizer::minimize(const NlpProblem& p, const Vec& x0) const {
  const int n = p.n;
  OptResult out;
  auto clip = [&](Vec x) {
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], p.lb[i], p.ub[i]);
    return x;
  };
  auto evaluate = [&](const Vec& x, NlpEval& e) {
    ++out.evaluations;
    try {
      if (!p.evaluate(x, e)) return false;
    } catch (const std::exception&) {
      return false;
    }
    return std::isfinite(e.f) && e.g.allFinite() && e.c.allFinite();
  };

  Vec x = clip(x0);
  NlpEval e;
  if (!evaluate(x, e)) {
    out.x = x;
    out.message = "initial point could not be evaluated";
    return out;
  }
  if (p.m_eq == 0) {
    e.c.resize(0);
    e.J.resize(0, n);
  }
  auto initial_hessian = [&] {
    const double gn = e.g.norm();
    return Mat(Mat::Identity(n, n) * (gn > 0.0 ? gn / opt_.init_step : 1.0));
  };
  Mat B = initial_hessian();
  Vec mu = Vec::Zero(p.m_eq);
  Vec lambda = Vec::Zero(p.m_eq);
  bool fresh_B = true;
  bool first_update = true;

  for (int it = 0; it < opt_.max_iter; ++it) {
    out.iterations = it;
    if (opt_.callback) opt_.callback(it, x, e);

    QpResult qp = solve_qp(B, e.g, e.J, -e.c, p.lb - x, p.ub - x);
    double relax = 1.0;
    for (int k = 0; k < 10 && !qp.ok; ++k) {
      relax *= 0.5;
      qp = solve_qp(B, e.g, e.J, -relax * e.c, p.lb - x, p.ub - x);
    }
    if (!qp.ok) {
      out.message = "QP subproblem infeasible";
      break;
    }
    const Vec& d = qp.d;
    lambda = qp.lambda;
    const double cviol = p.m_eq ? e.c.cwiseAbs().maxCoeff() : 0.0;
    const double kkt = (B * d).cwiseAbs().maxCoeff();
    const double dn = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    OptIteration rec{it, e.f, cviol, kkt, dn, 0.0, out.evaluations};

    if (cviol <= opt_.ctol && (kkt <= opt_.tol || dn <= opt_.tol)) {
      out.history.push_back(rec);
      out.converged = true;
      out.message = "KKT conditions satisfied";
      break;
    }

    for (int i = 0; i < p.m_eq; ++i) mu[i] = std::max(std::abs(lambda[i]), 0.5 * (mu[i] + std::abs(lambda[i])));
    const double phi0 = e.f + mu.dot(e.c.cwiseAbs());
    const double slope = e.g.dot(d) - relax * mu.dot(e.c.cwiseAbs());
    if (slope >= 0.0 && !fresh_B) {
      B = initial_hessian();
      fresh_B = true;
      out.history.push_back(rec);
      continue;
    }

    double alpha = 1.0;
    NlpEval et;
    Vec xt;
    bool accepted = false;
    while (alpha >= opt_.min_alpha) {
      xt = clip(x + alpha * d);
      if (evaluate(xt, et)) {
        if (p.m_eq == 0) et.c.resize(0), et.J.resize(0, n);
        const double phit = et.f + mu.dot(et.c.cwiseAbs());
        if (phit <= phi0 + opt_.armijo * alpha * std::min(slope, 0.0)) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    rec.alpha = accepted ? alpha : 0.0;
    out.history.push_back(rec);
    if (!accepted) {
      if (!fresh_B) {
        B = initial_hessian();
        fresh_B = true;
        continue;
      }
      out.message = "line search failed";
      break;
    }

    const double f_prev = e.f;
    const Vec s = xt - x;
    Vec y = et.g - e.g;
    if (p.m_eq) y -= (et.J - e.J).transpose() * lambda;
    x = xt;
    e = std::move(et);
    fresh_B = false;

    const double sy = s.dot(y);
    if (first_update && sy > 0.0) {
      B = Mat::Identity(n, n) * (y.squaredNorm() / sy);
      first_update = false;
    }
    const Vec Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs > 0.0) {
      double theta = 1.0;
      if (sy < 0.2 * sBs) theta = 0.8 * sBs / (sBs - sy);
      const Vec r = theta * y + (1.0 - theta) * Bs;
      B += r * r.transpose() / s.dot(r) - Bs * Bs.transpose() / sBs;
    }

    if (s.cwiseAbs().maxCoeff() <= opt_.tol * std::max(1.0, x.cwiseAbs().maxCoeff()) &&
        (p.m_eq == 0 || e.c.cwiseAbs().maxCoeff() <= opt_.ctol)) {
      out.converged = true;
      out.message = "step below tolerance";
      out.iterations = it + 1;
      break;
    }
    if (opt_.ftol > 0.0 && std::abs(f_prev - e.f) <= opt_.ftol * std::max(1.0, std::abs(e.f)) &&
        (p.m_eq == 0 || e.c.cwiseAbs().maxCoeff() <= opt_.ctol)) {
      out.converged = true;
      out.message = "objective change below tolerance";
      out.iterations = it + 1;
      break;
    }
    if (it + 1 == opt_.max_iter) {
      out.iterations = opt_.max_iter;
      out.message = "maximum iterations reached";
    }
  }
  out.x = x;
  out.eval = e;
  out.lambda = lambda;
  return out;
}

}  // namespace ffdshell
