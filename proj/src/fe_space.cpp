#include "ffdshell/fe_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ffdshell/errors.hpp"

namespace ffdshell {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one point");
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map from [-1, 1] to [0, 1].
    rule.x[n - 1 - i] = 0.5 * (x + 1.0);
    rule.w[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

Side parse_side(const std::string& s) {
  if (s == "u0") return Side::u0;
  if (s == "u1") return Side::u1;
  if (s == "v0") return Side::v0;
  if (s == "v1") return Side::v1;
  throw ValidationError("unknown patch side '" + s + "' (expected u0, u1, v0 or v1)");
}

std::string to_string(Side s) {
  switch (s) {
    case Side::u0: return "u0";
    case Side::u1: return "u1";
    case Side::v0: return "v0";
    case Side::v1: return "v1";
  }
  return "?";
}

std::vector<double> lagrange_nodes_1d(const KnotVector& kv, int p) {
  if (p < 1) throw ValidationError("Lagrange space degree must be at least 1");
  const auto b = kv.breaks();
  std::vector<double> nodes{b.front()};
  for (std::size_t e = 0; e + 1 < b.size(); ++e)
    for (int k = 1; k <= p; ++k) nodes.push_back(k == p ? b[e + 1] : b[e] + (b[e + 1] - b[e]) * k / p);
  return nodes;
}

std::vector<Vec2> lagrange_nodes(const KnotVector& ku, const KnotVector& kv, int pu, int pv) {
  const auto nu = lagrange_nodes_1d(ku, pu);
  const auto nv = lagrange_nodes_1d(kv, pv);
  std::vector<Vec2> out;
  out.reserve(nu.size() * nv.size());
  for (double u : nu)
    for (double v : nv) out.emplace_back(u, v);
  return out;
}

void lagrange_1d(int p, double a, double b, double x, std::array<std::vector<double>, 3>& out) {
  std::vector<double> nodes(p + 1);
  for (int k = 0; k <= p; ++k) nodes[k] = a + (b - a) * k / p;
  for (auto& o : out) o.assign(p + 1, 0.0);
  for (int j = 0; j <= p; ++j) {
    double denom = 1.0;
    for (int m = 0; m <= p; ++m)
      if (m != j) denom *= nodes[j] - nodes[m];
    double val = 1.0, d1 = 0.0, d2 = 0.0;
    for (int m = 0; m <= p; ++m) {
      if (m == j) continue;
      val *= x - nodes[m];
      double t1 = 1.0;
      for (int l = 0; l <= p; ++l)
        if (l != j && l != m) t1 *= x - nodes[l];
      d1 += t1;
      for (int l = 0; l <= p; ++l) {
        if (l == j || l == m) continue;
        double t2 = 1.0;
        for (int r = 0; r <= p; ++r)
          if (r != j && r != m && r != l) t2 *= x - nodes[r];
        d2 += t2;
      }
    }
    out[0][j] = val / denom;
    out[1][j] = d1 / denom;
    out[2][j] = d2 / denom;
  }
}

FeSpace::FeSpace(const KnotVector& ku, const KnotVector& kv)
    : pu_(ku.degree()), pv_(kv.degree()), breaks_u_(ku.breaks()), breaks_v_(kv.breaks()) {
  nodes_u_ = lagrange_nodes_1d(ku, pu_);
  nodes_v_ = lagrange_nodes_1d(kv, pv_);
}

std::vector<Vec2> FeSpace::node_coords() const {
  std::vector<Vec2> out;
  out.reserve(num_nodes());
  for (double u : nodes_u_)
    for (double v : nodes_v_) out.emplace_back(u, v);
  return out;
}

void FeSpace::set_nodal_weights(std::vector<double> w) {
  if (static_cast<int>(w.size()) != num_nodes()) throw ValidationError("FE nodal weight count mismatch");
  if (std::all_of(w.begin(), w.end(), [](double x) { return std::abs(x - 1.0) < 1e-15; }))
    weights_.clear();
  else
    weights_ = std::move(w);
}

namespace {
int locate(const std::vector<double>& breaks, double u) {
  if (u < breaks.front() || u > breaks.back()) throw DomainError("parameter outside patch domain");
  const int ne = static_cast<int>(breaks.size()) - 1;
  const int e = static_cast<int>(std::upper_bound(breaks.begin(), breaks.end(), u) - breaks.begin()) - 1;
  return std::clamp(e, 0, ne - 1);
}
}  // namespace

int FeSpace::element_u(double u) const { return locate(breaks_u_, u); }
int FeSpace::element_v(double v) const { return locate(breaks_v_, v); }

SurfaceBasis FeSpace::element_basis(int eu, int ev, double u, double v) const {
  std::array<std::vector<double>, 3> lu, lv;
  lagrange_1d(pu_, breaks_u_[eu], breaks_u_[eu + 1], u, lu);
  lagrange_1d(pv_, breaks_v_[ev], breaks_v_[ev + 1], v, lv);
  static constexpr int du_ord[6] = {0, 1, 0, 2, 1, 0};
  static constexpr int dv_ord[6] = {0, 0, 1, 0, 1, 2};
  const int n = (pu_ + 1) * (pv_ + 1);
  SurfaceBasis out;
  out.index.resize(n);
  for (auto& s : out.d) s.resize(n);
  int k = 0;
  for (int a = 0; a <= pu_; ++a)
    for (int b = 0; b <= pv_; ++b, ++k) {
      out.index[k] = node_index(eu * pu_ + a, ev * pv_ + b);
      for (int s = 0; s < 6; ++s) out.d[s][k] = lu[du_ord[s]][a] * lv[dv_ord[s]][b];
    }
  if (rational()) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = weights_[out.index[i]];
    rationalize(out, w);
  }
  return out;
}

SurfaceBasis FeSpace::basis(double u, double v) const { return element_basis(element_u(u), element_v(v), u, v); }

std::vector<Element> FeSpace::area_elements(int nq) const {
  const GaussRule g = gauss_legendre(nq);
  std::vector<Element> out;
  for (int eu = 0; eu < num_elements_u(); ++eu)
    for (int ev = 0; ev < num_elements_v(); ++ev) {
      Element el;
      el.eu = eu;
      el.ev = ev;
      const double u0 = breaks_u_[eu], du = breaks_u_[eu + 1] - u0;
      const double v0 = breaks_v_[ev], dv = breaks_v_[ev + 1] - v0;
      for (int a = 0; a < nq; ++a)
        for (int b = 0; b < nq; ++b) {
          const Vec2 xi(u0 + du * g.x[a], v0 + dv * g.x[b]);
          SurfaceBasis sb = element_basis(eu, ev, xi[0], xi[1]);
          if (el.nodes.empty()) el.nodes = sb.index;
          el.xi.push_back(xi);
          el.weight.push_back(g.w[a] * g.w[b] * du * dv);
          el.phi.push_back(std::move(sb.d));
        }
      out.push_back(std::move(el));
    }
  return out;
}

std::vector<Element> FeSpace::edge_elements(Side side, int nq) const {
  const GaussRule g = gauss_legendre(nq);
  const bool along_v = side == Side::u0 || side == Side::u1;
  const auto& br = along_v ? breaks_v_ : breaks_u_;
  const double fixed = side == Side::u0   ? breaks_u_.front()
                       : side == Side::u1 ? breaks_u_.back()
                       : side == Side::v0 ? breaks_v_.front()
                                          : breaks_v_.back();
  const int efixed = along_v ? element_u(fixed) : element_v(fixed);
  std::vector<Element> out;
  for (std::size_t e = 0; e + 1 < br.size(); ++e) {
    Element el;
    el.eu = along_v ? efixed : static_cast<int>(e);
    el.ev = along_v ? static_cast<int>(e) : efixed;
    const double s0 = br[e], ds = br[e + 1] - s0;
    for (int a = 0; a < nq; ++a) {
      const double s = s0 + ds * g.x[a];
      const Vec2 xi = along_v ? Vec2(fixed, s) : Vec2(s, fixed);
      SurfaceBasis sb = element_basis(el.eu, el.ev, xi[0], xi[1]);
      if (el.nodes.empty()) el.nodes = sb.index;
      el.xi.push_back(xi);
      el.weight.push_back(g.w[a] * ds);
      el.phi.push_back(std::move(sb.d));
    }
    out.push_back(std::move(el));
  }
  return out;
}

}  // namespace ffdshell
