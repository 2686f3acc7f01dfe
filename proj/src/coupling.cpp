#include "ffdshell/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ffdshell/ad_vec.hpp"
#include "ffdshell/errors.hpp"

namespace ffdshell {

using namespace ad;

namespace {

struct PenaltyConst {
  double h = 1.0;
  Vec2 dxi = Vec2::Zero();
  double alpha = 0.0, E = 1.0, nu = 0.0;
};

constexpr int kPenSize = 38;

template <class S>
S penalty_density(const S* q, const PenaltyConst& c) {
  const V3<S> xA = load3(q, 0), xA1 = load3(q, 3), xA2 = load3(q, 6);
  const V3<S> xB = load3(q, 9), xB1 = load3(q, 12), xB2 = load3(q, 15);
  const V3<S> XA = load3(q, 18), XA1 = load3(q, 21), XA2 = load3(q, 24);
  const V3<S> XB = load3(q, 27), XB1 = load3(q, 30), XB2 = load3(q, 33);
  const S& tA = q[36];
  const S& tB = q[37];

  const V3<S> du = sub(sub(xA, XA), sub(xB, XB));
  const V3<S> a3A = unit(cross(xA1, xA2)), a3B = unit(cross(xB1, xB2));
  const V3<S> A3A = unit(cross(XA1, XA2)), A3B = unit(cross(XB1, XB2));
  const V3<S> at = unit(add(scale(xA1, c.dxi[0]), scale(xA2, c.dxi[1])));
  const V3<S> Atv = add(scale(XA1, c.dxi[0]), scale(XA2, c.dxi[1]));
  const S J = norm(Atv);
  const V3<S> At = scale(Atv, 1.0 / J);
  const V3<S> anA = cross(at, a3A), AnA = cross(At, A3A);

  const S tM = 0.5 * (tA + tB);
  const double k = c.alpha * c.E / (c.h * (1.0 - c.nu * c.nu));
  const S ad = k * tM;
  const S ar = (k / 12.0) * tM * tM * tM;
  const S r1 = dot(a3A, a3B) - dot(A3A, A3B);
  const S r2 = dot(anA, a3B) - dot(AnA, A3B);
  return 0.5 * (ad * dot(du, du) + ar * (r1 * r1 + r2 * r2)) * J;
}

Vec3 surface_point(const NurbsPatch& p, const Vec2& xi) { return eval_surface(p, xi[0], xi[1], 0).x; }

Vec2 clamp_to_domain(const NurbsPatch& p, Vec2 xi) {
  xi[0] = std::clamp(xi[0], p.ku().front(), p.ku().back());
  xi[1] = std::clamp(xi[1], p.kv().front(), p.kv().back());
  return xi;
}

// Dense polyline samples with cumulative physical arclength.
struct ArcSamples {
  std::vector<Vec2> xi;
  std::vector<double> s;
};

ArcSamples sample_arclength(const NurbsPatch& p, const std::vector<Vec2>& curve, int per_segment) {
  ArcSamples out;
  for (std::size_t seg = 0; seg + 1 < curve.size(); ++seg)
    for (int k = (seg == 0 ? 0 : 1); k <= per_segment; ++k) {
      const double r = static_cast<double>(k) / per_segment;
      out.xi.push_back(clamp_to_domain(p, (1.0 - r) * curve[seg] + r * curve[seg + 1]));
    }
  out.s.assign(out.xi.size(), 0.0);
  Vec3 prev = surface_point(p, out.xi[0]);
  for (std::size_t i = 1; i < out.xi.size(); ++i) {
    const Vec3 cur = surface_point(p, out.xi[i]);
    out.s[i] = out.s[i - 1] + (cur - prev).norm();
    prev = cur;
  }
  return out;
}

Vec2 at_arclength(const ArcSamples& a, double s) {
  auto it = std::lower_bound(a.s.begin(), a.s.end(), s);
  if (it == a.s.begin()) return a.xi.front();
  if (it == a.s.end()) return a.xi.back();
  const std::size_t i = it - a.s.begin();
  const double ds = a.s[i] - a.s[i - 1];
  const double r = ds > 0.0 ? (s - a.s[i - 1]) / ds : 0.0;
  return (1.0 - r) * a.xi[i - 1] + r * a.xi[i];
}

int elements_crossed(const FeSpace& fe, const std::vector<Vec2>& samples) {
  std::set<std::pair<int, int>> seen;
  for (const auto& xi : samples) seen.emplace(fe.element_u(xi[0]), fe.element_v(xi[1]));
  return static_cast<int>(seen.size());
}

void transfer_rows(const FeSpace& fe, const std::vector<Vec2>& xi, SpMat& T0, SpMat& T1) {
  TripletList t0, t1;
  for (std::size_t n = 0; n < xi.size(); ++n) {
    const SurfaceBasis b = fe.basis(xi[n][0], xi[n][1]);
    for (int k = 0; k < b.size(); ++k) {
      t0.emplace_back(static_cast<int>(n), b.index[k], b.d[0][k]);
      t1.emplace_back(static_cast<int>(2 * n), b.index[k], b.d[1][k]);
      t1.emplace_back(static_cast<int>(2 * n + 1), b.index[k], b.d[2][k]);
    }
  }
  const int nn = static_cast<int>(xi.size());
  T0.resize(nn, fe.num_nodes());
  T1.resize(2 * nn, fe.num_nodes());
  T0.setFromTriplets(t0.begin(), t0.end());
  T1.setFromTriplets(t1.begin(), t1.end());
}

// Elements whose closure contains x; two when x sits on an interior break.
std::vector<int> adjacent_elements(const std::vector<double>& br, double x) {
  const double tol = 1e-10 * (br.back() - br.front());
  std::vector<int> out;
  for (int e = 0; e + 1 < static_cast<int>(br.size()); ++e)
    if (x >= br[e] - tol && x <= br[e + 1] + tol) out.push_back(e);
  return out;
}

// Element size at a parametric point, averaged over all elements meeting there
// so that nodes on element boundaries do not depend on rounding.
double size_at(const FeSpace& fe, const std::vector<double>& h, const Vec2& xi) {
  double sum = 0.0;
  int count = 0;
  for (int eu : adjacent_elements(fe.breaks_u(), xi[0]))
    for (int ev : adjacent_elements(fe.breaks_v(), xi[1])) {
      sum += h[eu * fe.num_elements_v() + ev];
      ++count;
    }
  return sum / count;
}

}  // namespace

std::vector<double> element_sizes(const NurbsPatch& patch, const FeSpace& fe) {
  std::vector<double> h(fe.num_elements_u() * fe.num_elements_v());
  const GaussRule g = gauss_legendre(std::max(patch.ku().degree(), patch.kv().degree()) + 1);
  for (int eu = 0; eu < fe.num_elements_u(); ++eu)
    for (int ev = 0; ev < fe.num_elements_v(); ++ev) {
      const double u0 = fe.breaks_u()[eu], du = fe.breaks_u()[eu + 1] - u0;
      const double v0 = fe.breaks_v()[ev], dv = fe.breaks_v()[ev + 1] - v0;
      double area = 0.0;
      for (std::size_t a = 0; a < g.x.size(); ++a)
        for (std::size_t b = 0; b < g.x.size(); ++b) {
          const SurfacePoint sp = eval_surface(patch, u0 + du * g.x[a], v0 + dv * g.x[b], 1);
          area += g.w[a] * g.w[b] * du * dv * sp.du.cross(sp.dv).norm();
        }
      h[eu * fe.num_elements_v() + ev] = std::sqrt(area);
    }
  return h;
}

Vec2 invert_point(const NurbsPatch& patch, const Vec3& p, Vec2 guess, double* distance) {
  Vec2 xi = clamp_to_domain(patch, guess);
  for (int it = 0; it < 50; ++it) {
    const SurfacePoint sp = eval_surface(patch, xi[0], xi[1], 1);
    const Vec3 r = p - sp.x;
    Eigen::Matrix<double, 3, 2> J;
    J.col(0) = sp.du;
    J.col(1) = sp.dv;
    const Vec2 step = (J.transpose() * J).ldlt().solve(J.transpose() * r);
    const Vec2 next = clamp_to_domain(patch, xi + step);
    const double moved = (next - xi).norm();
    xi = next;
    if (moved < 1e-15) break;
  }
  if (distance) *distance = (surface_point(patch, xi) - p).norm();
  return xi;
}

IntersectionCoupling build_coupling(const IntersectionSpec& spec, const NurbsPatch& a, const NurbsPatch& b,
                                    const ExtractionMap& ea, const ExtractionMap& eb, double gap_tol) {
  if (spec.curve_a.size() < 2 || spec.curve_b.size() < 2)
    throw ValidationError("intersection polylines need at least two points");
  IntersectionCoupling c;
  c.patch_a = spec.patch_a;
  c.patch_b = spec.patch_b;

  const ArcSamples sa = sample_arclength(a, spec.curve_a, 200);
  const ArcSamples sb = sample_arclength(b, spec.curve_b, 200);
  int n_el = spec.num_elements;
  if (n_el <= 0) n_el = 2 * std::max(elements_crossed(ea.fe, sa.xi), elements_crossed(eb.fe, sb.xi));
  const double La = sa.s.back(), Lb = sb.s.back();
  const double scale = std::max(a.bbox_diagonal(), b.bbox_diagonal());
  if (!(La > 0.0)) throw IntersectionError("intersection has zero length on patch " + std::to_string(spec.patch_a));

  // Orientation of B's polyline may be reversed relative to A's.
  const Vec3 startA = surface_point(a, sa.xi.front());
  const bool reversed = (surface_point(b, sb.xi.front()) - startA).norm() >
                        (surface_point(b, sb.xi.back()) - startA).norm();

  for (int n = 0; n <= n_el; ++n) {
    const double r = static_cast<double>(n) / n_el;
    const Vec2 xa = at_arclength(sa, r * La);
    const Vec3 p = surface_point(a, xa);
    const Vec2 guess = at_arclength(sb, (reversed ? 1.0 - r : r) * Lb);
    double dist = 0.0;
    const Vec2 xb = invert_point(b, p, guess, &dist);
    c.xi_a.push_back(xa);
    c.xi_b.push_back(xb);
    // The B polyline must trace the same curve, not merely lie near it.
    const double trace = (surface_point(b, guess) - p).norm();
    c.max_gap = std::max({c.max_gap, dist, trace});
  }
  if (c.max_gap > gap_tol * scale) {
    std::ostringstream os;
    os << "intersection between patches " << spec.patch_a << " and " << spec.patch_b
       << " does not match: max physical gap " << c.max_gap;
    throw IntersectionError(os.str());
  }

  transfer_rows(ea.fe, c.xi_a, c.T0a, c.T1a);
  transfer_rows(eb.fe, c.xi_b, c.T0b, c.T1b);

  const auto ha = element_sizes(a, ea.fe), hb = element_sizes(b, eb.fe);
  for (int n = 0; n <= n_el; ++n) {
    c.h.push_back(0.5 * (size_at(ea.fe, ha, c.xi_a[n]) + size_at(eb.fe, hb, c.xi_b[n])));
  }
  return c;
}

double penalty_alpha_d(double alpha, const Material& mat, double t, double h) {
  return alpha * mat.E * t / (h * (1.0 - mat.nu * mat.nu));
}

double penalty_alpha_r(double alpha, const Material& mat, double t, double h) {
  return alpha * mat.E * t * t * t / (12.0 * h * (1.0 - mat.nu * mat.nu));
}

void assemble_penalty(const IntersectionCoupling& c, const PenaltyFields& f, double alpha, const Material& mat,
                      unsigned flags, PenaltyAssembly& out) {
  const int nn = static_cast<int>(c.xi_a.size());
  out.energy = 0.0;
  out.grad_x = Vec::Zero(18 * nn);
  out.grad_X = Vec::Zero(18 * nn);
  out.H_xx.clear();
  out.H_xX.clear();
  out.H_xt.clear();
  const GaussRule g = gauss_legendre(2);
  constexpr auto idx_x = iota_indices<18>(0);
  constexpr auto idx_all = iota_indices<kPenSize>(0);
  PenaltyConst pc;
  pc.alpha = alpha;
  pc.E = mat.E;
  pc.nu = mat.nu;
  for (int e = 0; e + 1 < nn; ++e) {
    const int nodes[2] = {e, e + 1};
    pc.dxi = c.xi_a[e + 1] - c.xi_a[e];
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const double s = g.x[k];
      const double cw[2] = {1.0 - s, s};
      const double w = g.w[k];
      pc.h = cw[0] * c.h[e] + cw[1] * c.h[e + 1];
      std::array<double, kPenSize> q{};
      for (int a = 0; a < 2; ++a) {
        const int n = nodes[a];
        for (int i = 0; i < 18; ++i) {
          q[i] += cw[a] * f.x[18 * n + i];
          q[18 + i] += cw[a] * f.X[18 * n + i];
        }
        q[36] += cw[a] * f.t[2 * n];
        q[37] += cw[a] * f.t[2 * n + 1];
      }
      auto density = [&pc](const auto* v) { return penalty_density(v, pc); };
      if (!(flags & (kResidual | kTangent | kGeometry))) {
        out.energy += w * penalty_density(q.data(), pc);
        continue;
      }
      std::array<double, kPenSize> grad{};
      std::array<double, 18 * kPenSize> hess{};
      int stride = 18;
      if (flags & kGeometry) {
        stride = kPenSize;
        out.energy += w * hessian_block<kPenSize, 18>(density, q, idx_all, idx_x, grad.data(), hess.data());
      } else if (flags & kTangent) {
        out.energy += w * hessian_block<18, 18>(density, q, idx_x, idx_x, grad.data(), hess.data());
      } else {
        out.energy += w * gradient<18>(density, q, idx_x, grad.data());
      }
      for (int a = 0; a < 2; ++a) {
        const int na = nodes[a];
        for (int i = 0; i < 18; ++i) {
          out.grad_x[18 * na + i] += w * cw[a] * grad[i];
          if (flags & kGeometry) out.grad_X[18 * na + i] += w * cw[a] * (grad[i] + grad[18 + i]);
        }
        if (!(flags & (kTangent | kGeometry))) continue;
        for (int b = 0; b < 2; ++b) {
          const int nb = nodes[b];
          const double ww = w * cw[a] * cw[b];
          for (int i = 0; i < 18; ++i) {
            for (int j = 0; j < 18; ++j) {
              const double hxx = hess[i * stride + j];
              if (flags & kTangent) out.H_xx.emplace_back(18 * na + i, 18 * nb + j, ww * hxx);
              if (flags & kGeometry) out.H_xX.emplace_back(18 * na + i, 18 * nb + j, ww * (hxx + hess[i * stride + 18 + j]));
            }
            if (flags & kGeometry) {
              out.H_xt.emplace_back(18 * na + i, 2 * nb, ww * hess[i * stride + 36]);
              out.H_xt.emplace_back(18 * na + i, 2 * nb + 1, ww * hess[i * stride + 37]);
            }
          }
        }
      }
    }
  }
}

}  // namespace ffdshell
