#include "ffdshell/shell.hpp"

#include <cmath>
#include <sstream>

#include "ffdshell/ad_vec.hpp"
#include "ffdshell/errors.hpp"

namespace ffdshell {

using namespace ad;

void Material::validate() const {
  if (!(E > 0.0)) throw ValidationError("material: Young's modulus must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw ValidationError("material: Poisson ratio must lie in (-1, 0.5)");
}

namespace {

// Isotropic quadratic form c (tr(G^2) + nu/(1-nu) tr(G)^2) with G = A^{-1} e.
template <class S>
S iso_quadratic(const S& C11, const S& C12, const S& C22, const S& e11, const S& e12, const S& e22, double nu) {
  const S G11 = C11 * e11 + C12 * e12;
  const S G12 = C11 * e12 + C12 * e22;
  const S G21 = C12 * e11 + C22 * e12;
  const S G22 = C12 * e12 + C22 * e22;
  const S tr = G11 + G22;
  return G11 * G11 + 2.0 * G12 * G21 + G22 * G22 + (nu / (1.0 - nu)) * tr * tr;
}

template <class S>
S shell_energy(const S* q, double E, double nu) {
  const V3<S> a1 = load3(q, 0), a2 = load3(q, 3), a11 = load3(q, 6), a12 = load3(q, 9), a22 = load3(q, 12);
  const V3<S> A1 = load3(q, 15), A2 = load3(q, 18), A11 = load3(q, 21), A12 = load3(q, 24), A22 = load3(q, 27);
  const S& t = q[slot::kThick];

  const V3<S> nA = cross(A1, A2);
  const S J = norm(nA);
  const V3<S> A3 = scale(nA, 1.0 / J);
  const V3<S> a3 = unit(cross(a1, a2));

  const S Am11 = dot(A1, A1), Am12 = dot(A1, A2), Am22 = dot(A2, A2);
  const S e11 = 0.5 * (dot(a1, a1) - Am11);
  const S e12 = 0.5 * (dot(a1, a2) - Am12);
  const S e22 = 0.5 * (dot(a2, a2) - Am22);
  const S k11 = dot(A11, A3) - dot(a11, a3);
  const S k12 = dot(A12, A3) - dot(a12, a3);
  const S k22 = dot(A22, A3) - dot(a22, a3);

  const S det = Am11 * Am22 - Am12 * Am12;
  const S C11 = Am22 / det, C12 = -Am12 / det, C22 = Am11 / det;
  const double c = E / (2.0 * (1.0 + nu));
  const S membrane = iso_quadratic(C11, C12, C22, e11, e12, e22, nu);
  const S bending = iso_quadratic(C11, C12, C22, k11, k12, k22, nu);
  return c * (t * membrane + (t * t * t / 12.0) * bending) * J;
}

// Load force density per unit parametric measure.
template <class S>
V3<S> load_density(const S* q, const LoadSpec& L) {
  const V3<S> a1 = load3(q, 0), a2 = load3(q, 3);
  const V3<S> A1 = load3(q, 15), A2 = load3(q, 18);
  const S& t = q[slot::kThick];
  const double p = L.magnitude;
  const V3<double> d{L.direction[0], L.direction[1], L.direction[2]};
  const bool has_dir = L.direction.squaredNorm() > 0.0;
  auto along = [&](const S& s) { return V3<S>{d[0] * s, d[1] * s, d[2] * s}; };
  switch (L.kind) {
    case LoadKind::DeadPressure: {
      const V3<S> nA = cross(A1, A2);
      if (L.projection.squaredNorm() > 0.0) {
        const V3<double> pr{L.projection[0], L.projection[1], L.projection[2]};
        const S proj = abs_value(nA[0] * pr[0] + nA[1] * pr[1] + nA[2] * pr[2]);
        return along(p * proj);
      }
      if (has_dir) return along(p * norm(nA));
      return scale(nA, p);
    }
    case LoadKind::FollowerPressure:
      return scale(cross(a1, a2), p);
    case LoadKind::BodyForce:
      return along(p * t * norm(cross(A1, A2)));
    case LoadKind::EdgeTraction: {
      const bool along_v = L.side == Side::u0 || L.side == Side::u1;
      return along(p * norm(along_v ? A2 : A1));
    }
  }
  return {S(0.0), S(0.0), S(0.0)};
}

// Pointwise inputs at quadrature point k of element el.
void gather(const Element& el, int k, const PatchFields& f, std::array<double, slot::kSize>& q, Vec3& uq) {
  q.fill(0.0);
  uq.setZero();
  const auto& phi = el.phi[k];
  double t = 0.0;
  for (std::size_t a = 0; a < el.nodes.size(); ++a) {
    const int n = el.nodes[a];
    for (int c = 0; c < 3; ++c) {
      const double X = (*f.X)[3 * n + c];
      const double x = X + (f.u ? (*f.u)[3 * n + c] : 0.0);
      for (int s = 1; s < 6; ++s) {
        q[3 * (s - 1) + c] += phi[s][a] * x;
        q[slot::kRef + 3 * (s - 1) + c] += phi[s][a] * X;
      }
      uq[c] += phi[0][a] * (x - X);
    }
    if (f.t) t += phi[0][a] * (*f.t)[n];
  }
  q[slot::kThick] = t;
}

// B maps element nodal vectors (3 nn) to the 15 derivative inputs.
Mat derivative_operator(const Element& el, int k) {
  const int nn = static_cast<int>(el.nodes.size());
  Mat B = Mat::Zero(15, 3 * nn);
  for (int a = 0; a < nn; ++a)
    for (int s = 1; s < 6; ++s)
      for (int c = 0; c < 3; ++c) B(3 * (s - 1) + c, 3 * a + c) = el.phi[k][s][a];
  return B;
}

void scatter_matrix(TripletList& out, const std::vector<int>& rows, int rdim, const std::vector<int>& cols,
                    int cdim, const Mat& K) {
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (int c = 0; c < rdim; ++c)
      for (std::size_t b = 0; b < cols.size(); ++b)
        for (int d = 0; d < cdim; ++d) {
          const double v = K(rdim * a + c, cdim * b + d);
          if (v != 0.0) out.emplace_back(rdim * rows[a] + c, cdim * cols[b] + d, v);
        }
}

void check_thickness(double t, const Element& el) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "nonpositive thickness " << t << " in element (" << el.eu << ", " << el.ev << ")";
    throw ValidationError(os.str());
  }
}

void check_tangents(const std::array<double, slot::kSize>& q, const Element& el) {
  const Vec3 A1(q[15], q[16], q[17]), A2(q[18], q[19], q[20]);
  if (A1.cross(A2).norm() < 1e-14 * A1.norm() * A2.norm() || A1.norm() == 0.0 || A2.norm() == 0.0) {
    std::ostringstream os;
    os << "degenerate surface tangents in element (" << el.eu << ", " << el.ev << ")";
    throw SingularGeometryError(os.str());
  }
}

}  // namespace

LoadKind parse_load_kind(const std::string& s) {
  if (s == "dead-pressure") return LoadKind::DeadPressure;
  if (s == "follower-pressure") return LoadKind::FollowerPressure;
  if (s == "body-force") return LoadKind::BodyForce;
  if (s == "edge-traction") return LoadKind::EdgeTraction;
  throw ValidationError("unknown load kind '" + s + "'");
}

std::string to_string(LoadKind k) {
  switch (k) {
    case LoadKind::DeadPressure: return "dead-pressure";
    case LoadKind::FollowerPressure: return "follower-pressure";
    case LoadKind::BodyForce: return "body-force";
    case LoadKind::EdgeTraction: return "edge-traction";
  }
  return "?";
}

MidsurfaceState kinematics(const std::array<Vec3, 5>& ref, const std::array<Vec3, 5>& def, const Material& mat,
                           double t) {
  MidsurfaceState s;
  s.A1 = ref[0];
  s.A2 = ref[1];
  s.a1 = def[0];
  s.a2 = def[1];
  const Vec3 nA = s.A1.cross(s.A2), na = s.a1.cross(s.a2);
  const double scale = s.A1.norm() * s.A2.norm();
  if (nA.norm() < 1e-14 * scale || scale == 0.0) throw SingularGeometryError("degenerate reference tangents");
  if (na.norm() < 1e-14 * s.a1.norm() * s.a2.norm()) throw SingularGeometryError("degenerate deformed tangents");
  s.A3 = nA.normalized();
  s.a3 = na.normalized();
  Eigen::Matrix2d A, a, B, b;
  A << s.A1.dot(s.A1), s.A1.dot(s.A2), s.A2.dot(s.A1), s.A2.dot(s.A2);
  a << s.a1.dot(s.a1), s.a1.dot(s.a2), s.a2.dot(s.a1), s.a2.dot(s.a2);
  B << ref[2].dot(s.A3), ref[3].dot(s.A3), ref[3].dot(s.A3), ref[4].dot(s.A3);
  b << def[2].dot(s.a3), def[3].dot(s.a3), def[3].dot(s.a3), def[4].dot(s.a3);
  s.eps = 0.5 * (a - A);
  s.kappa = B - b;
  const Eigen::Matrix2d C = A.inverse();
  const double D = mat.E / (1.0 - mat.nu * mat.nu);
  auto resultant = [&](const Eigen::Matrix2d& e, double stiff) {
    const double tr = (C * e).trace();
    return Eigen::Matrix2d(stiff * ((1.0 - mat.nu) * C * e * C + mat.nu * tr * C));
  };
  s.n = resultant(s.eps, D * t);
  s.m = resultant(s.kappa, D * t * t * t / 12.0);
  return s;
}

double energy_density(const std::array<double, slot::kSize>& q, const Material& mat) {
  return shell_energy(q.data(), mat.E, mat.nu);
}

void FeAssembly::resize(int n) {
  energy = 0.0;
  grad_u = Vec::Zero(3 * n);
  grad_X = Vec::Zero(3 * n);
  grad_t = Vec::Zero(n);
  K_uu.clear();
  K_uX.clear();
  K_ut.clear();
}

void assemble_shell(const PatchFields& f, const Material& mat, unsigned flags, FeAssembly& out) {
  const double E = mat.E, nu = mat.nu;
  auto energy = [E, nu](const auto* q) { return shell_energy(q, E, nu); };
  constexpr auto idx_def = iota_indices<15>(0);
  constexpr auto idx_all = iota_indices<slot::kSize>(0);
  std::array<double, slot::kSize> q;
  Vec3 uq;
  for (const Element& el : *f.elements) {
    const int nn = static_cast<int>(el.nodes.size());
    Mat Ke = Mat::Zero(3 * nn, 3 * nn), KXe, Kte;
    Vec ge = Vec::Zero(3 * nn), gXe, gte;
    if (flags & kGeometry) {
      KXe = Mat::Zero(3 * nn, 3 * nn);
      Kte = Mat::Zero(3 * nn, nn);
      gXe = Vec::Zero(3 * nn);
      gte = Vec::Zero(nn);
    }
    for (std::size_t k = 0; k < el.xi.size(); ++k) {
      gather(el, static_cast<int>(k), f, q, uq);
      check_thickness(q[slot::kThick], el);
      check_tangents(q, el);
      const double w = el.weight[k];
      if (flags & kGeometry) {
        std::array<double, slot::kSize> g;
        std::array<double, 15 * slot::kSize> h;
        out.energy += w * hessian_block<slot::kSize, 15>(energy, q, idx_all, idx_def, g.data(), h.data());
        const Mat B = derivative_operator(el, static_cast<int>(k));
        Eigen::Map<const Eigen::Matrix<double, 15, slot::kSize, Eigen::RowMajor>> H(h.data());
        Eigen::Matrix<double, 15, 1> gx, gxX;
        for (int i = 0; i < 15; ++i) {
          gx[i] = g[i];
          gxX[i] = g[i] + g[slot::kRef + i];
        }
        const Mat Hxx = H.leftCols(15);
        const Mat HxX = Hxx + H.middleCols(slot::kRef, 15);
        ge += w * B.transpose() * gx;
        gXe += w * B.transpose() * gxX;
        if (flags & kTangent) Ke += w * B.transpose() * Hxx * B;
        KXe += w * B.transpose() * HxX * B;
        const Vec Hxt = B.transpose() * H.col(slot::kThick);
        for (int b = 0; b < nn; ++b) {
          Kte.col(b) += w * el.phi[k][0][b] * Hxt;
          gte[b] += w * el.phi[k][0][b] * g[slot::kThick];
        }
      } else if (flags & kTangent) {
        std::array<double, 15> g;
        std::array<double, 225> h;
        out.energy += w * hessian_block<15, 15>(energy, q, idx_def, idx_def, g.data(), h.data());
        const Mat B = derivative_operator(el, static_cast<int>(k));
        Eigen::Map<const Eigen::Matrix<double, 15, 15, Eigen::RowMajor>> H(h.data());
        Eigen::Map<const Eigen::Matrix<double, 15, 1>> gv(g.data());
        ge += w * B.transpose() * gv;
        Ke += w * B.transpose() * H * B;
      } else if (flags & kResidual) {
        std::array<double, 15> g;
        out.energy += w * gradient<15>(energy, q, idx_def, g.data());
        const Mat B = derivative_operator(el, static_cast<int>(k));
        Eigen::Map<const Eigen::Matrix<double, 15, 1>> gv(g.data());
        ge += w * B.transpose() * gv;
      } else {
        out.energy += w * shell_energy(q.data(), E, nu);
      }
    }
    for (int a = 0; a < nn; ++a) {
      const int n = el.nodes[a];
      for (int c = 0; c < 3; ++c) {
        if (flags & (kResidual | kTangent | kGeometry)) out.grad_u[3 * n + c] += ge[3 * a + c];
        if (flags & kGeometry) out.grad_X[3 * n + c] += gXe[3 * a + c];
      }
      if (flags & kGeometry) out.grad_t[n] += gte[a];
    }
    if (flags & kTangent) scatter_matrix(out.K_uu, el.nodes, 3, el.nodes, 3, Ke);
    if (flags & kGeometry) {
      scatter_matrix(out.K_uX, el.nodes, 3, el.nodes, 3, KXe);
      scatter_matrix(out.K_ut, el.nodes, 3, el.nodes, 1, Kte);
    }
  }
}

void assemble_load(const PatchFields& f, const LoadSpec& load, const std::vector<Element>& edge_elements,
                   unsigned flags, FeAssembly& out) {
  const std::vector<Element>& elems = load.kind == LoadKind::EdgeTraction ? edge_elements : *f.elements;
  auto density = [&load](const auto* q) { return load_density(q, load); };
  constexpr auto idx_all = iota_indices<slot::kSize>(0);
  std::array<double, slot::kSize> q;
  Vec3 uq;
  for (const Element& el : elems) {
    const int nn = static_cast<int>(el.nodes.size());
    Mat Ke = Mat::Zero(3 * nn, 3 * nn), KXe = Mat::Zero(3 * nn, 3 * nn), Kte = Mat::Zero(3 * nn, nn);
    Vec ge = Vec::Zero(3 * nn);
    for (std::size_t k = 0; k < el.xi.size(); ++k) {
      gather(el, static_cast<int>(k), f, q, uq);
      const double w = el.weight[k];
      std::array<double, 3> F;
      std::array<double, 3 * slot::kSize> jac;
      jacobian<3, slot::kSize>(density, q, idx_all, F.data(), jac.data());
      out.energy += w * (F[0] * uq[0] + F[1] * uq[1] + F[2] * uq[2]);
      const auto& phi0 = el.phi[k][0];
      for (int a = 0; a < nn; ++a)
        for (int c = 0; c < 3; ++c) ge[3 * a + c] -= w * phi0[a] * F[c];
      if (!(flags & (kTangent | kGeometry))) continue;
      const Mat B = derivative_operator(el, static_cast<int>(k));
      Eigen::Map<const Eigen::Matrix<double, 3, slot::kSize, Eigen::RowMajor>> Jm(jac.data());
      // Rows: -phi_a * dF/d(inputs).
      Mat Fx = Jm.leftCols(15) * B;                                    // 3 x 3nn
      Mat FX = (Jm.leftCols(15) + Jm.middleCols(slot::kRef, 15)) * B;  // 3 x 3nn
      for (int a = 0; a < nn; ++a)
        for (int c = 0; c < 3; ++c) {
          Ke.row(3 * a + c) -= w * phi0[a] * Fx.row(c);
          KXe.row(3 * a + c) -= w * phi0[a] * FX.row(c);
          for (int b = 0; b < nn; ++b) Kte(3 * a + c, b) -= w * phi0[a] * Jm(c, slot::kThick) * phi0[b];
        }
    }
    for (int a = 0; a < nn; ++a)
      for (int c = 0; c < 3; ++c) out.grad_u[3 * el.nodes[a] + c] += ge[3 * a + c];
    if (flags & kTangent) scatter_matrix(out.K_uu, el.nodes, 3, el.nodes, 3, Ke);
    if (flags & kGeometry) {
      scatter_matrix(out.K_uX, el.nodes, 3, el.nodes, 3, KXe);
      scatter_matrix(out.K_ut, el.nodes, 3, el.nodes, 1, Kte);
    }
  }
}

VolumeResult integrate_volume(const PatchFields& f, bool gradients) {
  VolumeResult r;
  if (gradients) {
    r.grad_X = Vec::Zero(3 * f.num_nodes);
    r.grad_t = Vec::Zero(f.num_nodes);
  }
  std::array<double, slot::kSize> q;
  Vec3 uq;
  for (const Element& el : *f.elements) {
    for (std::size_t k = 0; k < el.xi.size(); ++k) {
      gather(el, static_cast<int>(k), f, q, uq);
      const Vec3 A1(q[15], q[16], q[17]), A2(q[18], q[19], q[20]);
      const Vec3 n = A1.cross(A2);
      const double J = n.norm();
      const double w = el.weight[k];
      const double t = q[slot::kThick];
      r.area += w * J;
      r.volume += w * t * J;
      if (!gradients) continue;
      // dJ/dA1 = A2 x n / J, dJ/dA2 = n x A1 / J.
      const Vec3 dA1 = A2.cross(n) / J, dA2 = n.cross(A1) / J;
      const auto& phi = el.phi[k];
      for (std::size_t a = 0; a < el.nodes.size(); ++a) {
        const int node = el.nodes[a];
        for (int c = 0; c < 3; ++c)
          r.grad_X[3 * node + c] += w * t * (phi[1][a] * dA1[c] + phi[2][a] * dA2[c]);
        r.grad_t[node] += w * J * phi[0][a];
      }
    }
  }
  return r;
}

}  // namespace ffdshell
