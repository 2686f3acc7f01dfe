#pragma once

#include <array>
#include <string>
#include <vector>

#include "ffdshell/spline.hpp"

namespace ffdshell {

/// Gauss-Legendre rule on [0, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};
GaussRule gauss_legendre(int n);

/// Parametric side of a patch: u0 is u = min, u1 is u = max, and so on.
enum class Side { u0, u1, v0, v1 };
Side parse_side(const std::string& s);
std::string to_string(Side s);

/// Equispaced Lagrange nodes of degree p on every Bezier element of kv,
/// shared element-boundary nodes listed once.
std::vector<double> lagrange_nodes_1d(const KnotVector& kv, int p);

/// Tensor-product nodes, u-major (index = i * nv + j).
std::vector<Vec2> lagrange_nodes(const KnotVector& ku, const KnotVector& kv, int pu, int pv);

/// Values and first two derivatives of the p+1 Lagrange polynomials with
/// equispaced nodes on [a, b]; out[k][j] is the k-th derivative of L_j.
void lagrange_1d(int p, double a, double b, double x, std::array<std::vector<double>, 3>& out);

/// Quadrature element carrying FE basis values with derivative slots
/// {value, u, v, uu, uv, vv} at each point.
struct Element {
  int eu = 0, ev = 0;
  std::vector<int> nodes;
  std::vector<Vec2> xi;
  std::vector<double> weight;  // Gauss weight times parametric measure
  std::vector<std::array<std::vector<double>, 6>> phi;
};

/// C0 Lagrange space over the Bezier mesh of a patch. With nodal weights
/// W_i set, the basis is phi_i = L_i W_i / sum_k L_k W_k, which spans the
/// rational spline space of the patch and stays interpolatory.
class FeSpace {
 public:
  FeSpace() = default;
  FeSpace(const KnotVector& ku, const KnotVector& kv);

  int pu() const { return pu_; }
  int pv() const { return pv_; }
  int nu() const { return static_cast<int>(nodes_u_.size()); }
  int nv() const { return static_cast<int>(nodes_v_.size()); }
  int num_nodes() const { return nu() * nv(); }
  int node_index(int i, int j) const { return i * nv() + j; }
  const std::vector<double>& breaks_u() const { return breaks_u_; }
  const std::vector<double>& breaks_v() const { return breaks_v_; }
  int num_elements_u() const { return static_cast<int>(breaks_u_.size()) - 1; }
  int num_elements_v() const { return static_cast<int>(breaks_v_.size()) - 1; }
  std::vector<Vec2> node_coords() const;

  void set_nodal_weights(std::vector<double> w);
  bool rational() const { return !weights_.empty(); }

  /// Element index containing u along a direction (half-open, last closed).
  int element_u(double u) const;
  int element_v(double v) const;

  /// Nonzero FE basis functions at (u, v).
  SurfaceBasis basis(double u, double v) const;

  /// Area elements with nq x nq Gauss points.
  std::vector<Element> area_elements(int nq) const;
  /// Line elements along a side with nq Gauss points each.
  std::vector<Element> edge_elements(Side side, int nq) const;

 private:
  SurfaceBasis element_basis(int eu, int ev, double u, double v) const;

  int pu_ = 1, pv_ = 1;
  std::vector<double> breaks_u_, breaks_v_, nodes_u_, nodes_v_;
  std::vector<double> weights_;
};

}  // namespace ffdshell
