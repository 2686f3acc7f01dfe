#include "ffdshell/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ffdshell/errors.hpp"

namespace ffdshell {

KnotVector::KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {
  if (degree_ < 0) throw ValidationError("knot vector: negative degree");
  const int m = static_cast<int>(knots_.size());
  if (m < 2 * (degree_ + 1))
    throw ValidationError("knot vector: need at least " + std::to_string(2 * (degree_ + 1)) + " knots");
  for (int i = 0; i + 1 < m; ++i) {
    if (!(knots_[i] <= knots_[i + 1])) {
      std::ostringstream os;
      os << "knot vector: knots decrease at index " << i + 1;
      throw ValidationError(os.str());
    }
  }
  for (int i = 1; i <= degree_; ++i) {
    if (knots_[i] != knots_[0] || knots_[m - 1 - i] != knots_[m - 1])
      throw ValidationError("knot vector: end knots must have multiplicity degree+1");
  }
  if (knots_[degree_ + 1] == knots_[0] && degree_ + 1 < m - degree_ - 1)
    throw ValidationError("knot vector: first knot multiplicity exceeds degree+1");
  if (!(knots_.front() < knots_.back())) throw ValidationError("knot vector: empty parameter range");
  if (num_basis() < degree_ + 1) throw ValidationError("knot vector: too few basis functions");
}

KnotVector KnotVector::open_uniform(int degree, int num_elements, double a, double b) {
  std::vector<double> k;
  for (int i = 0; i < degree; ++i) k.push_back(a);
  for (int e = 0; e < num_elements; ++e) k.push_back(a + (b - a) * e / num_elements);
  k.push_back(b);
  for (int i = 0; i < degree; ++i) k.push_back(b);
  return KnotVector(degree, std::move(k));
}

std::vector<double> KnotVector::breaks() const {
  std::vector<double> b;
  for (double k : knots_)
    if (b.empty() || k > b.back()) b.push_back(k);
  return b;
}

std::vector<double> KnotVector::greville() const {
  std::vector<double> g(num_basis());
  if (degree_ == 0) {
    for (int i = 0; i < num_basis(); ++i) g[i] = 0.5 * (knots_[i] + knots_[i + 1]);
    return g;
  }
  for (int i = 0; i < num_basis(); ++i) {
    double s = 0.0;
    for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
    g[i] = s / degree_;
  }
  return g;
}

int find_span(const KnotVector& kv, double u) {
  const auto& k = kv.knots();
  const int p = kv.degree();
  const int n = kv.num_basis();
  if (!(u >= k.front() && u <= k.back())) {
    std::ostringstream os;
    os << "parameter " << u << " outside knot range [" << k.front() << ", " << k.back() << "]";
    throw DomainError(os.str());
  }
  if (u >= k[n]) {
    int s = n - 1;
    while (s > p && k[s] == k[s + 1]) --s;
    return s;
  }
  // Largest i in [p, n-1] with k[i] <= u.
  auto it = std::upper_bound(k.begin() + p, k.begin() + n + 1, u);
  return static_cast<int>(it - k.begin()) - 1;
}

BasisEval basis_and_derivs(const KnotVector& kv, double u, int max_deriv) {
  const int p = kv.degree();
  const auto& U = kv.knots();
  const int span = find_span(kv, u);
  BasisEval out;
  out.first = span - p;
  out.degree = p;
  out.max_deriv = max_deriv;
  out.values.assign((max_deriv + 1) * (p + 1), 0.0);

  // Piegl & Tiller A2.3.
  std::vector<double> left(p + 1), right(p + 1);
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1));
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) out.values[j] = ndu[j][p];

  const int n = std::min(max_deriv, p);
  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= n; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      out.values[k * (p + 1) + r] = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= n; ++k) {
    for (int j = 0; j <= p; ++j) out.values[k * (p + 1) + j] *= fac;
    fac *= (p - k);
  }
  return out;
}

NurbsPatch::NurbsPatch(KnotVector ku, KnotVector kv, std::vector<Vec3> points, std::vector<double> weights,
                       std::vector<double> thickness)
    : ku_(std::move(ku)), kv_(std::move(kv)), points_(std::move(points)), weights_(std::move(weights)),
      thickness_(std::move(thickness)) {
  const int n = nu() * nv();
  if (static_cast<int>(points_.size()) != n) {
    std::ostringstream os;
    os << "patch: expected " << nu() << "x" << nv() << " control points, got " << points_.size();
    throw ValidationError(os.str());
  }
  if (weights_.empty()) weights_.assign(n, 1.0);
  if (static_cast<int>(weights_.size()) != n) throw ValidationError("patch: weight count mismatch");
  for (int i = 0; i < n; ++i)
    if (!(weights_[i] > 0.0)) throw ValidationError("patch: weight " + std::to_string(i) + " not positive");
  if (thickness_.size() == 1) thickness_.assign(n, thickness_[0]);
  if (!thickness_.empty() && static_cast<int>(thickness_.size()) != n)
    throw ValidationError("patch: thickness coefficient count mismatch");
}

bool NurbsPatch::unit_weights() const {
  return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
}

void NurbsPatch::set_uniform_thickness(double t) { thickness_.assign(num_points(), t); }

double NurbsPatch::bbox_diagonal() const {
  Vec3 lo = points_.front(), hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

void rationalize(SurfaceBasis& b, const std::vector<double>& w) {
  const int n = b.size();
  std::array<double, 6> W{};
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < 6; ++s) {
      b.d[s][i] *= w[i];
      W[s] += b.d[s][i];
    }
  for (int i = 0; i < n; ++i) {
    const double N0 = b.d[0][i], Nu = b.d[1][i], Nv = b.d[2][i];
    const double Nuu = b.d[3][i], Nuv = b.d[4][i], Nvv = b.d[5][i];
    const double R = N0 / W[0];
    const double Ru = (Nu - R * W[1]) / W[0];
    const double Rv = (Nv - R * W[2]) / W[0];
    b.d[0][i] = R;
    b.d[1][i] = Ru;
    b.d[2][i] = Rv;
    b.d[3][i] = (Nuu - 2.0 * Ru * W[1] - R * W[3]) / W[0];
    b.d[4][i] = (Nuv - Ru * W[2] - Rv * W[1] - R * W[4]) / W[0];
    b.d[5][i] = (Nvv - 2.0 * Rv * W[2] - R * W[5]) / W[0];
  }
}

SurfaceBasis tensor_basis(const BasisEval& bu, const BasisEval& bv, int nv) {
  const int pu = bu.degree, pv = bv.degree;
  const int n = (pu + 1) * (pv + 1);
  SurfaceBasis out;
  out.index.resize(n);
  for (auto& s : out.d) s.assign(n, 0.0);
  static constexpr int du_ord[6] = {0, 1, 0, 2, 1, 0};
  static constexpr int dv_ord[6] = {0, 0, 1, 0, 1, 2};
  int k = 0;
  for (int a = 0; a <= pu; ++a)
    for (int b = 0; b <= pv; ++b, ++k) {
      out.index[k] = (bu.first + a) * nv + bv.first + b;
      for (int s = 0; s < 6; ++s) {
        const int ku = du_ord[s], kv = dv_ord[s];
        out.d[s][k] = (ku <= bu.max_deriv && kv <= bv.max_deriv) ? bu(ku, a) * bv(kv, b) : 0.0;
      }
    }
  return out;
}

SurfaceBasis rational_basis(const NurbsPatch& patch, double u, double v) {
  SurfaceBasis out =
      tensor_basis(basis_and_derivs(patch.ku(), u, 2), basis_and_derivs(patch.kv(), v, 2), patch.nv());
  if (!patch.unit_weights()) {
    std::vector<double> w(out.size());
    for (int k = 0; k < out.size(); ++k) w[k] = patch.weights()[out.index[k]];
    rationalize(out, w);
  }
  return out;
}

SurfacePoint eval_surface(const NurbsPatch& patch, double u, double v, int max_deriv) {
  if (max_deriv < 0 || max_deriv > 2) throw DomainError("eval_surface: max_deriv must be 0..2");
  const SurfaceBasis b = rational_basis(patch, u, v);
  SurfacePoint sp;
  std::array<Vec3*, 6> slots = {&sp.x, &sp.du, &sp.dv, &sp.duu, &sp.duv, &sp.dvv};
  const int nslot = max_deriv == 0 ? 1 : (max_deriv == 1 ? 3 : 6);
  for (int k = 0; k < b.size(); ++k) {
    const Vec3& p = patch.points()[b.index[k]];
    for (int s = 0; s < nslot; ++s) *slots[s] += b.d[s][k] * p;
  }
  return sp;
}

double eval_scalar(const NurbsPatch& patch, const std::vector<double>& coeffs, double u, double v) {
  const SurfaceBasis b = rational_basis(patch, u, v);
  double s = 0.0;
  for (int k = 0; k < b.size(); ++k) s += b.d[0][k] * coeffs[b.index[k]];
  return s;
}

BsplineVolume::BsplineVolume(KnotVector ku, KnotVector kv, KnotVector kw, std::vector<Vec3> points)
    : ku_(std::move(ku)), kv_(std::move(kv)), kw_(std::move(kw)), points_(std::move(points)) {
  if (static_cast<int>(points_.size()) != num_points()) {
    std::ostringstream os;
    os << "volume: expected " << num_points() << " control points, got " << points_.size();
    throw ValidationError(os.str());
  }
}

SparseRow basis_row(const BsplineVolume& block, const Vec3& theta) {
  std::array<BasisEval, 3> b;
  static const char* names[3] = {"x", "y", "z"};
  for (int d = 0; d < 3; ++d) {
    const KnotVector& kv = block.knots(d);
    const double tol = 1e-10 * (kv.back() - kv.front());  // points on a face may land just outside
    if (!(theta[d] >= kv.front() - tol && theta[d] <= kv.back() + tol)) {
      std::ostringstream os;
      os << "point outside FFD block: " << names[d] << " = " << theta[d] << " not in [" << kv.front() << ", "
         << kv.back() << "]";
      throw ContainmentError(os.str());
    }
    b[d] = basis_and_derivs(kv, std::clamp(theta[d], kv.front(), kv.back()), 0);
  }
  SparseRow row;
  for (int a = 0; a <= b[0].degree; ++a)
    for (int c = 0; c <= b[1].degree; ++c)
      for (int e = 0; e <= b[2].degree; ++e) {
        row.index.push_back(block.index(b[0].first + a, b[1].first + c, b[2].first + e));
        row.value.push_back(b[0](0, a) * b[1](0, c) * b[2](0, e));
      }
  return row;
}

Vec3 eval_volume(const BsplineVolume& block, const Vec3& theta) {
  const SparseRow row = basis_row(block, theta);
  Vec3 x = Vec3::Zero();
  for (std::size_t k = 0; k < row.index.size(); ++k) x += row.value[k] * block.points()[row.index[k]];
  return x;
}

}  // namespace ffdshell
