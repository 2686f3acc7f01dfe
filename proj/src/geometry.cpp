#include "ffdshell/geometry.hpp"

#include "ffdshell/errors.hpp"

namespace ffdshell {

KnotVector uniform_knots(int degree, int num_basis, double a, double b) {
  if (num_basis < degree + 1) throw ValidationError("need at least degree+1 basis functions");
  return KnotVector::open_uniform(degree, num_basis - degree, a, b);
}

NurbsPatch greville_patch(int pu, int pv, int nu, int nv, const std::function<Vec3(double, double)>& map,
                          double thickness) {
  const KnotVector ku = uniform_knots(pu, nu), kv = uniform_knots(pv, nv);
  const auto gu = ku.greville(), gv = kv.greville();
  std::vector<Vec3> pts;
  pts.reserve(nu * nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) pts.push_back(map(gu[i], gv[j]));
  return NurbsPatch(ku, kv, std::move(pts), {}, {thickness});
}

namespace {

// Collocation matrix of a B-spline basis at its Greville abscissae.
Mat collocation(const KnotVector& kv) {
  const auto g = kv.greville();
  const int n = kv.num_basis(), p = kv.degree();
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const int span = find_span(kv, g[i]);
    const BasisEval b = basis_and_derivs(kv, g[i], 0);
    for (int j = 0; j <= p; ++j) A(i, span - p + j) = b(0, j);
  }
  return A;
}

}  // namespace

NurbsPatch interpolating_patch(int pu, int pv, int nu, int nv, const std::function<Vec3(double, double)>& map,
                               double thickness) {
  const KnotVector ku = uniform_knots(pu, nu), kv = uniform_knots(pv, nv);
  const auto gu = ku.greville(), gv = kv.greville();
  const Eigen::PartialPivLU<Mat> Au(collocation(ku)), Av(collocation(kv));
  std::vector<Vec3> pts(nu * nv);
  for (int c = 0; c < 3; ++c) {
    Mat F(nu, nv);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) F(i, j) = map(gu[i], gv[j])[c];
    const Mat C = Av.solve(Au.solve(F).transpose()).transpose();
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) pts[i * nv + j][c] = C(i, j);
  }
  return NurbsPatch(ku, kv, std::move(pts), {}, {thickness});
}

NurbsPatch flat_patch(const Vec3& origin, const Vec3& e1, const Vec3& e2, int pu, int pv, int nu, int nv,
                      double thickness) {
  return greville_patch(pu, pv, nu, nv, [&](double u, double v) { return Vec3(origin + u * e1 + v * e2); },
                        thickness);
}

}  // namespace ffdshell
