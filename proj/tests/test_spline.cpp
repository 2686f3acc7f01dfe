#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffdshell/errors.hpp"
#include "ffdshell/fe_space.hpp"
#include "ffdshell/geometry.hpp"
#include "ffdshell/spline.hpp"

using namespace ffdshell;

TEST(KnotVector, RejectsDecreasingKnots) {
  EXPECT_THROW(KnotVector(2, {0, 0, 0, 0.6, 0.4, 1, 1, 1}), ValidationError);
  EXPECT_THROW(KnotVector(2, {0, 0, 1, 1, 1}), ValidationError);
  EXPECT_NO_THROW(KnotVector(2, {0, 0, 0, 1, 1, 1}));
}

TEST(FindSpan, Examples) {
  const KnotVector q(2, {0, 0, 0, 1, 1, 1});
  EXPECT_EQ(find_span(q, 0.5), 2);
  EXPECT_EQ(find_span(q, 1.0), 2);
  const KnotVector l(1, {0, 0, 0.5, 1, 1});
  EXPECT_EQ(find_span(l, 0.75), 2);
  EXPECT_EQ(find_span(l, 0.5), 2);
  EXPECT_EQ(find_span(l, 0.0), 1);
  EXPECT_THROW(find_span(l, 1.5), DomainError);
  EXPECT_THROW(find_span(l, -0.1), DomainError);
}

TEST(Basis, BernsteinMidpoint) {
  const KnotVector q(2, {0, 0, 0, 1, 1, 1});
  const BasisEval b = basis_and_derivs(q, 0.5, 2);
  EXPECT_NEAR(b(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(b(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(b(0, 2), 0.25, 1e-15);
  EXPECT_NEAR(b(1, 0), -1.0, 1e-14);
  EXPECT_NEAR(b(1, 1), 0.0, 1e-14);
  EXPECT_NEAR(b(1, 2), 1.0, 1e-14);
  const KnotVector l(1, {0, 0, 1, 1});
  const BasisEval bl = basis_and_derivs(l, 0.3, 0);
  EXPECT_NEAR(bl(0, 0), 0.7, 1e-15);
  EXPECT_NEAR(bl(0, 1), 0.3, 1e-15);
}

TEST(Basis, PartitionOfUnityAndDerivativeSums) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const KnotVector kv(3, {0, 0, 0, 0, 0.2, 0.5, 0.5, 0.9, 1, 1, 1, 1});
  for (int trial = 0; trial < 500; ++trial) {
    const BasisEval b = basis_and_derivs(kv, U(rng), 2);
    double s0 = 0, s1 = 0, s2 = 0;
    for (int j = 0; j <= 3; ++j) {
      EXPECT_GE(b(0, j), -1e-15);
      s0 += b(0, j);
      s1 += b(1, j);
      s2 += b(2, j);
    }
    EXPECT_NEAR(s0, 1.0, 1e-12);
    EXPECT_NEAR(s1, 0.0, 1e-10);
    EXPECT_NEAR(s2, 0.0, 1e-9);
  }
}

TEST(Basis, DerivativesMatchCentralDifferences) {
  const KnotVector kv(3, {0, 0, 0, 0, 0.3, 0.6, 1, 1, 1, 1});
  const double h = 1e-6;
  for (double u : {0.1, 0.45, 0.77}) {
    const BasisEval b = basis_and_derivs(kv, u, 2);
    const BasisEval bp = basis_and_derivs(kv, u + h, 1), bm = basis_and_derivs(kv, u - h, 1);
    ASSERT_EQ(bp.first, b.first);
    for (int j = 0; j <= 3; ++j) {
      EXPECT_NEAR(b(1, j), (bp(0, j) - bm(0, j)) / (2 * h), 1e-6 * std::max(1.0, std::abs(b(1, j))));
      EXPECT_NEAR(b(2, j), (bp(1, j) - bm(1, j)) / (2 * h), 1e-4 * std::max(1.0, std::abs(b(2, j))));
    }
  }
}

TEST(Surface, BilinearIdentity) {
  const KnotVector k(1, {0, 0, 1, 1});
  NurbsPatch p(k, k, {Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)});
  const SurfacePoint sp = eval_surface(p, 0.5, 0.5);
  EXPECT_TRUE(sp.x.isApprox(Vec3(0.5, 0.5, 0)));
  EXPECT_TRUE(sp.du.isApprox(Vec3(1, 0, 0)));
  EXPECT_TRUE(sp.dv.isApprox(Vec3(0, 1, 0)));
  EXPECT_EQ(sp.duu.norm() + sp.duv.norm() + sp.dvv.norm(), 0.0);
  EXPECT_THROW(eval_surface(p, 1.2, 0.5), DomainError);
}

NurbsPatch quarter_circle_strip(double R) {
  const KnotVector ku(2, {0, 0, 0, 1, 1, 1});
  const KnotVector kv(1, {0, 0, 1, 1});
  const double w = std::sqrt(0.5);
  std::vector<Vec3> pts = {Vec3(R, 0, 0), Vec3(R, 0, 1), Vec3(R, R, 0), Vec3(R, R, 1), Vec3(0, R, 0), Vec3(0, R, 1)};
  return NurbsPatch(ku, kv, pts, {1, 1, w, w, 1, 1}, {0.1});
}

TEST(Surface, RationalQuarterCircle) {
  const NurbsPatch p = quarter_circle_strip(2.0);
  for (double u : {0.0, 0.13, 0.5, 0.81, 1.0}) {
    const SurfacePoint sp = eval_surface(p, u, 0.4);
    EXPECT_NEAR(std::hypot(sp.x[0], sp.x[1]), 2.0, 1e-12);
    // Tangent is perpendicular to the radius.
    EXPECT_NEAR(sp.du.head<2>().dot(sp.x.head<2>()), 0.0, 1e-12);
  }
}

TEST(Surface, DerivativesMatchCentralDifferences) {
  NurbsPatch p = quarter_circle_strip(1.5);
  const double h = 1e-6;
  for (const Vec2 xi : {Vec2(0.3, 0.4), Vec2(0.7, 0.2)}) {
    const SurfacePoint s = eval_surface(p, xi[0], xi[1]);
    const SurfacePoint up = eval_surface(p, xi[0] + h, xi[1]), um = eval_surface(p, xi[0] - h, xi[1]);
    const SurfacePoint vp = eval_surface(p, xi[0], xi[1] + h), vm = eval_surface(p, xi[0], xi[1] - h);
    EXPECT_LT((s.du - (up.x - um.x) / (2 * h)).norm(), 1e-6 * s.du.norm());
    EXPECT_LT((s.dv - (vp.x - vm.x) / (2 * h)).norm(), 1e-6 * s.dv.norm());
    EXPECT_LT((s.duu - (up.du - um.du) / (2 * h)).norm(), 1e-4 * std::max(1.0, s.duu.norm()));
    EXPECT_LT((s.duv - (vp.du - vm.du) / (2 * h)).norm(), 1e-4 * std::max(1.0, s.duv.norm()));
    EXPECT_LT((s.dvv - (vp.dv - vm.dv) / (2 * h)).norm(), 1e-4 * std::max(1.0, s.dvv.norm()));
  }
}

TEST(Surface, EndpointInterpolation) {
  const NurbsPatch p = greville_patch(3, 2, 6, 5, [](double u, double v) { return Vec3(u, v, u * u - v * v * v); }, 1.0);
  EXPECT_TRUE(eval_surface(p, 0, 0, 0).x.isApprox(p.points()[p.index(0, 0)], 1e-14));
  EXPECT_TRUE(eval_surface(p, 1, 1, 0).x.isApprox(p.points()[p.index(5, 4)], 1e-14));
  EXPECT_TRUE(eval_surface(p, 1, 0, 0).x.isApprox(p.points()[p.index(5, 0)], 1e-14));
}

TEST(Volume, TrilinearIdentityAndPartitionOfUnity) {
  const KnotVector k(1, {0, 0, 1, 1});
  std::vector<Vec3> pts;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) pts.emplace_back(i, j, l);
  const BsplineVolume vol(k, k, k, pts);
  EXPECT_TRUE(eval_volume(vol, Vec3(0.3, 0.4, 0.5)).isApprox(Vec3(0.3, 0.4, 0.5), 1e-15));

  const KnotVector kq = KnotVector::open_uniform(2, 3);
  std::vector<Vec3> qp(kq.num_basis() * kq.num_basis() * kq.num_basis(), Vec3::Zero());
  const BsplineVolume vq(kq, kq, kq, qp);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const SparseRow r = basis_row(vq, Vec3(U(rng), U(rng), U(rng)));
    EXPECT_LE(r.index.size(), 27u);
    double s = 0;
    for (double v : r.value) {
      EXPECT_GE(v, -1e-15);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Volume, ContainmentErrorNamesCoordinate) {
  const KnotVector k(1, {0, 0, 1, 1});
  const BsplineVolume vol(k, k, k, std::vector<Vec3>(8, Vec3::Zero()));
  try {
    basis_row(vol, Vec3(0.5, 1.5, 0.5));
    FAIL() << "expected containment error";
  } catch (const ContainmentError& e) {
    EXPECT_NE(std::string(e.what()).find("y = 1.5"), std::string::npos);
  }
  EXPECT_NO_THROW(basis_row(vol, Vec3(1.0, 0.0, 1.0)));
}

TEST(LagrangeNodes, CountsAndPlacement) {
  const auto n1 = lagrange_nodes_1d(KnotVector(2, {0, 0, 0, 1, 1, 1}), 2);
  ASSERT_EQ(n1.size(), 3u);
  EXPECT_DOUBLE_EQ(n1[1], 0.5);
  const auto n2 = lagrange_nodes_1d(KnotVector(1, {0, 0, 0.5, 1, 1}), 1);
  ASSERT_EQ(n2.size(), 3u);
  EXPECT_DOUBLE_EQ(n2[1], 0.5);
  const KnotVector k2 = KnotVector::open_uniform(2, 2);
  EXPECT_EQ(lagrange_nodes(k2, k2, 2, 2).size(), 25u);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  for (int n = 1; n <= 6; ++n) {
    const GaussRule g = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g.w[i] * std::pow(g.x[i], deg);
      EXPECT_NEAR(s, 1.0 / (deg + 1), 1e-14) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(KnotVector, OpenUniformEndsExactlyOnIntervalWithRoundoffProneBounds) {
  const KnotVector k = KnotVector::open_uniform(3, 1, -0.31, 0.01);
  EXPECT_EQ(k.back(), 0.01);
  EXPECT_EQ(k.num_basis(), 4);
}

TEST(InterpolatingPatch, ReproducesPolynomialMapsExactly) {
  auto map = [](double u, double v) { return Vec3(u, 0.5 * v, 1.2 * u * (1.0 - u) + 0.3 * u * v * v); };
  const NurbsPatch p = interpolating_patch(3, 3, 9, 5, map, 0.01);
  for (double u : {0.0, 0.13, 0.5, 0.91, 1.0})
    for (double v : {0.0, 0.37, 1.0}) EXPECT_LT((eval_surface(p, u, v, 0).x - map(u, v)).norm(), 1e-12);
  EXPECT_DOUBLE_EQ(p.thickness()[3], 0.01);
}
