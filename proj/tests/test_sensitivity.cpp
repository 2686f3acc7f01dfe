#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffdshell/ffd.hpp"
#include "ffdshell/geometry.hpp"
#include "ffdshell/sensitivity.hpp"

using namespace ffdshell;

namespace {

// Curved two-patch shell clamped on x = 0, non-matching at x = 0.5, under
// dead pressure.
SystemSpec curved_cantilever() {
  SystemSpec s;
  auto surf = [](double x, double y) { return Vec3(x, y, 0.2 * std::sin(1.5 * x) * (1.0 + 0.3 * y)); };
  s.patches.push_back(greville_patch(3, 3, 5, 6, [&](double u, double v) { return surf(0.5 * u, v); }, 0.03));
  s.patches.push_back(greville_patch(3, 3, 6, 5, [&](double u, double v) { return surf(0.5 + 0.5 * u, v); }, 0.03));
  NurbsPatch& b = s.patches[1];
  std::vector<Vec3> pts = b.points();
  for (int j = 0; j < b.kv().num_basis(); ++j)
    pts[b.index(0, j)] = eval_surface(s.patches[0], 1.0, b.kv().greville()[j], 0).x;
  b = NurbsPatch(b.ku(), b.kv(), pts, {}, {0.03});
  s.material = {1e5, 0.3};
  LoadSpec L;
  L.kind = LoadKind::DeadPressure;
  L.magnitude = -1.0;
  s.loads.push_back(L);
  BoundarySpec bc;
  bc.patch = 0;
  bc.side = Side::u0;
  s.boundary.push_back(bc);
  IntersectionSpec is;
  is.patch_a = 0;
  is.patch_b = 1;
  is.curve_a = {Vec2(1, 0), Vec2(1, 1)};
  is.curve_b = {Vec2(0, 0), Vec2(0, 1)};
  s.intersections.push_back(is);
  return s;
}

double solved_energy(CoupledSystem& sys, const Vec& P, const Vec& t, Vec u) {
  sys.set_geometry(P);
  sys.set_thickness(t);
  const SolveReport r = newton_solve(sys, u);
  EXPECT_TRUE(r.converged) << r.message;
  return sys.internal_energy(u);
}

struct Fixture : ::testing::Test {
  CoupledSystem sys{curved_cantilever()};
  Vec u, P0, t0;
  void SetUp() override {
    ASSERT_TRUE(newton_solve(sys, u).converged);
    P0 = sys.geometry();
    t0 = sys.thickness();
  }
};

}  // namespace

TEST_F(Fixture, AdjointShapeGradientMatchesFiniteDifferences) {
  AdjointSolver adj(sys, u);
  Vec gP, gt;
  adj.total(internal_energy_partials(adj.assembly()), gP, gt);
  std::mt19937 rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    Vec d(P0.size());
    for (int i = 0; i < d.size(); ++i) d[i] = N(rng);
    d *= 1e-3 / d.norm();
    const double h = 1e-3;
    const double fd = (solved_energy(sys, P0 + h * d, t0, u) - solved_energy(sys, P0 - h * d, t0, u)) / (2 * h);
    const double an = gP.dot(d);
    EXPECT_NEAR(an, fd, 1e-4 * std::abs(fd)) << "direction " << k;
  }
}

TEST_F(Fixture, AdjointThicknessGradientMatchesFiniteDifferences) {
  AdjointSolver adj(sys, u);
  Vec gP, gt;
  adj.total(internal_energy_partials(adj.assembly()), gP, gt);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    Vec d(t0.size());
    for (int i = 0; i < d.size(); ++i) d[i] = U(rng);
    d *= 0.03 / d.cwiseAbs().maxCoeff();
    const double h = 1e-4;
    const double fd = (solved_energy(sys, P0, t0 + h * d, u) - solved_energy(sys, P0, t0 - h * d, u)) / (2 * h);
    EXPECT_NEAR(gt.dot(d), fd, 1e-4 * std::abs(fd)) << "direction " << k;
  }
}

TEST_F(Fixture, AdjointAgreesWithDirectSensitivities) {
  DesignSpec spec;
  ShapeBlockSpec sb;
  sb.block = enclosing_block(sys, {0, 1}, {2, 1, 1}, {4, 2, 2});
  sb.patches = {0, 1};
  spec.shape.push_back(sb);
  spec.constant_thickness = {0, 1};
  DesignSpace ds(sys, spec);

  AdjointSolver adj(sys, u);
  const Partials f = internal_energy_partials(adj.assembly());
  Vec gP, gt;
  adj.total(f, gP, gt);
  const Vec adj_s = ds.shape_jacobian().transpose() * gP;
  const Vec adj_t = ds.thickness_jacobian().transpose() * gt;

  const Mat dus = adj.direct_shape(ds.shape_jacobian());
  const Mat dut = adj.direct_thickness(ds.thickness_jacobian());
  const Vec dir_s = ds.shape_jacobian().transpose() * f.dP + dus.transpose() * f.du;
  const Vec dir_t = ds.thickness_jacobian().transpose() * f.dt + dut.transpose() * f.du;
  ASSERT_GT(adj_s.size(), 0);
  EXPECT_LT((adj_s - dir_s).norm(), 1e-9 * adj_s.norm());
  EXPECT_LT((adj_t - dir_t).norm(), 1e-9 * adj_t.norm());
}

TEST_F(Fixture, PartialsVanishForRigidTranslation) {
  const SystemAssembly a = sys.assemble(u, kEnergy | kResidual | kGeometry);
  for (int c = 0; c < 3; ++c) {
    Vec d = Vec::Zero(P0.size());
    for (int i = c; i < d.size(); i += 3) d[i] = 1.0;
    EXPECT_LT(std::abs(a.dWint_dP.dot(d)), 1e-9 * a.dWint_dP.norm() * std::sqrt(d.size()));
    EXPECT_LT((a.dR_dP * d).norm(), 1e-9 * a.R.size() * Mat(a.dR_dP).cwiseAbs().maxCoeff());
  }
}

TEST(Volume, ConstantThicknessGradientIsArea) {
  CoupledSystem sys(curved_cantilever());
  DesignSpec spec;
  spec.constant_thickness = {0, 1};
  DesignSpace ds(sys, spec);
  const CoupledSystem::Volume v = sys.volume(true);
  const Vec g = ds.thickness_jacobian().transpose() * v.dt;
  double total = 0.0;
  for (int p = 0; p < 2; ++p) {
    Vec t = Vec::Zero(sys.num_cps());
    for (int k = 0; k < sys.spec().patches[p].num_points(); ++k) t[sys.cp_offset(p) + k] = 1.0;
    const Vec tsave = sys.thickness();
    sys.set_thickness(t);
    const double area_p = sys.volume(false).value;
    sys.set_thickness(tsave);
    EXPECT_NEAR(g[p], area_p, 1e-12 * area_p);
    total += area_p;
  }
  EXPECT_NEAR(total, v.area, 1e-12 * v.area);
}
