#include <gtest/gtest.h>

#include <cmath>

#include "ffdshell/errors.hpp"
#include "ffdshell/geometry.hpp"
#include "ffdshell/solver.hpp"

using namespace ffdshell;

namespace {

LoadSpec pressure(double p) {
  LoadSpec L;
  L.kind = LoadKind::DeadPressure;
  L.magnitude = p;
  return L;
}

BoundarySpec clamp(int patch, Side side) {
  BoundarySpec b;
  b.patch = patch;
  b.side = side;
  return b;
}

// Displacement field of one patch evaluated as a spline with the same basis.
Vec3 displacement_at(const CoupledSystem& sys, const Vec& u, int patch, double s, double t) {
  const NurbsPatch& p = sys.spec().patches[patch];
  std::vector<Vec3> coef(p.num_points());
  for (int k = 0; k < p.num_points(); ++k) coef[k] = u.segment<3>(3 * (sys.cp_offset(patch) + k));
  return eval_surface(NurbsPatch(p.ku(), p.kv(), coef, p.weights(), {1.0}), s, t, 0).x;
}

// Cantilever plate [0, 1] x [0, 0.5] under uniform pressure, optionally split
// at x = 0.5 into two patches with non-matching meshes.
SystemSpec cantilever(bool split, double alpha = 1e3) {
  SystemSpec s;
  s.material = {1e6, 0.3};
  s.alpha = alpha;
  s.loads.push_back(pressure(-2e-2));
  s.boundary.push_back(clamp(0, Side::u0));
  if (!split) {
    s.patches.push_back(flat_patch(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 0.5, 0), 3, 3, 11, 6, 0.02));
    return s;
  }
  s.patches.push_back(flat_patch(Vec3::Zero(), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 3, 3, 7, 6, 0.02));
  s.patches.push_back(flat_patch(Vec3(0.5, 0, 0), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 3, 3, 8, 7, 0.02));
  IntersectionSpec is;
  is.patch_a = 0;
  is.patch_b = 1;
  is.curve_a = {Vec2(1, 0), Vec2(1, 1)};
  is.curve_b = {Vec2(0, 0), Vec2(0, 1)};
  s.intersections.push_back(is);
  return s;
}

double tip_deflection(bool split, double alpha = 1e3) {
  CoupledSystem sys(cantilever(split, alpha));
  Vec u;
  const SolveReport r = newton_solve(sys, u);
  EXPECT_TRUE(r.converged) << r.message;
  return displacement_at(sys, u, split ? 1 : 0, 1.0, 0.5)[2];
}

}  // namespace

TEST(Newton, ClampedSquarePlateCenterDeflection) {
  // Kirchhoff series solution: w_max = 0.00126532 q a^4 / D.
  SystemSpec s;
  const double E = 1e6, nu = 0.3, t = 0.01, q = 1e-3;
  s.material = {E, nu};
  s.patches.push_back(flat_patch(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 3, 3, 19, 19, t));
  s.loads.push_back(pressure(q));
  for (Side side : {Side::u0, Side::u1, Side::v0, Side::v1}) s.boundary.push_back(clamp(0, side));
  CoupledSystem sys(s);
  Vec u;
  const SolveReport r = newton_solve(sys, u);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_LE(r.iterations, 3);  // one extra step removes the small membrane coupling residual
  const double D = E * t * t * t / (12 * (1 - nu * nu));
  const double expect = 0.00126532 * q / D;
  const double w = displacement_at(sys, u, 0, 0.5, 0.5)[2];
  EXPECT_NEAR(std::abs(w), expect, 0.02 * expect);
  EXPECT_GT(w, 0.0);  // pressure acts along the reference normal
}

TEST(Newton, NonlinearCantileverConvergesWithLoadSteps) {
  SystemSpec s = cantilever(false);
  s.loads[0].magnitude = -2.0;  // large rotation regime
  CoupledSystem sys(s);
  Vec u;
  NewtonOptions opt;
  opt.load_steps = 4;
  const SolveReport r = newton_solve(sys, u, opt);
  ASSERT_TRUE(r.converged) << r.message;
  const double tip = displacement_at(sys, u, 0, 1.0, 0.5)[2];
  // Beyond the linear prediction regime but still bounded by the length.
  EXPECT_LT(tip, -0.1);
  EXPECT_GT(tip, -1.0);
  const Vec R = sys.assemble(u, kResidual).R;
  EXPECT_LT(restrict_to(R, sys.free_dofs()).norm(), 1e-8 * std::abs(s.loads[0].magnitude));
}

TEST(Newton, UnconstrainedModelIsSingular) {
  SystemSpec s = cantilever(false);
  s.boundary.clear();
  CoupledSystem sys(s);
  Vec u;
  EXPECT_THROW(newton_solve(sys, u), SolverError);
}

TEST(Boundary, ContradictoryAndEmptySpecsRejected) {
  SystemSpec s = cantilever(false);
  BoundarySpec pin = clamp(0, Side::u0);
  pin.style = BoundarySpec::Style::Pin;
  s.boundary.push_back(pin);
  EXPECT_THROW(CoupledSystem{s}, ValidationError);
  s.boundary.pop_back();
  BoundarySpec none = clamp(0, Side::u1);
  none.components = {false, false, false};
  s.boundary.push_back(none);
  EXPECT_THROW(CoupledSystem{s}, ValidationError);
  s.boundary.pop_back();
  s.boundary.push_back(clamp(0, Side::u0));  // exact duplicate is harmless
  EXPECT_NO_THROW(CoupledSystem{s});
}

TEST(Boundary, ClampFixesTwoRowsPinOne) {
  SystemSpec s = cantilever(false);
  const int nv = s.patches[0].kv().num_basis();
  EXPECT_EQ(CoupledSystem(s).fixed_dofs().size(), static_cast<std::size_t>(3 * 2 * nv));
  s.boundary[0].style = BoundarySpec::Style::Pin;
  s.boundary[0].components = {false, false, true};
  EXPECT_EQ(CoupledSystem(s).fixed_dofs().size(), static_cast<std::size_t>(nv));
}

TEST(ExtractionPath, EnergyMatchesDirectSplineQuadrature) {
  // Rational cylindrical panel; the FE-space energy must equal quadrature
  // carried out directly on the NURBS geometry and displacement.
  const double w = std::sqrt(0.5);
  const KnotVector ku(2, {0, 0, 0, 1, 1, 1}), kv = uniform_knots(3, 5);
  std::vector<Vec3> pts;
  std::vector<double> wts;
  const Vec3 arc[3] = {Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) {
      pts.push_back(arc[i] + Vec3(0, 0, kv.greville()[j]));
      wts.push_back(i == 1 ? w : 1.0);
    }
  NurbsPatch panel(ku, kv, pts, wts, {0.05});
  SystemSpec s;
  s.patches.push_back(panel);
  s.material = {100.0, 0.25};
  CoupledSystem sys(s);
  Vec u(sys.num_dofs());
  for (int k = 0; k < sys.num_cps(); ++k)
    u.segment<3>(3 * k) = 0.03 * Vec3(std::sin(k), std::cos(2.0 * k), std::sin(0.5 * k));

  std::vector<Vec3> def(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) def[k] = pts[k] + u.segment<3>(3 * k);
  const NurbsPatch deformed(ku, kv, def, wts, {0.05});
  const GaussRule g = gauss_legendre(4);
  double direct = 0.0;
  for (int ev = 0; ev < kv.num_elements(); ++ev) {
    const double v0 = kv.breaks()[ev], dv = kv.breaks()[ev + 1] - v0;
    for (std::size_t a = 0; a < g.x.size(); ++a)
      for (std::size_t b = 0; b < g.x.size(); ++b) {
        const double uu = g.x[a], vv = v0 + dv * g.x[b];
        const SurfacePoint X = eval_surface(panel, uu, vv), x = eval_surface(deformed, uu, vv);
        std::array<double, slot::kSize> q{};
        const Vec3* xs[5] = {&x.du, &x.dv, &x.duu, &x.duv, &x.dvv};
        const Vec3* Xs[5] = {&X.du, &X.dv, &X.duu, &X.duv, &X.dvv};
        for (int i = 0; i < 5; ++i)
          for (int c = 0; c < 3; ++c) {
            q[3 * i + c] = (*xs[i])[c];
            q[slot::kRef + 3 * i + c] = (*Xs[i])[c];
          }
        q[slot::kThick] = 0.05;
        direct += g.w[a] * g.w[b] * dv * energy_density(q, s.material);
      }
  }
  EXPECT_NEAR(sys.internal_energy(u), direct, 1e-10 * direct);
}

TEST(Coupling, SplitPlateMatchesSinglePatch) {
  const double single = tip_deflection(false);
  const double split = tip_deflection(true);
  EXPECT_NEAR(split, single, 0.01 * std::abs(single));
}

TEST(Coupling, PenaltyInsensitivity) {
  const double w2 = tip_deflection(true, 1e2), w3 = tip_deflection(true, 1e3), w4 = tip_deflection(true, 1e4);
  const double w3b = tip_deflection(true, 2e3);
  EXPECT_NEAR(w2, w3, 0.01 * std::abs(w3));
  EXPECT_NEAR(w4, w3, 0.01 * std::abs(w3));
  EXPECT_NEAR(w3b, w3, 0.005 * std::abs(w3));
}
