#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffdshell/errors.hpp"
#include "ffdshell/geometry.hpp"
#include "ffdshell/solver.hpp"

using namespace ffdshell;

namespace {

Vec random_vector(int n, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * N(rng);
  return v;
}

// Unit square split at x = 0.5 into two cubic patches; B is finer in v.
SystemSpec split_square(int nv_b = 5) {
  SystemSpec s;
  s.patches.push_back(flat_patch(Vec3(0, 0, 0), Vec3(0.5, 0, 0), Vec3(0, 1, 0), 3, 3, 5, 7, 0.1));
  s.patches.push_back(flat_patch(Vec3(0.5, 0, 0), Vec3(0.5, 0, 0), Vec3(0, 1, 0), 3, 3, 5, nv_b + 3, 0.1));
  s.material = {1e7, 0.0};
  IntersectionSpec is;
  is.patch_a = 0;
  is.patch_b = 1;
  is.curve_a = {Vec2(1, 0), Vec2(1, 1)};
  is.curve_b = {Vec2(0, 0), Vec2(0, 1)};
  s.intersections.push_back(is);
  return s;
}

// T-junction: a vertical web standing on a horizontal flange.
SystemSpec t_junction() {
  SystemSpec s;
  s.patches.push_back(greville_patch(3, 2, 6, 5, [](double u, double v) { return Vec3(u, v, 0.1 * u * v); }, 0.05));
  s.patches.push_back(flat_patch(Vec3(0.5, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 0.4), 2, 3, 4, 5, 0.04));
  // Web base follows the flange surface exactly at u = 0.5: z = 0.05 v.
  {
    NurbsPatch& web = s.patches[1];
    std::vector<Vec3> pts = web.points();
    for (int i = 0; i < web.ku().num_basis(); ++i) pts[web.index(i, 0)][2] = 0.05 * web.ku().greville()[i];
    web = NurbsPatch(web.ku(), web.kv(), pts, {}, {0.04});
  }
  s.material = {2000.0, 0.3};
  IntersectionSpec is;
  is.patch_a = 0;
  is.patch_b = 1;
  is.curve_a = {Vec2(0.5, 0), Vec2(0.5, 1)};
  is.curve_b = {Vec2(0, 0), Vec2(1, 0)};
  s.intersections.push_back(is);
  return s;
}

}  // namespace

TEST(PenaltyParameters, HandValues) {
  const Material m{1e7, 0.0};
  EXPECT_NEAR(penalty_alpha_d(1000.0, m, 0.1, 0.2), 5e9, 1e-3);
  EXPECT_NEAR(penalty_alpha_r(1000.0, m, 0.1, 0.2), 1000.0 * 1e7 * 1e-3 / (12 * 0.2), 1e-6);
  EXPECT_NEAR(penalty_alpha_r(1000.0, m, 0.1, 0.2), 4.1667e6, 1e2);
}

TEST(ElementSizes, SquareMeshRefinement) {
  const NurbsPatch p4 = flat_patch(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 2, 2, 6, 6, 0.1);
  const NurbsPatch p8 = flat_patch(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 2, 2, 10, 10, 0.1);
  for (double h : element_sizes(p4, build_extraction(p4).fe)) EXPECT_NEAR(h, 0.25, 1e-13);
  for (double h : element_sizes(p8, build_extraction(p8).fe)) EXPECT_NEAR(h, 0.125, 1e-13);
}

TEST(CouplingMesh, MatchingEdgeTransfers) {
  CoupledSystem sys(split_square());
  const IntersectionCoupling& c = sys.couplings().at(0);
  EXPECT_LT(c.max_gap, 1e-12);
  // Default mesh: twice the 5 elements crossed on the finer patch.
  EXPECT_EQ(c.num_elements(), 10);
  for (const SpMat* T : {&c.T0a, &c.T0b}) {
    const Vec s = *T * Vec::Ones(T->cols());
    EXPECT_LT((s - Vec::Ones(s.size())).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (const SpMat* T : {&c.T1a, &c.T1b}) {
    const Vec s = *T * Vec::Ones(T->cols());
    EXPECT_LT(s.cwiseAbs().maxCoeff(), 1e-11);
  }
  for (int n = 0; n <= c.num_elements(); ++n) {
    EXPECT_NEAR(c.xi_a[n][0], 1.0, 1e-14);
    EXPECT_NEAR(c.xi_b[n][0], 0.0, 1e-12);
    EXPECT_NEAR(c.xi_a[n][1], c.xi_b[n][1], 1e-10);
  }
}

TEST(CouplingMesh, GapIsRejected) {
  SystemSpec s = split_square();
  s.intersections[0].curve_b = {Vec2(0.1, 0), Vec2(0.1, 1)};
  EXPECT_THROW(CoupledSystem{s}, IntersectionError);
}

TEST(PenaltyEnergy, UniformJumpHandIntegration) {
  SystemSpec s = split_square(4);  // both sides 0.25 x 0.25 elements
  CoupledSystem sys(s);
  const double delta = 1e-3;
  Vec u = Vec::Zero(sys.num_dofs());
  for (int k = 0; k < s.patches[0].num_points(); ++k) u[3 * k] = delta;
  const double ad = penalty_alpha_d(s.alpha, s.material, 0.1, 0.25);
  EXPECT_NEAR(sys.assemble(u, kEnergy).W_pen, 0.5 * ad * delta * delta * 1.0, 1e-10 * ad * delta * delta);
}

TEST(PenaltyEnergy, RigidMotionIsFree) {
  CoupledSystem sys(t_junction());
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.4, Vec3(0.3, -1, 2).normalized()).toRotationMatrix();
  Vec u(sys.num_dofs());
  for (int k = 0; k < sys.num_cps(); ++k) {
    const Vec3 X = sys.geometry().segment<3>(3 * k);
    u.segment<3>(3 * k) = R * X + Vec3(1, 2, -0.5) - X;
  }
  const SystemAssembly a = sys.assemble(u, kEnergy | kResidual);
  const double ref = sys.assemble(random_vector(sys.num_dofs(), 5, 0.01), kEnergy).W_pen;
  EXPECT_LT(a.W_pen, 1e-10 * ref);
}

TEST(PenaltyEnergy, LinearInAlpha) {
  SystemSpec s = t_junction();
  const Vec u = random_vector(3 * (s.patches[0].num_points() + s.patches[1].num_points()), 3, 0.01);
  s.alpha = 1e2;
  const double w1 = CoupledSystem(s).assemble(u, kEnergy).W_pen;
  s.alpha = 1e4;
  const double w2 = CoupledSystem(s).assemble(u, kEnergy).W_pen;
  EXPECT_GT(w1, 0.0);
  EXPECT_NEAR(w2 / w1, 100.0, 1e-10);
}

TEST(PenaltyEnergy, InvariantUnderLabelSwapAndReversal) {
  // Affine displacement: every interpolated field along the line is exact,
  // so both labelings evaluate the same integrand.
  const SystemSpec s = t_junction();
  const Eigen::Matrix3d G = Eigen::Matrix3d::Random() * 0.05;
  Vec u(3 * (s.patches[0].num_points() + s.patches[1].num_points()));
  int k = 0;
  for (const NurbsPatch& p : s.patches)
    for (const Vec3& X : p.points()) u.segment<3>(3 * k++) = G * X + Vec3(0.01, 0, 0.02);
  const double w = CoupledSystem(s).assemble(u, kEnergy).W_pen;

  SystemSpec r = s;
  std::reverse(r.intersections[0].curve_b.begin(), r.intersections[0].curve_b.end());
  EXPECT_NEAR(CoupledSystem(r).assemble(u, kEnergy).W_pen, w, 1e-9 * w);

  // Swapping labels means B's polyline drives the mesh; the meshes coincide
  // physically because nodes are placed by arclength on a straight line.
  SystemSpec sw = s;
  IntersectionSpec& is = sw.intersections[0];
  std::swap(is.patch_a, is.patch_b);
  std::swap(is.curve_a, is.curve_b);
  EXPECT_NEAR(CoupledSystem(sw).assemble(u, kEnergy).W_pen, w, 1e-9 * w);
}

TEST(PenaltyDerivatives, MatchFiniteDifferences) {
  SystemSpec s = t_junction();
  CoupledSystem sys(s);
  const int n = sys.num_dofs();
  const Vec u = random_vector(n, 11, 0.02);
  const SystemAssembly a = sys.assemble(u, kEnergy | kResidual | kTangent | kGeometry);
  const double h = 1e-6;
  for (int dir = 0; dir < 10; ++dir) {
    const Vec d = random_vector(n, 200 + dir, 1.0);
    const SystemAssembly p = sys.assemble(u + h * d, kEnergy | kResidual), m = sys.assemble(u - h * d, kEnergy | kResidual);
    const double fd = (p.W_int + p.W_pen - m.W_int - m.W_pen) / (2 * h);
    EXPECT_NEAR(a.R.dot(d), fd, 1e-6 * std::abs(fd));
    const Vec fdR = (p.R - m.R) / (2 * h);
    EXPECT_LT((a.K * d - fdR).norm(), 1e-6 * fdR.norm());
  }
  const Vec P0 = sys.geometry();
  const Vec d = random_vector(n, 12, 1.0);
  sys.set_geometry(P0 + h * d);
  const Vec Rp = sys.assemble(u, kResidual).R;
  sys.set_geometry(P0 - h * d);
  const Vec Rm = sys.assemble(u, kResidual).R;
  sys.set_geometry(P0);
  EXPECT_LT((a.dR_dP * d - (Rp - Rm) / (2 * h)).norm(), 1e-5 * ((Rp - Rm) / (2 * h)).norm());

  const Vec t0 = sys.thickness();
  const Vec dt = random_vector(sys.num_cps(), 13, 0.005);
  sys.set_thickness(t0 + h * dt);
  const Vec Rtp = sys.assemble(u, kResidual).R;
  sys.set_thickness(t0 - h * dt);
  const Vec Rtm = sys.assemble(u, kResidual).R;
  sys.set_thickness(t0);
  EXPECT_LT((a.dR_dt * dt - (Rtp - Rtm) / (2 * h)).norm(), 1e-5 * ((Rtp - Rtm) / (2 * h)).norm());
  const SpMat asym = a.K - SpMat(a.K.transpose());
  EXPECT_LT(asym.norm(), 1e-10 * a.K.norm());
}
