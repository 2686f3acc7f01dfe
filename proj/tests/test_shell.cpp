#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffdshell/errors.hpp"
#include "ffdshell/geometry.hpp"
#include "ffdshell/solver.hpp"

using namespace ffdshell;

namespace {

double energy_of(const SystemAssembly& a) { return a.W_int + a.W_pen - a.W_ext; }

Vec random_vector(int n, unsigned seed, double scale) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * N(rng);
  return v;
}

// Doubly curved cubic patch with a varying thickness field.
SystemSpec curved_model(LoadKind kind) {
  SystemSpec s;
  NurbsPatch p = greville_patch(3, 3, 5, 6, [](double u, double v) {
    return Vec3(2.0 * u, 1.5 * v, 0.3 * std::sin(1.2 * u) + 0.2 * v * v);
  }, 0.05);
  for (int k = 0; k < p.num_points(); ++k) p.thickness()[k] = 0.05 + 0.01 * std::cos(k);
  s.patches.push_back(p);
  s.material = {1000.0, 0.3};
  LoadSpec L;
  L.kind = kind;
  L.magnitude = 2.0;
  if (kind == LoadKind::EdgeTraction || kind == LoadKind::BodyForce) L.direction = Vec3(0.2, -0.1, 1.0);
  L.side = Side::u1;
  s.loads.push_back(L);
  return s;
}

}  // namespace

TEST(Kinematics, UniaxialGreenStrain) {
  const Material mat{1.0, 0.0};
  std::array<Vec3, 5> ref = {Vec3::UnitX(), Vec3::UnitY(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, 5> def = ref;
  def[0] = Vec3(1.01, 0, 0);
  const MidsurfaceState s = kinematics(ref, def, mat, 1.0);
  EXPECT_NEAR(s.eps(0, 0), 0.01005, 1e-15);
  EXPECT_NEAR(s.eps(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(s.eps(1, 1), 0.0, 1e-15);
  EXPECT_NEAR(s.kappa.norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.a3.norm(), 1.0, 1e-12);
  ref[1] = Vec3(2, 0, 0);
  EXPECT_THROW(kinematics(ref, def, mat, 1.0), SingularGeometryError);
}

TEST(Kinematics, EnergyDensityMatchesResultants) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  const Material mat{7.0, 0.3};
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Vec3, 5> ref, def;
    for (int i = 0; i < 5; ++i) {
      ref[i] = Vec3(U(rng), U(rng), U(rng));
      def[i] = ref[i] + 0.2 * Vec3(U(rng), U(rng), U(rng));
    }
    ref[0] += Vec3(1, 0, 0);
    ref[1] += Vec3(0, 1, 0);
    def[0] += Vec3(1, 0, 0);
    def[1] += Vec3(0, 1, 0);
    const double t = 0.1;
    const MidsurfaceState s = kinematics(ref, def, mat, t);
    std::array<double, slot::kSize> q{};
    for (int i = 0; i < 5; ++i)
      for (int c = 0; c < 3; ++c) {
        q[3 * i + c] = def[i][c];
        q[slot::kRef + 3 * i + c] = ref[i][c];
      }
    q[slot::kThick] = t;
    const double J = ref[0].cross(ref[1]).norm();
    const double expect = 0.5 * ((s.n.array() * s.eps.array()).sum() + (s.m.array() * s.kappa.array()).sum()) * J;
    EXPECT_NEAR(energy_density(q, mat), expect, 1e-12 * std::abs(expect));
  }
}

TEST(Kinematics, ConstantMembraneResultants) {
  const Material mat{3.0, 0.25};
  std::array<Vec3, 5> ref = {Vec3::UnitX(), Vec3::UnitY(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, 5> def = ref;
  def[0] = Vec3(1.02, 0.01, 0);
  def[1] = Vec3(0.0, 0.97, 0);
  const MidsurfaceState s = kinematics(ref, def, mat, 0.2);
  const Eigen::Matrix2d expect =
      mat.E * 0.2 / (1 - mat.nu * mat.nu) * ((1 - mat.nu) * s.eps + mat.nu * s.eps.trace() * Eigen::Matrix2d::Identity());
  EXPECT_LT((s.n - expect).norm(), 1e-12 * expect.norm());
}

TEST(ShellEnergy, ZeroAndRigidMotions) {
  SystemSpec spec = curved_model(LoadKind::DeadPressure);
  spec.loads.clear();
  CoupledSystem sys(spec);
  const int n = sys.num_dofs();
  EXPECT_LT(std::abs(sys.internal_energy(Vec::Zero(n))), 1e-25);
  // Rigid rotation about an arbitrary axis plus translation.
  const Eigen::Matrix3d Rm = Eigen::AngleAxisd(0.7, Vec3(1, 2, 0.5).normalized()).toRotationMatrix();
  Vec u(n);
  for (int k = 0; k < sys.num_cps(); ++k) {
    const Vec3 X = sys.geometry().segment<3>(3 * k);
    u.segment<3>(3 * k) = Rm * X + Vec3(0.3, -1, 2) - X;
  }
  const double scale = spec.material.E * 0.05 * 3.0;
  EXPECT_LT(std::abs(sys.internal_energy(u)), 1e-10 * scale);
}

TEST(ShellEnergy, UniaxialStretchClosedForm) {
  SystemSpec s;
  s.patches.push_back(flat_patch(Vec3::Zero(), Vec3(2, 0, 0), Vec3(0, 1, 0), 2, 2, 4, 3, 1.0));
  s.material = {1.0, 0.0};
  CoupledSystem sys(s);
  const double e = 0.03;
  Vec u(sys.num_dofs());
  for (int k = 0; k < sys.num_cps(); ++k) u.segment<3>(3 * k) = Vec3(e * sys.geometry()[3 * k], 0, 0);
  const double eps = e + 0.5 * e * e;
  EXPECT_NEAR(sys.internal_energy(u), 0.5 * eps * eps * 2.0, 1e-13);
}

TEST(ShellEnergy, NonpositiveThicknessRejected) {
  SystemSpec spec = curved_model(LoadKind::DeadPressure);
  CoupledSystem sys(spec);
  Vec t = sys.thickness();
  t[3] = -1.0;
  sys.set_thickness(t);
  EXPECT_THROW(sys.internal_energy(Vec::Zero(sys.num_dofs())), ValidationError);
}

class ShellDerivatives : public ::testing::TestWithParam<LoadKind> {};

TEST_P(ShellDerivatives, ResidualTangentAndDesignPartialsMatchFiniteDifferences) {
  const LoadKind kind = GetParam();
  CoupledSystem sys(curved_model(kind));
  const int n = sys.num_dofs();
  const Vec u = random_vector(n, 1, 0.03);
  const SystemAssembly a = sys.assemble(u, kResidual | kTangent | kGeometry);
  const double h = 1e-6;

  // Residual is the gradient of the potential (dead loads and shell part).
  if (kind != LoadKind::FollowerPressure) {
    for (int dir = 0; dir < 20; ++dir) {
      const Vec d = random_vector(n, 100 + dir, 1.0);
      const double fd = (energy_of(sys.assemble(u + h * d, kEnergy)) - energy_of(sys.assemble(u - h * d, kEnergy))) / (2 * h);
      const double an = a.R.dot(d);
      EXPECT_NEAR(an, fd, 1e-6 * std::max(std::abs(an), 1e-3)) << "direction " << dir;
    }
  }
  // Tangent.
  {
    const Vec d = random_vector(n, 7, 1.0);
    const Vec fd = (sys.assemble(u + h * d, kResidual).R - sys.assemble(u - h * d, kResidual).R) / (2 * h);
    EXPECT_LT((a.K * d - fd).norm(), 1e-6 * fd.norm());
  }
  // Geometry partials at fixed u.
  {
    const Vec P0 = sys.geometry();
    const Vec d = random_vector(n, 8, 1.0);
    sys.set_geometry(P0 + h * d);
    const SystemAssembly ap = sys.assemble(u, kResidual | kGeometry);
    sys.set_geometry(P0 - h * d);
    const SystemAssembly am = sys.assemble(u, kResidual | kGeometry);
    sys.set_geometry(P0);
    const Vec fd = (ap.R - am.R) / (2 * h);
    EXPECT_LT((a.dR_dP * d - fd).norm(), 1e-5 * fd.norm());
    EXPECT_NEAR(a.dWint_dP.dot(d), (ap.W_int - am.W_int) / (2 * h), 1e-6 * std::abs(a.dWint_dP.dot(d)));
  }
  // Thickness partials.
  {
    const Vec t0 = sys.thickness();
    const Vec d = random_vector(sys.num_cps(), 9, 0.01);
    sys.set_thickness(t0 + h * d);
    const SystemAssembly ap = sys.assemble(u, kResidual | kGeometry);
    sys.set_thickness(t0 - h * d);
    const SystemAssembly am = sys.assemble(u, kResidual | kGeometry);
    sys.set_thickness(t0);
    const Vec fd = (ap.R - am.R) / (2 * h);
    EXPECT_LT((a.dR_dt * d - fd).norm(), 1e-5 * fd.norm());
    EXPECT_NEAR(a.dWint_dt.dot(d), (ap.W_int - am.W_int) / (2 * h), 1e-6 * std::abs(a.dWint_dt.dot(d)));
  }
}

INSTANTIATE_TEST_SUITE_P(Loads, ShellDerivatives,
                         ::testing::Values(LoadKind::DeadPressure, LoadKind::FollowerPressure, LoadKind::BodyForce,
                                           LoadKind::EdgeTraction));

TEST(ShellTangent, SymmetricForDeadLoads) {
  CoupledSystem sys(curved_model(LoadKind::DeadPressure));
  const SystemAssembly a = sys.assemble(random_vector(sys.num_dofs(), 2, 0.03), kTangent);
  const SpMat asym = a.K - SpMat(a.K.transpose());
  EXPECT_LT(asym.norm(), 1e-12 * a.K.norm());
}

TEST(ShellThickness, MembraneAndBendingScaling) {
  // Uniform thickness: R(t) = t Rm + t^3 Rb, so dR/dt . t = Rm t + 3 Rb t^3.
  SystemSpec spec = curved_model(LoadKind::DeadPressure);
  spec.loads.clear();
  spec.patches[0].set_uniform_thickness(0.05);
  CoupledSystem sys(spec);
  const Vec u = random_vector(sys.num_dofs(), 3, 0.02);
  const Vec t = sys.thickness();
  const SystemAssembly a = sys.assemble(u, kResidual | kGeometry);
  sys.set_thickness(2.0 * t);
  const Vec R2 = sys.assemble(u, kResidual).R;
  const Vec Rb = (R2 - 2.0 * a.R) / 6.0;  // t^3 part at t
  const Vec Rm = a.R - Rb;
  EXPECT_LT((a.dR_dt * t - (Rm + 3.0 * Rb)).norm(), 1e-9 * a.R.norm());

  // In-plane stretch of a flat plate is membrane only.
  SystemSpec flat;
  flat.patches.push_back(flat_patch(Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), 3, 3, 5, 5, 0.1));
  flat.material = {10.0, 0.3};
  CoupledSystem fs(flat);
  Vec uf(fs.num_dofs());
  for (int k = 0; k < fs.num_cps(); ++k)
    uf.segment<3>(3 * k) = Vec3(0.02 * fs.geometry()[3 * k] * fs.geometry()[3 * k + 1], 0.01 * fs.geometry()[3 * k], 0);
  const SystemAssembly af = fs.assemble(uf, kResidual | kGeometry);
  EXPECT_LT((af.dR_dt * fs.thickness() - af.R).norm(), 1e-10 * af.R.norm());
}
