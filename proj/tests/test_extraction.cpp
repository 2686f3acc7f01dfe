#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffdshell/errors.hpp"
#include "ffdshell/extraction.hpp"
#include "ffdshell/geometry.hpp"

using namespace ffdshell;

namespace {

NurbsPatch random_cubic_patch(unsigned seed, bool rational) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-0.1, 0.1), W(0.6, 1.6);
  NurbsPatch base = greville_patch(3, 3, 7, 6, [](double u, double v) { return Vec3(u, v, 0.2 * u * v); }, 0.1);
  std::vector<Vec3> pts = base.points();
  for (auto& p : pts) p += Vec3(U(rng), U(rng), U(rng));
  std::vector<double> w(pts.size(), 1.0);
  if (rational)
    for (auto& x : w) x = W(rng);
  return NurbsPatch(base.ku(), base.kv(), pts, w, {0.1});
}

Mat dense_points(const std::vector<Vec3>& pts) {
  Mat m(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) m.row(i) = pts[i].transpose();
  return m;
}

}  // namespace

TEST(Extraction, QuadraticSingleElement) {
  const KnotVector k(2, {0, 0, 0, 1, 1, 1});
  const KnotVector kl(1, {0, 0, 1, 1});
  NurbsPatch p(k, kl, std::vector<Vec3>(6, Vec3::Zero()), {}, {1.0});
  const ExtractionMap e = build_extraction(p);
  // Tensor layout: the u-factor appears on rows/cols with v index fixed.
  const Mat M = Mat(e.M);
  const double expect[3][3] = {{1, 0, 0}, {0.25, 0.5, 0.25}, {0, 0, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(M(2 * i, 2 * j), expect[i][j], 1e-15);
}

TEST(Extraction, LinearIsIdentity) {
  const NurbsPatch p = flat_patch(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 1, 1, 4, 3, 1.0);
  const ExtractionMap e = build_extraction(p);
  EXPECT_LT((Mat(e.M) - Mat::Identity(12, 12)).norm(), 1e-14);
}

TEST(Extraction, NodalRoundTrip) {
  for (bool rational : {false, true}) {
    const NurbsPatch p = random_cubic_patch(11, rational);
    const ExtractionMap e = build_extraction(p);
    const Mat PFE = e.M * dense_points(p.points());
    for (std::size_t i = 0; i < e.nodes.size(); ++i) {
      const Vec3 s = eval_surface(p, e.nodes[i][0], e.nodes[i][1], 0).x;
      EXPECT_LT((PFE.row(i).transpose() - s).norm(), 1e-12);
    }
    const Vec rowsum = e.M * Vec::Ones(e.M.cols());
    EXPECT_LT((rowsum - Vec::Ones(e.M.rows())).norm(), 1e-12);
  }
}

TEST(Extraction, BasisIdentityAtRandomPoints) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (bool rational : {false, true}) {
    const NurbsPatch p = random_cubic_patch(3, rational);
    const ExtractionMap e = build_extraction(p);
    const Mat Mt = Mat(e.M).transpose();
    for (int trial = 0; trial < 100; ++trial) {
      const double u = U(rng), v = U(rng);
      const SurfaceBasis R = rational_basis(p, u, v);
      const SurfaceBasis F = e.fe.basis(u, v);
      for (int s = 0; s < 6; ++s) {
        Vec nfe = Vec::Zero(e.M.rows()), niga = Vec::Zero(e.M.cols());
        for (int k = 0; k < F.size(); ++k) nfe[F.index[k]] = F.d[s][k];
        for (int k = 0; k < R.size(); ++k) niga[R.index[k]] = R.d[s][k];
        EXPECT_LT((Mt * nfe - niga).lpNorm<Eigen::Infinity>(), 1e-10 * std::max(1.0, niga.lpNorm<Eigen::Infinity>()))
            << "slot " << s;
      }
    }
  }
}

TEST(Projection, RoundTripAndOrthogonalPerturbation) {
  const NurbsPatch p = random_cubic_patch(9, false);
  const ExtractionMap e = build_extraction(p);
  const SplineProjector proj(e.M);
  std::mt19937 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  Mat Q(e.M.cols(), 3);
  for (int i = 0; i < Q.size(); ++i) Q.data()[i] = N(rng);
  double res = 1.0;
  const Mat back = proj.solve(Mat(e.M * Q), &res);
  EXPECT_LT((back - Q).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(res, 1e-10);

  // Component of a random vector orthogonal to range(M).
  Vec r(e.M.rows());
  for (int i = 0; i < r.size(); ++i) r[i] = N(rng);
  const Mat Md = Mat(e.M);
  const Vec orth = r - Md * (Md.colPivHouseholderQr().solve(r));
  const Vec base = e.M * Q.col(0);
  EXPECT_LT((proj.solve(Vec(base + orth)) - Q.col(0)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Projection, LinearPatchTranslation) {
  const NurbsPatch p = flat_patch(Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), 1, 1, 3, 3, 1.0);
  const ExtractionMap e = build_extraction(p);
  const SplineProjector proj(e.M);
  Mat nodes = e.M * dense_points(p.points());
  nodes.rowwise() += Eigen::RowVector3d(0.3, -0.2, 1.0);
  const Mat back = proj.solve(nodes);
  for (int i = 0; i < p.num_points(); ++i)
    EXPECT_LT((back.row(i).transpose() - p.points()[i] - Vec3(0.3, -0.2, 1.0)).norm(), 1e-12);
}

TEST(FfdEval, IdentityBlockReproducesPoints) {
  const KnotVector k(1, {0, 0, 1, 1});
  std::vector<Vec3> pts;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l) pts.emplace_back(i, j, l);
  const BsplineVolume vol(k, k, k, pts);
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec3> x;
  for (int i = 0; i < 50; ++i) x.emplace_back(U(rng), U(rng), U(rng));
  const SpMat A = build_ffd_eval(vol, x);
  const Mat P = dense_points(pts);
  const Mat AP = A * P;
  for (int i = 0; i < 50; ++i) EXPECT_LT((AP.row(i).transpose() - x[i]).norm(), 1e-12);
  const Vec rs = A * Vec::Ones(8);
  EXPECT_LT((rs - Vec::Ones(50)).norm(), 1e-13);
  // Translation of the lattice translates the image.
  Mat Pt = P;
  Pt.rowwise() += Eigen::RowVector3d(1, 2, 3);
  const Mat APt = A * Pt;
  EXPECT_LT(((APt - AP).rowwise() - Eigen::RowVector3d(1, 2, 3)).cwiseAbs().maxCoeff(), 1e-14);
  x.emplace_back(0.5, 0.5, 1.2);
  try {
    build_ffd_eval(vol, x, 4);
    FAIL();
  } catch (const ContainmentError& e) {
    EXPECT_NE(std::string(e.what()).find("patch 4, node 50"), std::string::npos);
  }
}
