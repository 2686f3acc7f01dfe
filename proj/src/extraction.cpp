#include "ffdshell/extraction.hpp"

#include <sstream>

#include "ffdshell/errors.hpp"

namespace ffdshell {

namespace {

SpMat univariate_extraction(const KnotVector& kv, const std::vector<double>& nodes) {
  TripletList trips;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const BasisEval b = basis_and_derivs(kv, nodes[i], 0);
    for (int a = 0; a <= b.degree; ++a)
      if (b(0, a) != 0.0) trips.emplace_back(static_cast<int>(i), b.first + a, b(0, a));
  }
  SpMat m(static_cast<int>(nodes.size()), kv.num_basis());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

}  // namespace

ExtractionMap build_extraction(const NurbsPatch& patch, int patch_id) {
  ExtractionMap out;
  out.patch = patch_id;
  out.fe = FeSpace(patch.ku(), patch.kv());
  out.nodes = out.fe.node_coords();
  const SpMat mu = univariate_extraction(patch.ku(), lagrange_nodes_1d(patch.ku(), patch.ku().degree()));
  const SpMat mv = univariate_extraction(patch.kv(), lagrange_nodes_1d(patch.kv(), patch.kv().degree()));
  SpMat poly = kron(mu, mv);
  if (patch.unit_weights()) {
    out.M = poly;
  } else {
    // Homogeneous form: scale columns by w, then rows by 1 / W(node).
    Vec w = Eigen::Map<const Vec>(patch.weights().data(), patch.num_points());
    SpMat scaled = poly * w.asDiagonal();
    Vec wfe = scaled * Vec::Ones(patch.num_points());
    out.M = wfe.cwiseInverse().asDiagonal() * scaled;
    out.fe.set_nodal_weights(std::vector<double>(wfe.data(), wfe.data() + wfe.size()));
  }
  out.M.makeCompressed();
  if (out.M.rows() < out.M.cols()) throw SolverError("extraction: fewer Lagrange nodes than spline functions");
  return out;
}

SplineProjector::SplineProjector(const SpMat& M) : M_(M) {
  M_.makeCompressed();
  qr_ = std::make_shared<Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>>>();
  qr_->compute(M_);
  if (qr_->info() != Eigen::Success) throw SolverError("extraction: QR factorization failed");
  if (qr_->rank() < M_.cols()) {
    std::ostringstream os;
    os << "extraction: matrix rank " << qr_->rank() << " below column count " << M_.cols();
    throw SolverError(os.str());
  }
}

Mat SplineProjector::solve(const Mat& rhs, double* residual) const {
  Mat x = qr_->solve(rhs);
  if (residual) *residual = rhs.size() ? (M_ * x - rhs).cwiseAbs().maxCoeff() : 0.0;
  return x;
}

Vec SplineProjector::solve(const Vec& rhs, double* residual) const {
  Vec x = qr_->solve(rhs);
  if (residual) *residual = rhs.size() ? (M_ * x - rhs).cwiseAbs().maxCoeff() : 0.0;
  return x;
}

SpMat build_ffd_eval(const BsplineVolume& block, const std::vector<Vec3>& points, int patch_id) {
  TripletList trips;
  for (std::size_t i = 0; i < points.size(); ++i) {
    SparseRow row;
    try {
      row = basis_row(block, points[i]);
    } catch (const ContainmentError& e) {
      std::ostringstream os;
      os << "patch " << patch_id << ", node " << i << ": " << e.what();
      throw ContainmentError(os.str());
    }
    for (std::size_t k = 0; k < row.index.size(); ++k)
      if (row.value[k] != 0.0) trips.emplace_back(static_cast<int>(i), row.index[k], row.value[k]);
  }
  SpMat a(static_cast<int>(points.size()), block.num_points());
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

}  // namespace ffdshell
