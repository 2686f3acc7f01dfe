#include "ffdshell/ffd.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "ffdshell/errors.hpp"

namespace ffdshell {

Vec FfdBlock::lattice() const {
  Vec L(3 * num_points());
  for (int i = 0; i < num_points(); ++i) L.segment<3>(3 * i) = volume.points()[i];
  return L;
}

FfdBlock build_identity_block(const Vec3& lo, const Vec3& hi, std::array<int, 3> degree, std::array<int, 3> shape) {
  for (int d = 0; d < 3; ++d) {
    if (!(hi[d] > lo[d])) throw ValidationError("FFD block is degenerate in direction " + std::to_string(d));
    if (degree[d] < 1 || shape[d] < degree[d] + 1)
      throw ValidationError("FFD block direction " + std::to_string(d) + " needs at least degree + 1 control points");
  }
  std::array<KnotVector, 3> kv;
  std::array<std::vector<double>, 3> g;
  for (int d = 0; d < 3; ++d) {
    kv[d] = KnotVector::open_uniform(degree[d], shape[d] - degree[d], lo[d], hi[d]);
    g[d] = kv[d].greville();
  }
  std::vector<Vec3> pts;
  pts.reserve(shape[0] * shape[1] * shape[2]);
  for (int i = 0; i < shape[0]; ++i)
    for (int j = 0; j < shape[1]; ++j)
      for (int k = 0; k < shape[2]; ++k) pts.emplace_back(g[0][i], g[1][j], g[2][k]);
  FfdBlock b;
  b.lo = lo;
  b.hi = hi;
  b.degree = degree;
  b.volume = BsplineVolume(kv[0], kv[1], kv[2], std::move(pts));
  return b;
}

FfdBlock enclosing_block(const CoupledSystem& sys, const std::vector<int>& patches, std::array<int, 3> degree,
                         std::array<int, 3> shape, double margin) {
  if (patches.empty()) throw ValidationError("FFD block has no member patches");
  Vec3 lo = Vec3::Constant(INFINITY), hi = Vec3::Constant(-INFINITY);
  for (int p : patches) {
    const Vec x = sys.patch_nodes(p, sys.geometry());
    for (int n = 0; n < x.size() / 3; ++n) {
      lo = lo.cwiseMin(x.segment<3>(3 * n));
      hi = hi.cwiseMax(x.segment<3>(3 * n));
    }
  }
  const Vec3 ext = hi - lo;
  const double big = ext.maxCoeff();
  for (int d = 0; d < 3; ++d) {
    const double pad = margin * (ext[d] > 1e-9 * big ? ext[d] : big);
    lo[d] -= pad;
    hi[d] += pad;
  }
  return build_identity_block(lo, hi, degree, shape);
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Reduction reduce_variables(std::array<int, 3> shape, int ncomp, std::array<bool, 3> active,
                           const std::vector<LatticeConstraint>& constraints) {
  if (ncomp != 1 && ncomp != 3) throw ValidationError("lattice reduction needs 1 or 3 components");
  const int nL = shape[0] * shape[1] * shape[2];
  const int n = ncomp * nL;
  auto idx = [&](int i, int j, int k) { return (i * shape[1] + j) * shape[2] + k; };
  auto comp_active = [&](int c) { return ncomp == 1 || active[c]; };

  UnionFind uf(n);
  std::vector<char> fixed(n, 0);
  for (int e = 0; e < n; ++e)
    if (!comp_active(e % ncomp)) fixed[e] = 1;

  for (const LatticeConstraint& lc : constraints) {
    if (lc.axis < 0 || lc.axis > 2) throw ValidationError("lattice constraint axis must be 0, 1 or 2");
    const int a = lc.axis, b = (a + 1) % 3, c2 = (a + 2) % 3;
    std::vector<int> comps;
    for (int c = 0; c < ncomp; ++c)
      if (ncomp == 1 || lc.components[c]) comps.push_back(c);
    switch (lc.kind) {
      case LatticeConstraint::Kind::FixLayer: {
        const int layer = lc.layer < 0 ? shape[a] + lc.layer : lc.layer;
        if (layer < 0 || layer >= shape[a])
          throw ValidationError("fixed layer " + std::to_string(lc.layer) + " is outside the lattice along axis " +
                                std::to_string(a));
        for (int i = 0; i < shape[b]; ++i)
          for (int j = 0; j < shape[c2]; ++j) {
            std::array<int, 3> ijk{};
            ijk[a] = layer;
            ijk[b] = i;
            ijk[c2] = j;
            for (int c : comps) fixed[ncomp * idx(ijk[0], ijk[1], ijk[2]) + c] = 1;
          }
        break;
      }
      case LatticeConstraint::Kind::CollinearLine:
        if (ncomp == 1) throw ValidationError("collinear-line constraints apply to shape lattices only");
        if (lc.components[a])
          throw ValidationError("collinear-line constraint along axis " + std::to_string(a) +
                                " cannot tie the axial component");
        [[fallthrough]];
      case LatticeConstraint::Kind::EqualAlongAxis:
        for (int i = 0; i < shape[b]; ++i)
          for (int j = 0; j < shape[c2]; ++j)
            for (int s = 1; s < shape[a]; ++s) {
              std::array<int, 3> p{}, q{};
              p[a] = s - 1;
              q[a] = s;
              p[b] = q[b] = i;
              p[c2] = q[c2] = j;
              for (int c : comps) uf.unite(ncomp * idx(p[0], p[1], p[2]) + c, ncomp * idx(q[0], q[1], q[2]) + c);
            }
        break;
    }
  }

  // A class with any fixed member is fixed as a whole.
  std::vector<char> root_fixed(n, 0);
  for (int e = 0; e < n; ++e)
    if (fixed[e]) root_fixed[uf.find(e)] = 1;
  std::map<int, int> column;
  Reduction red;
  TripletList trips;
  for (int e = 0; e < n; ++e) {
    const int r = uf.find(e);
    if (root_fixed[r]) continue;
    auto it = column.find(r);
    if (it == column.end()) {
      it = column.emplace(r, static_cast<int>(red.groups.size())).first;
      red.groups.emplace_back();
    }
    red.groups[it->second].push_back(e);
    trips.emplace_back(e, it->second, 1.0);
  }
  red.R.resize(n, static_cast<int>(red.groups.size()));
  red.R.setFromTriplets(trips.begin(), trips.end());
  return red;
}

FfdMap build_ffd_map(const CoupledSystem& sys, const FfdBlock& block, const std::vector<int>& patches) {
  FfdMap map;
  map.patches = patches;
  const Vec L = block.lattice();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> Lm(L.data(), block.num_points(), 3);
  for (int p : patches) {
    if (p < 0 || p >= sys.num_patches()) throw ValidationError("FFD block references missing patch " + std::to_string(p));
    const Vec x = sys.patch_nodes(p, sys.geometry());
    std::vector<Vec3> pts(x.size() / 3);
    for (std::size_t n = 0; n < pts.size(); ++n) pts[n] = x.segment<3>(3 * n);
    const SpMat A = build_ffd_eval(block.volume, pts, p);
    const SplineProjector proj(sys.extraction(p).M);
    Mat D = proj.solve(Mat(A));
    const int off = sys.cp_offset(p);
    const int ncp = static_cast<int>(D.rows());
    const Mat fit = D * Lm;
    double res = 0.0;
    for (int k = 0; k < ncp; ++k)
      res = std::max(res, (fit.row(k).transpose() - sys.geometry().segment<3>(3 * (off + k))).norm());
    map.D.push_back(std::move(D));
    map.residual.push_back(res);
  }
  return map;
}

void apply_ffd_shape(const FfdMap& map, const CoupledSystem& sys, const Vec& lattice3, Vec& P) {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>> Lm(lattice3.data(),
                                                                                       lattice3.size() / 3, 3);
  for (std::size_t i = 0; i < map.patches.size(); ++i) {
    const Mat Pp = map.D[i] * Lm;
    const int off = sys.cp_offset(map.patches[i]);
    for (int k = 0; k < Pp.rows(); ++k) P.segment<3>(3 * (off + k)) = Pp.row(k).transpose();
  }
}

std::vector<double> intersection_gaps(const CoupledSystem& sys) {
  std::vector<double> gaps;
  for (const IntersectionCoupling& c : sys.couplings()) {
    const NurbsPatch a = sys.current_patch(c.patch_a), b = sys.current_patch(c.patch_b);
    double g = 0.0;
    for (std::size_t n = 0; n < c.xi_a.size(); ++n)
      g = std::max(g, (eval_surface(a, c.xi_a[n][0], c.xi_a[n][1], 0).x -
                       eval_surface(b, c.xi_b[n][0], c.xi_b[n][1], 0).x)
                          .norm());
    gaps.push_back(g);
  }
  return gaps;
}

DesignSpace::DesignSpace(const CoupledSystem& sys, DesignSpec spec) : spec_(std::move(spec)) {
  P0_ = sys.geometry();
  t0_ = sys.thickness();
  const int np = sys.num_patches();
  std::vector<int> shape_owner(np, -1), thick_owner(np, -1);
  auto claim = [np](std::vector<int>& owner, int p, int who, const char* what) {
    if (p < 0 || p >= np) throw ValidationError(std::string(what) + " references missing patch " + std::to_string(p));
    if (owner[p] >= 0) throw ValidationError("patch " + std::to_string(p) + " belongs to more than one " + what);
    owner[p] = who;
  };

  std::vector<Vec> shape_cols, thick_cols;
  for (std::size_t bi = 0; bi < spec_.shape.size(); ++bi) {
    const ShapeBlockSpec& b = spec_.shape[bi];
    for (int p : b.patches) claim(shape_owner, p, static_cast<int>(bi), "shape block");
    FfdMap map = build_ffd_map(sys, b.block, b.patches);
    Reduction red = reduce_variables(b.block.shape(), 3, b.components, b.constraints);
    const Vec3 ext = b.block.hi - b.block.lo;
    for (int q = 0; q < red.num_free(); ++q) {
      const Vec delta = red.R.col(q);
      Vec col = Vec::Zero(P0_.size());
      apply_ffd_shape(map, sys, delta, col);
      shape_cols.push_back(std::move(col));
      const int c = red.groups[q].front() % 3;
      shape_extent_.emplace_back(c, ext[c]);
    }
    shape_maps_.push_back(std::move(map));
    shape_red_.push_back(std::move(red));
  }

  for (std::size_t bi = 0; bi < spec_.thickness.size(); ++bi) {
    const ThicknessBlockSpec& b = spec_.thickness[bi];
    for (int p : b.patches) claim(thick_owner, p, static_cast<int>(bi), "thickness group");
    FfdMap map = build_ffd_map(sys, b.block, b.patches);
    Reduction red = reduce_variables(b.block.shape(), 1, {true, true, true}, b.constraints);
    // Baseline lattice thickness: mean plus the minimum-norm least-squares
    // correction, so unsupported lattice points keep the mean value.
    const int nL = b.block.num_points();
    int rows = 0;
    for (const Mat& D : map.D) rows += static_cast<int>(D.rows());
    Mat Dst(rows, nL);
    Vec tst(rows);
    int r = 0;
    for (std::size_t i = 0; i < map.patches.size(); ++i) {
      const int off = sys.cp_offset(map.patches[i]);
      Dst.middleRows(r, map.D[i].rows()) = map.D[i];
      tst.segment(r, map.D[i].rows()) = sys.thickness().segment(off, map.D[i].rows());
      r += static_cast<int>(map.D[i].rows());
    }
    const double mean = tst.mean();
    Vec tL = Vec::Constant(nL, mean);
    const Vec rhs = tst - Dst * tL;
    if (rhs.lpNorm<Eigen::Infinity>() > 1e-14 * mean) tL += Dst.completeOrthogonalDecomposition().solve(rhs);
    for (std::size_t i = 0; i < map.patches.size(); ++i) {
      const int off = sys.cp_offset(map.patches[i]);
      t0_.segment(off, map.D[i].rows()) = map.D[i] * tL;
    }
    for (int q = 0; q < red.num_free(); ++q) {
      const Vec delta = red.R.col(q);
      Vec col = Vec::Zero(t0_.size());
      for (std::size_t i = 0; i < map.patches.size(); ++i)
        col.segment(sys.cp_offset(map.patches[i]), map.D[i].rows()) = map.D[i] * delta;
      thick_cols.push_back(std::move(col));
      double lo = INFINITY, hi = -INFINITY;
      for (int e : red.groups[q]) {
        lo = std::min(lo, tL[e]);
        hi = std::max(hi, tL[e]);
      }
      thick_base_range_.emplace_back(lo, hi);
    }
    thick_lattice0_.push_back(tL);
    thick_maps_.push_back(std::move(map));
    thick_red_.push_back(std::move(red));
  }

  for (int p : spec_.constant_thickness) {
    claim(thick_owner, p, static_cast<int>(spec_.thickness.size()), "thickness group");
    const int off = sys.cp_offset(p), n = sys.spec().patches[p].num_points();
    const double mean = sys.thickness().segment(off, n).mean();
    t0_.segment(off, n).setConstant(mean);
    Vec col = Vec::Zero(t0_.size());
    col.segment(off, n).setOnes();
    thick_cols.push_back(std::move(col));
    thick_base_range_.emplace_back(mean, mean);
  }

  Gs_.resize(P0_.size(), static_cast<int>(shape_cols.size()));
  for (std::size_t q = 0; q < shape_cols.size(); ++q) Gs_.col(q) = shape_cols[q];
  Gt_.resize(t0_.size(), static_cast<int>(thick_cols.size()));
  for (std::size_t q = 0; q < thick_cols.size(); ++q) Gt_.col(q) = thick_cols[q];
}

void DesignSpace::thickness_bounds(double lo, double hi, Vec& ql, Vec& qu) const {
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("thickness bounds must satisfy 0 < lower < upper");
  ql.resize(num_thickness());
  qu.resize(num_thickness());
  for (int q = 0; q < num_thickness(); ++q) {
    ql[q] = lo - thick_base_range_[q].first;
    qu[q] = hi - thick_base_range_[q].second;
    if (ql[q] > 0.0 || qu[q] < 0.0) throw ValidationError("baseline thickness violates the thickness bounds");
  }
}

void DesignSpace::shape_bounds(double fraction, Vec& ql, Vec& qu) const {
  ql.resize(num_shape());
  qu.resize(num_shape());
  for (int q = 0; q < num_shape(); ++q) {
    qu[q] = fraction * shape_extent_[q].second;
    ql[q] = -qu[q];
  }
}

double DesignSpace::max_fit_residual() const {
  double r = 0.0;
  for (const FfdMap& m : shape_maps_)
    for (double x : m.residual) r = std::max(r, x);
  return r;
}

}  // namespace ffdshell
