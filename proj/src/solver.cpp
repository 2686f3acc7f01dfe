#include "ffdshell/solver.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ffdshell/errors.hpp"

namespace ffdshell {

Vec restrict_to(const Vec& full, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = full[idx[i]];
  return out;
}

Vec prolong_from(const Vec& part, const std::vector<int>& idx, int n) {
  Vec out = Vec::Zero(n);
  for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = part[i];
  return out;
}

SpMat restrict_matrix(const SpMat& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) cmap[cols[i]] = static_cast<int>(i);
  TripletList trips;
  trips.reserve(A.nonZeros());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      const int r = rmap[it.row()], c = cmap[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  SpMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

FreeSolver::FreeSolver(const SpMat& K, const std::vector<int>& free) : Kf_(restrict_matrix(K, free, free)) {
  Kf_.makeCompressed();
  lu_.analyzePattern(Kf_);
  lu_.factorize(Kf_);
  if (lu_.info() != Eigen::Success)
    throw SolverError("tangent matrix is singular; the boundary conditions may not remove all rigid-body modes");
}

namespace {
void check_solution(const SpMat& K, const Vec& x, const Vec& b) {
  const double bn = b.lpNorm<Eigen::Infinity>();
  if (bn == 0.0) return;
  const double res = (K * x - b).lpNorm<Eigen::Infinity>();
  double kmax = 0.0;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it) kmax = std::max(kmax, std::abs(it.value()));
  const double growth = kmax * x.lpNorm<Eigen::Infinity>() / bn;
  if (!x.allFinite() || res > 1e-6 * bn || growth > 1e13)
    throw SolverError("tangent matrix is singular; the boundary conditions may not remove all rigid-body modes");
}
}  // namespace

Vec FreeSolver::solve(const Vec& rhs) const {
  Vec x = lu_.solve(rhs);
  check_solution(Kf_, x, rhs);
  return x;
}

Vec FreeSolver::solve_transpose(const Vec& rhs) const {
  Vec x = lu_.transpose().solve(rhs);
  check_solution(SpMat(Kf_.transpose()), x, rhs);
  return x;
}

CoupledSystem::CoupledSystem(SystemSpec spec) : spec_(std::move(spec)) {
  spec_.material.validate();
  if (spec_.patches.empty()) throw ValidationError("model has no patches");
  if (!(spec_.alpha > 0.0)) throw ValidationError("penalty coefficient must be positive");
  for (int i = 0; i < num_patches(); ++i) {
    const NurbsPatch& p = spec_.patches[i];
    if (p.thickness().empty()) throw ValidationError("patch " + std::to_string(i) + " has no thickness");
    offsets_.push_back(num_cps_);
    num_cps_ += p.num_points();
    ext_.push_back(build_extraction(p, i));
    E3_.push_back(expand_components(ext_.back().M, 3));
    const int nq = std::max(p.ku().degree(), p.kv().degree()) + 1;
    elems_.push_back(ext_.back().fe.area_elements(nq));
    std::vector<std::vector<Element>> edges;
    for (Side s : {Side::u0, Side::u1, Side::v0, Side::v1}) edges.push_back(ext_.back().fe.edge_elements(s, nq));
    edge_elems_.push_back(std::move(edges));
  }
  for (const auto& L : spec_.loads)
    if (L.patch >= num_patches()) throw ValidationError("load references missing patch " + std::to_string(L.patch));
  for (const auto& is : spec_.intersections) {
    if (is.patch_a < 0 || is.patch_a >= num_patches() || is.patch_b < 0 || is.patch_b >= num_patches() ||
        is.patch_a == is.patch_b)
      throw ValidationError("intersection references invalid patches " + std::to_string(is.patch_a) + ", " +
                            std::to_string(is.patch_b));
    couplings_.push_back(build_coupling(is, spec_.patches[is.patch_a], spec_.patches[is.patch_b],
                                        ext_[is.patch_a], ext_[is.patch_b]));
  }
  P_.resize(3 * num_cps_);
  t_.resize(num_cps_);
  for (int i = 0; i < num_patches(); ++i) {
    const NurbsPatch& p = spec_.patches[i];
    for (int k = 0; k < p.num_points(); ++k) {
      P_.segment<3>(3 * (offsets_[i] + k)) = p.points()[k];
      t_[offsets_[i] + k] = p.thickness()[k];
    }
  }
  build_coupling_operators();
  build_dirichlet();
}

void CoupledSystem::build_coupling_operators() {
  TripletList c3, c1;
  int node0 = 0;
  for (const auto& c : couplings_) {
    coupling_row_.push_back(node0);
    const int nn = static_cast<int>(c.xi_a.size());
    for (int side = 0; side < 2; ++side) {
      const int patch = side == 0 ? c.patch_a : c.patch_b;
      const SpMat V0 = (side == 0 ? c.T0a : c.T0b) * ext_[patch].M;
      const SpMat V1 = (side == 0 ? c.T1a : c.T1b) * ext_[patch].M;
      const int off = offsets_[patch];
      for (int k = 0; k < V0.outerSize(); ++k)
        for (SpMat::InnerIterator it(V0, k); it; ++it) {
          const int n = node0 + static_cast<int>(it.row());
          for (int d = 0; d < 3; ++d)
            c3.emplace_back(18 * n + 9 * side + d, 3 * (off + static_cast<int>(it.col())) + d, it.value());
          c1.emplace_back(2 * n + side, off + static_cast<int>(it.col()), it.value());
        }
      for (int k = 0; k < V1.outerSize(); ++k)
        for (SpMat::InnerIterator it(V1, k); it; ++it) {
          const int n = node0 + static_cast<int>(it.row()) / 2;
          const int alpha = static_cast<int>(it.row()) % 2;
          for (int d = 0; d < 3; ++d)
            c3.emplace_back(18 * n + 9 * side + 3 + 3 * alpha + d, 3 * (off + static_cast<int>(it.col())) + d,
                            it.value());
        }
    }
    node0 += nn;
  }
  C_.resize(18 * node0, 3 * num_cps_);
  C_.setFromTriplets(c3.begin(), c3.end());
  Ct_.resize(2 * node0, num_cps_);
  Ct_.setFromTriplets(c1.begin(), c1.end());
}

void CoupledSystem::build_dirichlet() {
  std::map<std::pair<int, int>, const BoundarySpec*> seen;
  std::set<int> fixed;
  for (const auto& b : spec_.boundary) {
    if (b.patch < 0 || b.patch >= num_patches())
      throw ValidationError("boundary condition references missing patch " + std::to_string(b.patch));
    if (!b.components[0] && !b.components[1] && !b.components[2])
      throw ValidationError("boundary condition on patch " + std::to_string(b.patch) + " side " +
                            to_string(b.side) + " constrains no component");
    const auto key = std::make_pair(b.patch, static_cast<int>(b.side));
    if (auto it = seen.find(key); it != seen.end()) {
      if (it->second->style != b.style || it->second->components != b.components)
        throw ValidationError("contradictory boundary conditions on patch " + std::to_string(b.patch) + " side " +
                              to_string(b.side));
    }
    seen[key] = &b;
    const NurbsPatch& p = spec_.patches[b.patch];
    const int rows = b.style == BoundarySpec::Style::Clamp ? 2 : 1;
    for (int r = 0; r < rows; ++r) {
      const bool along_v = b.side == Side::u0 || b.side == Side::u1;
      const int fixed_index = b.side == Side::u0 ? r : b.side == Side::u1 ? p.nu() - 1 - r
                              : b.side == Side::v0 ? r
                                                   : p.nv() - 1 - r;
      const int count = along_v ? p.nv() : p.nu();
      for (int k = 0; k < count; ++k) {
        const int cp = along_v ? p.index(fixed_index, k) : p.index(k, fixed_index);
        for (int c = 0; c < 3; ++c)
          if (b.components[c]) fixed.insert(3 * (offsets_[b.patch] + cp) + c);
      }
    }
  }
  fixed_.assign(fixed.begin(), fixed.end());
  free_.clear();
  for (int i = 0; i < num_dofs(); ++i)
    if (!fixed.count(i)) free_.push_back(i);
}

void CoupledSystem::set_geometry(const Vec& P) {
  if (P.size() != P_.size()) throw ValidationError("geometry vector size mismatch");
  P_ = P;
}

void CoupledSystem::set_thickness(const Vec& t) {
  if (t.size() != t_.size()) throw ValidationError("thickness vector size mismatch");
  t_ = t;
}

NurbsPatch CoupledSystem::current_patch(int i) const {
  const NurbsPatch& p = spec_.patches[i];
  std::vector<Vec3> pts(p.num_points());
  std::vector<double> th(p.num_points());
  for (int k = 0; k < p.num_points(); ++k) {
    pts[k] = P_.segment<3>(3 * (offsets_[i] + k));
    th[k] = t_[offsets_[i] + k];
  }
  return NurbsPatch(p.ku(), p.kv(), pts, p.weights(), th);
}

Vec3 eval_displacement(const CoupledSystem& sys, const Vec& u, int patch, double s, double t) {
  const NurbsPatch& p = sys.spec().patches[patch];
  const SurfaceBasis b = rational_basis(p, s, t);
  Vec3 out = Vec3::Zero();
  for (int k = 0; k < b.size(); ++k) out += b.d[0][k] * u.segment<3>(3 * (sys.cp_offset(patch) + b.index[k]));
  return out;
}

Vec CoupledSystem::patch_slice3(int i, const Vec& g) const {
  return g.segment(3 * offsets_[i], 3 * spec_.patches[i].num_points());
}

Vec CoupledSystem::patch_slice1(int i, const Vec& g) const {
  return g.segment(offsets_[i], spec_.patches[i].num_points());
}

Vec CoupledSystem::patch_nodes(int i, const Vec& global3) const { return E3_[i] * patch_slice3(i, global3); }

SystemAssembly CoupledSystem::assemble(const Vec& u, unsigned flags) const {
  if (u.size() != num_dofs()) throw ValidationError("displacement vector size mismatch");
  SystemAssembly out;
  const int n3 = num_dofs();
  out.R = Vec::Zero(n3);
  const bool geo = flags & kGeometry;
  if (geo) {
    out.dWint_dP = Vec::Zero(n3);
    out.dWint_dt = Vec::Zero(num_cps_);
    out.dWint_du = Vec::Zero(n3);
  }
  TripletList K, KP, Kt;
  for (int i = 0; i < num_patches(); ++i) {
    const Vec X = E3_[i] * patch_slice3(i, P_);
    const Vec uf = E3_[i] * patch_slice3(i, u);
    const Vec tf = ext_[i].M * patch_slice1(i, t_);
    PatchFields f{&elems_[i], &X, &uf, &tf, static_cast<int>(ext_[i].M.rows())};
    FeAssembly a;
    a.resize(f.num_nodes);
    assemble_shell(f, spec_.material, flags, a);
    out.W_int += a.energy;
    if (geo) out.dWint_du.segment(3 * offsets_[i], E3_[i].cols()) += E3_[i].transpose() * a.grad_u;
    for (const auto& L : spec_.loads) {
      if (L.patch >= 0 && L.patch != i) continue;
      LoadSpec scaled = L;
      scaled.magnitude *= load_factor_;
      FeAssembly l;
      l.resize(f.num_nodes);
      assemble_load(f, scaled, edge_elems_[i][static_cast<int>(L.side)], flags, l);
      out.W_ext += l.energy;
      a.grad_u += l.grad_u;
      a.K_uu.insert(a.K_uu.end(), l.K_uu.begin(), l.K_uu.end());
      if (spec_.load_geometry_partials || L.kind == LoadKind::FollowerPressure)
        a.K_uX.insert(a.K_uX.end(), l.K_uX.begin(), l.K_uX.end());
      a.K_ut.insert(a.K_ut.end(), l.K_ut.begin(), l.K_ut.end());
    }
    const SpMat& E = E3_[i];
    const int off3 = 3 * offsets_[i];
    if (flags & (kResidual | kTangent | kGeometry)) out.R.segment(off3, E.cols()) += E.transpose() * a.grad_u;
    const int nfe3 = static_cast<int>(E.rows());
    if (flags & kTangent) {
      SpMat k(nfe3, nfe3);
      k.setFromTriplets(a.K_uu.begin(), a.K_uu.end());
      append_block(K, SpMat(E.transpose() * k * E), off3, off3);
    }
    if (geo) {
      SpMat kx(nfe3, nfe3), kt(nfe3, nfe3 / 3);
      kx.setFromTriplets(a.K_uX.begin(), a.K_uX.end());
      kt.setFromTriplets(a.K_ut.begin(), a.K_ut.end());
      append_block(KP, SpMat(E.transpose() * kx * E), off3, off3);
      append_block(Kt, SpMat(E.transpose() * kt * ext_[i].M), off3, offsets_[i]);
      out.dWint_dP.segment(off3, E.cols()) += E.transpose() * a.grad_X;
      out.dWint_dt.segment(offsets_[i], ext_[i].M.cols()) += ext_[i].M.transpose() * a.grad_t;
    }
  }

  if (!couplings_.empty()) {
    PenaltyFields pf;
    const Vec xg = C_ * (P_ + u), Xg = C_ * P_, tg = Ct_ * t_;
    Vec gx = Vec::Zero(C_.rows());
    TripletList Hxx, HxX, Hxt;
    for (std::size_t ci = 0; ci < couplings_.size(); ++ci) {
      const auto& c = couplings_[ci];
      const int n0 = coupling_row_[ci];
      const int nn = static_cast<int>(c.xi_a.size());
      pf.x = xg.segment(18 * n0, 18 * nn);
      pf.X = Xg.segment(18 * n0, 18 * nn);
      pf.t = tg.segment(2 * n0, 2 * nn);
      PenaltyAssembly pa;
      assemble_penalty(c, pf, spec_.alpha, spec_.material, flags, pa);
      out.W_pen += pa.energy;
      gx.segment(18 * n0, 18 * nn) += pa.grad_x;
      for (const auto& t : pa.H_xx) Hxx.emplace_back(t.row() + 18 * n0, t.col() + 18 * n0, t.value());
      for (const auto& t : pa.H_xX) HxX.emplace_back(t.row() + 18 * n0, t.col() + 18 * n0, t.value());
      for (const auto& t : pa.H_xt) Hxt.emplace_back(t.row() + 18 * n0, t.col() + 2 * n0, t.value());
    }
    if (flags & (kResidual | kTangent | kGeometry)) out.R += C_.transpose() * gx;
    if (flags & kTangent) {
      SpMat H(C_.rows(), C_.rows());
      H.setFromTriplets(Hxx.begin(), Hxx.end());
      append_block(K, SpMat(C_.transpose() * H * C_), 0, 0);
    }
    if (geo) {
      SpMat H(C_.rows(), C_.rows()), Ht(C_.rows(), Ct_.rows());
      H.setFromTriplets(HxX.begin(), HxX.end());
      Ht.setFromTriplets(Hxt.begin(), Hxt.end());
      append_block(KP, SpMat(C_.transpose() * H * C_), 0, 0);
      append_block(Kt, SpMat(C_.transpose() * Ht * Ct_), 0, 0);
    }
  }
  if (flags & kTangent) {
    out.K.resize(n3, n3);
    out.K.setFromTriplets(K.begin(), K.end());
  }
  if (geo) {
    out.dR_dP.resize(n3, n3);
    out.dR_dP.setFromTriplets(KP.begin(), KP.end());
    out.dR_dt.resize(n3, num_cps_);
    out.dR_dt.setFromTriplets(Kt.begin(), Kt.end());
  }
  return out;
}

double CoupledSystem::internal_energy(const Vec& u) const { return assemble(u, kEnergy).W_int; }

CoupledSystem::Volume CoupledSystem::volume(bool gradients) const {
  Volume v;
  if (gradients) {
    v.dP = Vec::Zero(num_dofs());
    v.dt = Vec::Zero(num_cps_);
  }
  for (int i = 0; i < num_patches(); ++i) {
    const Vec X = E3_[i] * patch_slice3(i, P_);
    const Vec tf = ext_[i].M * patch_slice1(i, t_);
    PatchFields f{&elems_[i], &X, nullptr, &tf, static_cast<int>(ext_[i].M.rows())};
    const VolumeResult r = integrate_volume(f, gradients);
    v.value += r.volume;
    v.area += r.area;
    if (gradients) {
      v.dP.segment(3 * offsets_[i], E3_[i].cols()) += E3_[i].transpose() * r.grad_X;
      v.dt.segment(offsets_[i], ext_[i].M.cols()) += ext_[i].M.transpose() * r.grad_t;
    }
  }
  return v;
}

SolveReport newton_solve(CoupledSystem& sys, Vec& u, const NewtonOptions& opt) {
  SolveReport rep;
  rep.load_steps = std::max(1, opt.load_steps);
  if (u.size() != sys.num_dofs()) u = Vec::Zero(sys.num_dofs());
  const auto& free = sys.free_dofs();
  for (int d : sys.fixed_dofs()) u[d] = 0.0;

  const double saved_factor = sys.load_factor();
  const double ref = restrict_to(sys.assemble(Vec::Zero(sys.num_dofs()), kResidual).R, free).norm();
  const double tol = std::max(opt.rtol * ref, opt.atol);

  Vec best = u;
  double best_norm = INFINITY;
  bool ok = true;
  for (int step = 1; step <= rep.load_steps && ok; ++step) {
    sys.set_load_factor(saved_factor * step / rep.load_steps);
    int growth = 0;
    double prev = INFINITY, last_step = INFINITY;
    bool step_done = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
      SystemAssembly a;
      try {
        a = sys.assemble(u, kResidual | kTangent);
      } catch (const Error& e) {
        rep.message = std::string("assembly failed: ") + e.what();
        ok = false;
        break;
      }
      const Vec r = restrict_to(a.R, free);
      const double nr = r.norm();
      rep.history.push_back(nr);
      if (!std::isfinite(nr)) {
        rep.message = "non-finite residual";
        ok = false;
        break;
      }
      if (step == rep.load_steps && nr < best_norm) {
        best_norm = nr;
        best = u;
      }
      if (nr <= tol) {
        step_done = true;
        break;
      }
      // Stalled at the round-off floor of the internal forces: the residual no
      // longer halves although the last increment was already negligible.
      if (nr > 0.5 * prev && last_step <= opt.stall_step_tol) {
        step_done = true;
        break;
      }
      if (it == opt.max_iter) {
        rep.message = "maximum Newton iterations reached";
        ok = false;
        break;
      }
      growth = nr > prev ? growth + 1 : 0;
      prev = nr;
      if (growth >= opt.divergence_window) {
        rep.message = "residual grew for " + std::to_string(growth) + " consecutive iterations";
        ok = false;
        break;
      }
      const FreeSolver solver(a.K, free);
      const Vec du = solver.solve(-r);
      for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] += du[i];
      ++rep.iterations;
      // Round-off floor of the residual can sit above rtol when membrane
      // stiffness dominates; a negligible increment means the same thing.
      last_step = du.lpNorm<Eigen::Infinity>() / std::max(restrict_to(u, free).lpNorm<Eigen::Infinity>(), 1e-300);
      if (last_step <= opt.step_tol) {
        if (step == rep.load_steps) best = u;
        step_done = true;
        break;
      }
    }
    if (!step_done) ok = false;
  }
  sys.set_load_factor(saved_factor);
  rep.converged = ok;
  if (!ok && best_norm < INFINITY) u = best;
  if (ok) rep.message = "converged";
  return rep;
}

}  // namespace ffdshell
