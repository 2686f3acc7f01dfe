#include "ffdshell/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ffdshell/errors.hpp"

namespace ffdshell {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw SchemaError(path + ": " + what); }

const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

double as_double(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const Json& as_array(const Json& j, const std::string& path, std::size_t size = 0) {
  if (!j.is_array()) fail(path, "expected an array");
  if (size && j.size() != size) fail(path, "expected " + std::to_string(size) + " entries");
  return j;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<double> doubles(const Json& j, const std::string& path) {
  as_array(j, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], at(path, i)));
  return out;
}

std::vector<int> ints(const Json& j, const std::string& path) {
  as_array(j, path);
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], at(path, i)));
  return out;
}

Vec3 vec3(const Json& j, const std::string& path) {
  as_array(j, path, 3);
  return Vec3(as_double(j[0], at(path, 0)), as_double(j[1], at(path, 1)), as_double(j[2], at(path, 2)));
}

Vec2 vec2(const Json& j, const std::string& path) {
  as_array(j, path, 2);
  return Vec2(as_double(j[0], at(path, 0)), as_double(j[1], at(path, 1)));
}

template <class T>
std::array<T, 3> triple(const Json& j, const std::string& path) {
  as_array(j, path, 3);
  std::array<T, 3> out;
  for (int i = 0; i < 3; ++i) {
    if constexpr (std::is_same_v<T, bool>) out[i] = as_bool(j[i], at(path, i));
    else out[i] = as_int(j[i], at(path, i));
  }
  return out;
}

Json to_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }
Json to_json(const Vec2& v) { return Json::array({v[0], v[1]}); }

// Optional field helpers: assign when present.
template <class F>
void opt(const Json& j, const std::string& key, const std::string& path, F&& assign) {
  auto it = j.find(key);
  if (it != j.end()) assign(*it, path + "." + key);
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(path + "." + it.key(), "unknown key");
  }
}

void check_version(const Json& j, const std::string& path) {
  const int v = as_int(member(j, "schema_version", path), path + ".schema_version");
  if (v != kSchemaVersion) fail(path + ".schema_version", "unsupported version " + std::to_string(v));
}

template <class E>
E parse_enum(const Json& j, const std::string& path, E (*parse)(const std::string&)) {
  const std::string s = as_string(j, path);
  try {
    return parse(s);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Json patch_to_json(const NurbsPatch& p) {
  Json j;
  j["degree"] = {p.ku().degree(), p.kv().degree()};
  j["knots_u"] = p.ku().knots();
  j["knots_v"] = p.kv().knots();
  Json cps = Json::array();
  for (const Vec3& x : p.points()) cps.push_back(to_json(x));
  j["control_points"] = cps;
  j["weights"] = p.weights();
  j["thickness"] = p.thickness();
  return j;
}

NurbsPatch patch_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"degree", "knots_u", "knots_v", "control_points", "weights", "thickness"});
  const std::vector<int> deg = ints(member(j, "degree", path), path + ".degree");
  if (deg.size() != 2) fail(path + ".degree", "expected 2 entries");
  KnotVector ku, kv;
  for (int d = 0; d < 2; ++d) {
    const std::string key = d == 0 ? "knots_u" : "knots_v";
    const std::string kpath = path + "." + key;
    const std::vector<double> k = doubles(member(j, key, path), kpath);
    for (std::size_t i = 1; i < k.size(); ++i)
      if (k[i] < k[i - 1]) fail(at(kpath, i), "knot decreases");
    try {
      (d == 0 ? ku : kv) = KnotVector(deg[d], k);
    } catch (const Error& e) {
      fail(kpath, e.what());
    }
  }
  const std::string cpath = path + ".control_points";
  const Json& cj = as_array(member(j, "control_points", path), cpath);
  const std::size_t n = static_cast<std::size_t>(ku.num_basis()) * kv.num_basis();
  if (cj.size() != n) fail(cpath, "expected " + std::to_string(n) + " points for the knot vectors");
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(vec3(cj[i], at(cpath, i)));
  std::vector<double> w, t;
  opt(j, "weights", path, [&](const Json& x, const std::string& p) { w = doubles(x, p); });
  opt(j, "thickness", path, [&](const Json& x, const std::string& p) { t = doubles(x, p); });
  if (!w.empty() && w.size() != n) fail(path + ".weights", "expected " + std::to_string(n) + " entries");
  if (!t.empty() && t.size() != n) fail(path + ".thickness", "expected " + std::to_string(n) + " entries");
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!(w[i] > 0)) fail(at(path + ".weights", i), "weight must be positive");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(t[i] > 0)) fail(at(path + ".thickness", i), "thickness must be positive");
  try {
    return NurbsPatch(ku, kv, std::move(pts), std::move(w), std::move(t));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

Json constraint_to_json(const LatticeConstraint& c) {
  static const char* kinds[] = {"fix-layer", "collinear-line", "equal-along-axis"};
  Json j;
  j["kind"] = kinds[static_cast<int>(c.kind)];
  j["axis"] = c.axis;
  j["layer"] = c.layer;
  j["components"] = c.components;
  return j;
}

LatticeConstraint constraint_from_json(const Json& j, const std::string& path) {
  check_keys(j, path, {"kind", "axis", "layer", "components"});
  LatticeConstraint c;
  const std::string k = as_string(member(j, "kind", path), path + ".kind");
  if (k == "fix-layer") c.kind = LatticeConstraint::Kind::FixLayer;
  else if (k == "collinear-line") c.kind = LatticeConstraint::Kind::CollinearLine;
  else if (k == "equal-along-axis") c.kind = LatticeConstraint::Kind::EqualAlongAxis;
  else fail(path + ".kind", "unknown constraint '" + k + "'");
  c.axis = as_int(member(j, "axis", path), path + ".axis");
  if (c.axis < 0 || c.axis > 2) fail(path + ".axis", "must be 0, 1 or 2");
  opt(j, "layer", path, [&](const Json& x, const std::string& p) { c.layer = as_int(x, p); });
  opt(j, "components", path, [&](const Json& x, const std::string& p) { c.components = triple<bool>(x, p); });
  return c;
}

}  // namespace

Json geometry_to_json(const GeometryData& g) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json ps = Json::array();
  for (const NurbsPatch& p : g.patches) ps.push_back(patch_to_json(p));
  j["patches"] = ps;
  Json is = Json::array();
  for (const IntersectionSpec& s : g.intersections) {
    Json e;
    e["patch_a"] = s.patch_a;
    e["patch_b"] = s.patch_b;
    Json ca = Json::array(), cb = Json::array();
    for (const Vec2& x : s.curve_a) ca.push_back(to_json(x));
    for (const Vec2& x : s.curve_b) cb.push_back(to_json(x));
    e["curve_a"] = ca;
    e["curve_b"] = cb;
    e["num_elements"] = s.num_elements;
    is.push_back(e);
  }
  j["intersections"] = is;
  return j;
}

GeometryData geometry_from_json(const Json& j) {
  const std::string root = "$";
  check_keys(j, root, {"schema_version", "patches", "intersections"});
  check_version(j, root);
  GeometryData g;
  const Json& ps = as_array(member(j, "patches", root), "$.patches");
  if (ps.empty()) fail("$.patches", "at least one patch required");
  for (std::size_t i = 0; i < ps.size(); ++i) g.patches.push_back(patch_from_json(ps[i], at("$.patches", i)));
  const int np = static_cast<int>(g.patches.size());
  opt(j, "intersections", root, [&](const Json& is, const std::string& path) {
    as_array(is, path);
    for (std::size_t i = 0; i < is.size(); ++i) {
      const std::string p = at(path, i);
      check_keys(is[i], p, {"patch_a", "patch_b", "curve_a", "curve_b", "num_elements"});
      IntersectionSpec s;
      s.patch_a = as_int(member(is[i], "patch_a", p), p + ".patch_a");
      s.patch_b = as_int(member(is[i], "patch_b", p), p + ".patch_b");
      for (int idx : {s.patch_a, s.patch_b})
        if (idx < 0 || idx >= np) fail(p, "patch index " + std::to_string(idx) + " out of range");
      if (s.patch_a == s.patch_b) fail(p, "intersection of a patch with itself");
      for (int side = 0; side < 2; ++side) {
        const std::string key = side == 0 ? "curve_a" : "curve_b";
        const Json& c = as_array(member(is[i], key, p), p + "." + key);
        if (c.size() < 2) fail(p + "." + key, "at least 2 points required");
        auto& dst = side == 0 ? s.curve_a : s.curve_b;
        for (std::size_t k = 0; k < c.size(); ++k) dst.push_back(vec2(c[k], at(p + "." + key, k)));
      }
      if (s.curve_a.size() != s.curve_b.size()) fail(p, "curve_a and curve_b differ in length");
      opt(is[i], "num_elements", p, [&](const Json& x, const std::string& q) { s.num_elements = as_int(x, q); });
      g.intersections.push_back(s);
    }
  });
  return g;
}

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(path + ": cannot write file");
  out << text;
}

}  // namespace

GeometryData load_geometry(const std::string& path) { return geometry_from_json(read_json(path)); }

void save_geometry(const std::string& path, const GeometryData& g) {
  write_text(path, canonical_dump(geometry_to_json(g)));
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

Json config_to_json(const RunConfig& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["material"] = {{"E", c.material.E}, {"nu", c.material.nu}};
  Json loads = Json::array();
  for (const LoadSpec& l : c.loads)
    loads.push_back({{"kind", to_string(l.kind)},
                     {"magnitude", l.magnitude},
                     {"direction", to_json(l.direction)},
                     {"projection", to_json(l.projection)},
                     {"patch", l.patch},
                     {"side", to_string(l.side)}});
  j["loads"] = loads;
  Json bcs = Json::array();
  for (const BoundarySpec& b : c.boundary)
    bcs.push_back({{"patch", b.patch},
                   {"side", to_string(b.side)},
                   {"components", b.components},
                   {"style", b.style == BoundarySpec::Style::Pin ? "pin" : "clamp"}});
  j["boundary"] = bcs;
  j["alpha"] = c.alpha;
  j["newton"] = {{"rtol", c.newton.rtol},
                 {"atol", c.newton.atol},
                 {"step_tol", c.newton.step_tol},
                 {"stall_step_tol", c.newton.stall_step_tol},
                 {"max_iter", c.newton.max_iter},
                 {"load_steps", c.newton.load_steps}};
  Json blocks = Json::array();
  for (const BlockConfig& b : c.blocks) {
    Json cons = Json::array();
    for (const LatticeConstraint& k : b.constraints) cons.push_back(constraint_to_json(k));
    blocks.push_back({{"role", b.role == BlockConfig::Role::Shape ? "shape" : "thickness"},
                      {"lo", to_json(b.lo)},
                      {"hi", to_json(b.hi)},
                      {"degree", b.degree},
                      {"shape", b.shape},
                      {"patches", b.patches},
                      {"components", b.components},
                      {"constraints", cons}});
  }
  j["blocks"] = blocks;
  j["constant_thickness"] = c.constant_thickness;
  const ProblemOptions& p = c.problem;
  j["problem"] = {{"mode", to_string(p.mode)},
                  {"reg_lambda", p.reg_lambda},
                  {"reg_component", p.reg_component},
                  {"volume_constraint", p.volume_constraint},
                  {"shape_bound_fraction", p.shape_bound_fraction},
                  {"thickness_min", p.thickness_min},
                  {"thickness_max", p.thickness_max},
                  {"fallback_load_steps", p.fallback_load_steps}};
  const OptimizerOptions& o = c.optimizer;
  j["optimizer"] = {{"tol", o.tol}, {"ctol", o.ctol}, {"ftol", o.ftol}, {"max_iter", o.max_iter}, {"init_step", o.init_step}};
  j["output_dir"] = c.output_dir;
  j["export_vtk"] = c.export_vtk;
  j["vtk_samples"] = c.vtk_samples;
  return j;
}

RunConfig config_from_json(const Json& j) {
  const std::string root = "$";
  check_keys(j, root,
             {"schema_version", "material", "loads", "boundary", "alpha", "newton", "blocks", "constant_thickness",
              "problem", "optimizer", "output_dir", "export_vtk", "vtk_samples"});
  check_version(j, root);
  RunConfig c;
  const auto D = [](double& dst) { return [&dst](const Json& x, const std::string& p) { dst = as_double(x, p); }; };
  const auto I = [](int& dst) { return [&dst](const Json& x, const std::string& p) { dst = as_int(x, p); }; };
  const auto B = [](bool& dst) { return [&dst](const Json& x, const std::string& p) { dst = as_bool(x, p); }; };

  opt(j, "material", root, [&](const Json& m, const std::string& p) {
    check_keys(m, p, {"E", "nu"});
    opt(m, "E", p, D(c.material.E));
    opt(m, "nu", p, D(c.material.nu));
    try {
      c.material.validate();
    } catch (const Error& e) {
      fail(p, e.what());
    }
  });
  opt(j, "loads", root, [&](const Json& ls, const std::string& path) {
    as_array(ls, path);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const std::string p = at(path, i);
      check_keys(ls[i], p, {"kind", "magnitude", "direction", "projection", "patch", "side"});
      LoadSpec l;
      l.kind = parse_enum(member(ls[i], "kind", p), p + ".kind", &parse_load_kind);
      l.magnitude = as_double(member(ls[i], "magnitude", p), p + ".magnitude");
      opt(ls[i], "direction", p, [&](const Json& x, const std::string& q) { l.direction = vec3(x, q); });
      opt(ls[i], "projection", p, [&](const Json& x, const std::string& q) { l.projection = vec3(x, q); });
      opt(ls[i], "patch", p, I(l.patch));
      opt(ls[i], "side", p, [&](const Json& x, const std::string& q) { l.side = parse_enum(x, q, &parse_side); });
      c.loads.push_back(l);
    }
  });
  opt(j, "boundary", root, [&](const Json& bs, const std::string& path) {
    as_array(bs, path);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string p = at(path, i);
      check_keys(bs[i], p, {"patch", "side", "components", "style"});
      BoundarySpec b;
      b.patch = as_int(member(bs[i], "patch", p), p + ".patch");
      b.side = parse_enum(member(bs[i], "side", p), p + ".side", &parse_side);
      opt(bs[i], "components", p, [&](const Json& x, const std::string& q) { b.components = triple<bool>(x, q); });
      opt(bs[i], "style", p, [&](const Json& x, const std::string& q) {
        const std::string s = as_string(x, q);
        if (s == "pin") b.style = BoundarySpec::Style::Pin;
        else if (s == "clamp") b.style = BoundarySpec::Style::Clamp;
        else fail(q, "expected 'pin' or 'clamp'");
      });
      c.boundary.push_back(b);
    }
  });
  opt(j, "alpha", root, D(c.alpha));
  opt(j, "newton", root, [&](const Json& n, const std::string& p) {
    check_keys(n, p, {"rtol", "atol", "step_tol", "stall_step_tol", "max_iter", "load_steps"});
    opt(n, "rtol", p, D(c.newton.rtol));
    opt(n, "atol", p, D(c.newton.atol));
    opt(n, "step_tol", p, D(c.newton.step_tol));
    opt(n, "stall_step_tol", p, D(c.newton.stall_step_tol));
    opt(n, "max_iter", p, I(c.newton.max_iter));
    opt(n, "load_steps", p, I(c.newton.load_steps));
  });
  opt(j, "blocks", root, [&](const Json& bs, const std::string& path) {
    as_array(bs, path);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string p = at(path, i);
      check_keys(bs[i], p, {"role", "lo", "hi", "degree", "shape", "patches", "components", "constraints"});
      BlockConfig b;
      const std::string role = as_string(member(bs[i], "role", p), p + ".role");
      if (role == "shape") b.role = BlockConfig::Role::Shape;
      else if (role == "thickness") b.role = BlockConfig::Role::Thickness;
      else fail(p + ".role", "expected 'shape' or 'thickness'");
      opt(bs[i], "lo", p, [&](const Json& x, const std::string& q) { b.lo = vec3(x, q); });
      opt(bs[i], "hi", p, [&](const Json& x, const std::string& q) { b.hi = vec3(x, q); });
      opt(bs[i], "degree", p, [&](const Json& x, const std::string& q) { b.degree = triple<int>(x, q); });
      opt(bs[i], "shape", p, [&](const Json& x, const std::string& q) { b.shape = triple<int>(x, q); });
      for (int d = 0; d < 3; ++d)
        if (b.degree[d] < 1 || b.shape[d] < b.degree[d] + 1)
          fail(p, "each direction needs degree >= 1 and at least degree + 1 lattice points");
      b.patches = ints(member(bs[i], "patches", p), p + ".patches");
      opt(bs[i], "components", p, [&](const Json& x, const std::string& q) { b.components = triple<bool>(x, q); });
      opt(bs[i], "constraints", p, [&](const Json& x, const std::string& q) {
        as_array(x, q);
        for (std::size_t k = 0; k < x.size(); ++k) b.constraints.push_back(constraint_from_json(x[k], at(q, k)));
      });
      c.blocks.push_back(b);
    }
  });
  opt(j, "constant_thickness", root,
      [&](const Json& x, const std::string& p) { c.constant_thickness = ints(x, p); });
  opt(j, "problem", root, [&](const Json& x, const std::string& p) {
    check_keys(x, p,
               {"mode", "reg_lambda", "reg_component", "volume_constraint", "shape_bound_fraction", "thickness_min",
                "thickness_max", "fallback_load_steps"});
    ProblemOptions& o = c.problem;
    opt(x, "mode", p, [&](const Json& m, const std::string& q) { o.mode = parse_enum(m, q, &parse_design_mode); });
    opt(x, "reg_lambda", p, D(o.reg_lambda));
    opt(x, "reg_component", p, I(o.reg_component));
    opt(x, "volume_constraint", p, B(o.volume_constraint));
    opt(x, "shape_bound_fraction", p, D(o.shape_bound_fraction));
    opt(x, "thickness_min", p, D(o.thickness_min));
    opt(x, "thickness_max", p, D(o.thickness_max));
    opt(x, "fallback_load_steps", p, I(o.fallback_load_steps));
  });
  opt(j, "optimizer", root, [&](const Json& x, const std::string& p) {
    check_keys(x, p, {"tol", "ctol", "ftol", "max_iter", "init_step"});
    opt(x, "tol", p, D(c.optimizer.tol));
    opt(x, "ctol", p, D(c.optimizer.ctol));
    opt(x, "ftol", p, D(c.optimizer.ftol));
    opt(x, "max_iter", p, I(c.optimizer.max_iter));
    opt(x, "init_step", p, D(c.optimizer.init_step));
  });
  opt(j, "output_dir", root, [&](const Json& x, const std::string& p) { c.output_dir = as_string(x, p); });
  opt(j, "export_vtk", root, B(c.export_vtk));
  opt(j, "vtk_samples", root, I(c.vtk_samples));
  return c;
}

RunConfig load_config(const std::string& path) { return config_from_json(read_json(path)); }

SystemSpec make_system(const GeometryData& g, const RunConfig& c) {
  const int np = static_cast<int>(g.patches.size());
  auto check_patch = [&](int p, const std::string& where) {
    if (p < 0 || p >= np) throw SchemaError(where + ": patch index " + std::to_string(p) + " out of range");
  };
  for (std::size_t i = 0; i < c.loads.size(); ++i)
    if (c.loads[i].patch >= 0) check_patch(c.loads[i].patch, at("$.loads", i) + ".patch");
  for (std::size_t i = 0; i < c.boundary.size(); ++i) check_patch(c.boundary[i].patch, at("$.boundary", i) + ".patch");
  SystemSpec s;
  s.patches = g.patches;
  s.intersections = g.intersections;
  s.material = c.material;
  s.loads = c.loads;
  s.boundary = c.boundary;
  s.alpha = c.alpha;
  return s;
}

DesignSpec make_design(const RunConfig& c, const CoupledSystem& sys) {
  DesignSpec d;
  std::set<int> shape_members, thick_members;
  auto claim = [&](std::set<int>& members, int p, const std::string& where) {
    if (p < 0 || p >= sys.num_patches())
      throw SchemaError(where + ": patch index " + std::to_string(p) + " out of range");
    if (!members.insert(p).second)
      throw SchemaError(where + ": patch " + std::to_string(p) + " already belongs to a block of this role");
  };
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    const BlockConfig& b = c.blocks[i];
    const std::string where = at("$.blocks", i) + ".patches";
    if (b.patches.empty()) throw SchemaError(where + ": at least one patch required");
    for (int p : b.patches) claim(b.role == BlockConfig::Role::Shape ? shape_members : thick_members, p, where);
    const FfdBlock block = b.lo == b.hi ? enclosing_block(sys, b.patches, b.degree, b.shape, 0.01)
                                        : build_identity_block(b.lo, b.hi, b.degree, b.shape);
    if (b.role == BlockConfig::Role::Shape) d.shape.push_back({block, b.patches, b.components, b.constraints});
    else d.thickness.push_back({block, b.patches, b.constraints});
  }
  for (int p : c.constant_thickness) claim(thick_members, p, "$.constant_thickness");
  d.constant_thickness = c.constant_thickness;
  return d;
}

StateData state_of(const CoupledSystem& sys, const Vec& u) {
  StateData s;
  s.geometry.intersections = sys.spec().intersections;
  for (int i = 0; i < sys.num_patches(); ++i) {
    s.geometry.patches.push_back(sys.current_patch(i));
    std::vector<Vec3> d;
    const int off = sys.cp_offset(i), n = s.geometry.patches.back().num_points();
    for (int k = 0; k < n; ++k) d.push_back(u.size() ? Vec3(u.segment<3>(3 * (off + k))) : Vec3::Zero());
    s.displacement.push_back(d);
  }
  return s;
}

void save_state(const std::string& path, const CoupledSystem& sys, const Vec& u) {
  const StateData s = state_of(sys, u);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["geometry"] = geometry_to_json(s.geometry);
  Json disp = Json::array();
  for (const auto& d : s.displacement) {
    Json p = Json::array();
    for (const Vec3& x : d) p.push_back(to_json(x));
    disp.push_back(p);
  }
  j["displacement"] = disp;
  write_text(path, canonical_dump(j));
}

StateData load_state(const std::string& path) {
  const Json j = read_json(path);
  check_keys(j, "$", {"schema_version", "geometry", "displacement"});
  check_version(j, "$");
  StateData s;
  try {
    s.geometry = geometry_from_json(member(j, "geometry", "$"));
  } catch (const SchemaError& e) {
    throw SchemaError("$.geometry" + std::string(e.what()).substr(1));  // nested paths start with "$"
  }
  const Json& d = as_array(member(j, "displacement", "$"), "$.displacement", s.geometry.patches.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::string p = at("$.displacement", i);
    as_array(d[i], p, s.geometry.patches[i].num_points());
    std::vector<Vec3> v;
    for (std::size_t k = 0; k < d[i].size(); ++k) v.push_back(vec3(d[i][k], at(p, k)));
    s.displacement.push_back(v);
  }
  return s;
}

std::vector<std::string> export_vtk(const StateData& s, const std::string& dir, int samples) {
  if (samples < 1) throw ValidationError("vtk samples must be >= 1");
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (std::size_t pi = 0; pi < s.geometry.patches.size(); ++pi) {
    const NurbsPatch& patch = s.geometry.patches[pi];
    const std::vector<Vec3>& disp = s.displacement[pi];
    auto params = [&](const KnotVector& kv) {
      const std::vector<double> br = kv.breaks();
      std::vector<double> out;
      for (std::size_t e = 0; e + 1 < br.size(); ++e)
        for (int k = 0; k < samples; ++k) out.push_back(br[e] + (br[e + 1] - br[e]) * k / samples);
      out.push_back(br.back());
      return out;
    };
    const std::vector<double> us = params(patch.ku()), vs = params(patch.kv());
    const int nu = static_cast<int>(us.size()), nv = static_cast<int>(vs.size());
    std::ostringstream pts, dv, mag, th;
    for (std::ostringstream* o : {&pts, &dv, &mag, &th}) o->precision(9);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) {
        const SurfaceBasis b = rational_basis(patch, us[i], vs[j]);
        Vec3 x = Vec3::Zero(), d = Vec3::Zero();
        double t = 0.0;
        for (int k = 0; k < b.size(); ++k) {
          const int idx = b.index[k];
          x += b.d[0][k] * patch.points()[idx];
          d += b.d[0][k] * disp[idx];
          if (!patch.thickness().empty()) t += b.d[0][k] * patch.thickness()[idx];
        }
        pts << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
        dv << d[0] << ' ' << d[1] << ' ' << d[2] << '\n';
        mag << d.norm() << '\n';
        th << t << '\n';
      }
    const int ncell = (nu - 1) * (nv - 1);
    const std::string file = (std::filesystem::path(dir) / ("patch_" + std::to_string(pi) + ".vtk")).string();
    std::ofstream out(file);
    if (!out) throw Error(file + ": cannot write file");
    out << "# vtk DataFile Version 3.0\npatch " << pi << "\nASCII\nDATASET POLYDATA\n";
    out << "POINTS " << nu * nv << " double\n" << pts.str();
    out << "POLYGONS " << ncell << ' ' << 5 * ncell << '\n';
    for (int i = 0; i + 1 < nu; ++i)
      for (int j = 0; j + 1 < nv; ++j)
        out << "4 " << i * nv + j << ' ' << (i + 1) * nv + j << ' ' << (i + 1) * nv + j + 1 << ' ' << i * nv + j + 1
            << '\n';
    out << "POINT_DATA " << nu * nv << "\nVECTORS displacement double\n" << dv.str();
    out << "SCALARS magnitude double 1\nLOOKUP_TABLE default\n" << mag.str();
    out << "SCALARS thickness double 1\nLOOKUP_TABLE default\n" << th.str();
    files.push_back(file);
  }
  return files;
}

}  // namespace ffdshell
