#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ffdshell/problem.hpp"

namespace ffdshell {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

/// Patches and intersections as stored in a geometry file. Control points
/// are listed u-index major, v-index fastest.
struct GeometryData {
  std::vector<NurbsPatch> patches;
  std::vector<IntersectionSpec> intersections;
};

Json geometry_to_json(const GeometryData& g);
/// Throws SchemaError with the JSON path of the offending field.
GeometryData geometry_from_json(const Json& j);
GeometryData load_geometry(const std::string& path);
void save_geometry(const std::string& path, const GeometryData& g);
/// Stable text form: fixed key order, shortest round-trip numbers.
std::string canonical_dump(const Json& j);

/// FFD block entry of a run configuration. An empty box (lo == hi)
/// encloses the member patches with a 1% margin.
struct BlockConfig {
  enum class Role { Shape, Thickness };
  Role role = Role::Shape;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  std::array<int, 3> degree{2, 2, 1};
  std::array<int, 3> shape{3, 3, 2};
  std::vector<int> patches;
  std::array<bool, 3> components{false, false, true};
  std::vector<LatticeConstraint> constraints;
};

struct RunConfig {
  Material material;
  std::vector<LoadSpec> loads;
  std::vector<BoundarySpec> boundary;
  double alpha = 1e3;
  NewtonOptions newton;
  std::vector<BlockConfig> blocks;
  std::vector<int> constant_thickness;
  ProblemOptions problem;
  OptimizerOptions optimizer;
  std::string output_dir = "output";
  bool export_vtk = true;
  int vtk_samples = 4;
};

Json config_to_json(const RunConfig& c);
RunConfig config_from_json(const Json& j);
RunConfig load_config(const std::string& path);

SystemSpec make_system(const GeometryData& g, const RunConfig& c);
/// Validates that every patch belongs to at most one shape and one
/// thickness block.
DesignSpec make_design(const RunConfig& c, const CoupledSystem& sys);

/// Current geometry, thickness and displacement of a solved system.
void save_state(const std::string& path, const CoupledSystem& sys, const Vec& u);
struct StateData {
  GeometryData geometry;
  std::vector<std::vector<Vec3>> displacement;  // per patch, per control point
};
StateData load_state(const std::string& path);

/// Legacy VTK surface meshes, one file per patch (patch_<i>.vtk in dir),
/// sampled with `samples` subdivisions per Bezier element and direction.
/// Point data: displacement, magnitude, thickness. 9 significant digits.
std::vector<std::string> export_vtk(const StateData& s, const std::string& dir, int samples = 4);

StateData state_of(const CoupledSystem& sys, const Vec& u);

}  // namespace ffdshell
