#pragma once

#include <array>
#include <string>
#include <vector>

#include "ffdshell/fe_space.hpp"

namespace ffdshell {

struct Material {
  double E = 1.0;
  double nu = 0.0;
  void validate() const;
};

/// Layout of the pointwise shell input vector: deformed derivatives
/// {x_1, x_2, x_11, x_12, x_22}, the same for the reference surface X, then t.
namespace slot {
constexpr int kDef = 0;
constexpr int kRef = 15;
constexpr int kThick = 30;
constexpr int kSize = 31;
}  // namespace slot

/// Deformed and reference surface quantities at one point.
struct MidsurfaceState {
  Vec3 A1, A2, A3, a1, a2, a3;
  Eigen::Matrix2d eps;    // membrane strain, covariant
  Eigen::Matrix2d kappa;  // curvature change, covariant
  Eigen::Matrix2d n;      // membrane resultant, contravariant (per thickness E t)
  Eigen::Matrix2d m;      // bending resultant, contravariant
};

/// Kinematics from reference and deformed derivative vectors; throws
/// SingularGeometryError when the tangents are parallel.
MidsurfaceState kinematics(const std::array<Vec3, 5>& ref, const std::array<Vec3, 5>& def, const Material& mat,
                           double t);

/// Strain energy per unit parametric area for the pointwise inputs q.
double energy_density(const std::array<double, slot::kSize>& q, const Material& mat);

enum class LoadKind { DeadPressure, FollowerPressure, BodyForce, EdgeTraction };

/// External load on one patch (or all patches when patch < 0).
///  DeadPressure: p along `direction`, or along the reference normal when
///    direction is zero; per unit reference area, or per unit area projected
///    on the plane normal to `projection` when that vector is nonzero.
///  FollowerPressure: p along the deformed normal (a_1 x a_2 orientation).
///  BodyForce: magnitude * direction per unit volume (scaled by thickness).
///  EdgeTraction: magnitude * direction per unit reference edge length.
struct LoadSpec {
  LoadKind kind = LoadKind::DeadPressure;
  double magnitude = 0.0;
  Vec3 direction = Vec3::Zero();
  Vec3 projection = Vec3::Zero();
  int patch = -1;
  Side side = Side::u0;
};
LoadKind parse_load_kind(const std::string& s);
std::string to_string(LoadKind k);

/// Element data and nodal fields of one patch in FE space. All nodal vectors
/// are interleaved by component (3 * node + c).
struct PatchFields {
  const std::vector<Element>* elements = nullptr;
  const Vec* X = nullptr;  // reference node positions (3 n)
  const Vec* u = nullptr;  // displacements (3 n)
  const Vec* t = nullptr;  // thickness (n)
  int num_nodes = 0;
};

enum AssemblyFlags : unsigned {
  kEnergy = 1u,
  kResidual = 2u,
  kTangent = 4u,
  kGeometry = 8u,  // first partials wrt X and t, cross partials of the residual
};

/// FE-space contributions of one patch. Only the parts requested are filled.
struct FeAssembly {
  double energy = 0.0;
  Vec grad_u;   // dW/du (3 n)
  Vec grad_X;   // dW/dX at fixed u (3 n)
  Vec grad_t;   // dW/dt (n)
  TripletList K_uu;  // d2W/du du
  TripletList K_uX;  // d2W/du dX at fixed u
  TripletList K_ut;  // d2W/du dt
  void resize(int n);
};

void assemble_shell(const PatchFields& f, const Material& mat, unsigned flags, FeAssembly& out);

/// External load contributions: out.grad_u holds -f, K_uu holds -df/du,
/// K_uX and K_ut the corresponding geometry/thickness derivatives, and
/// energy the work f.u (for dead loads).
void assemble_load(const PatchFields& f, const LoadSpec& load, const std::vector<Element>& edge_elements,
                   unsigned flags, FeAssembly& out);

/// Midsurface area and volume integrals: value, d/dX and d/dt.
struct VolumeResult {
  double area = 0.0;
  double volume = 0.0;
  Vec grad_X;  // d volume / dX
  Vec grad_t;  // d volume / dt
};
VolumeResult integrate_volume(const PatchFields& f, bool gradients);

}  // namespace ffdshell
