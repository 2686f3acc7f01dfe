#pragma once

#include <functional>

#include "ffdshell/spline.hpp"

namespace ffdshell {

/// Open uniform knots with the given number of basis functions.
KnotVector uniform_knots(int degree, int num_basis, double a = 0.0, double b = 1.0);

/// Patch with open uniform knots whose control points are placed at the
/// Greville abscissae mapped through `map`; exact for maps that are
/// polynomial of degree <= 1 in each parameter, an interpolating
/// approximation otherwise.
NurbsPatch greville_patch(int pu, int pv, int nu, int nv, const std::function<Vec3(double, double)>& map,
                          double thickness);

/// Patch interpolating `map` at the tensor Greville points; exact for maps
/// that lie in the spline space (e.g. polynomials up to the degree).
NurbsPatch interpolating_patch(int pu, int pv, int nu, int nv, const std::function<Vec3(double, double)>& map,
                               double thickness);

/// Flat parallelogram origin + u e1 + v e2, u, v in [0, 1].
NurbsPatch flat_patch(const Vec3& origin, const Vec3& e1, const Vec3& e2, int pu, int pv, int nu, int nv,
                      double thickness);

}  // namespace ffdshell
