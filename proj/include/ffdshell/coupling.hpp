#pragma once

#include <vector>

#include "ffdshell/extraction.hpp"
#include "ffdshell/shell.hpp"

namespace ffdshell {

/// Surface-surface intersection given as parametric polylines on both patches.
struct IntersectionSpec {
  int patch_a = 0, patch_b = 0;
  std::vector<Vec2> curve_a, curve_b;
  int num_elements = 0;  // 0: twice the Bezier elements crossed on the finer patch
};

/// Interval quadrature mesh along an intersection with interpolation
/// operators to the FE spaces of both patches.
struct IntersectionCoupling {
  int patch_a = 0, patch_b = 0;
  std::vector<Vec2> xi_a, xi_b;  // mesh node parameters on each patch
  SpMat T0a, T0b;                // value transfer, nodes x FE nodes
  SpMat T1a, T1b;                // derivative transfer, rows 2 n + alpha
  std::vector<double> h;         // averaged physical element size at nodes
  double max_gap = 0.0;
  int num_elements() const { return static_cast<int>(xi_a.size()) - 1; }
};

/// sqrt(physical area) of every Bezier element, index eu * nev + ev.
std::vector<double> element_sizes(const NurbsPatch& patch, const FeSpace& fe);

/// Projects p onto patch by Gauss-Newton point inversion from `guess`.
Vec2 invert_point(const NurbsPatch& patch, const Vec3& p, Vec2 guess, double* distance = nullptr);

/// Throws IntersectionError when the two images differ by more than
/// gap_tol times the larger bounding-box diagonal.
IntersectionCoupling build_coupling(const IntersectionSpec& spec, const NurbsPatch& a, const NurbsPatch& b,
                                    const ExtractionMap& ea, const ExtractionMap& eb, double gap_tol = 1e-6);

/// Penalty parameters for a given averaged thickness and element size.
double penalty_alpha_d(double alpha, const Material& mat, double t, double h);
double penalty_alpha_r(double alpha, const Material& mat, double t, double h);

/// Per-node inputs of the penalty integrand: 18 deformed values
/// {x, x_1, x_2 on A; x, x_1, x_2 on B}, the same 18 for the reference
/// surfaces, and 2 thicknesses {t_A, t_B}.
struct PenaltyFields {
  Vec x;  // 18 n
  Vec X;  // 18 n
  Vec t;  // 2 n
};

struct PenaltyAssembly {
  double energy = 0.0;
  Vec grad_x;        // dW/dx at fixed X (18 n)
  Vec grad_X;        // dW/dX at fixed u (18 n)
  TripletList H_xx;  // 18 n x 18 n
  TripletList H_xX;  // d/dX at fixed u of dW/dx
  TripletList H_xt;  // 18 n x 2 n
};

void assemble_penalty(const IntersectionCoupling& c, const PenaltyFields& f, double alpha, const Material& mat,
                      unsigned flags, PenaltyAssembly& out);

}  // namespace ffdshell
