#pragma once

#include <string>
#include <vector>

#include "ffdshell/problem.hpp"

namespace ffdshell {

/// Benchmark fixtures. Each returns the analysis model; the design space
/// is built from the constructed system.
SystemSpec arch_system();
DesignSpec arch_design(const CoupledSystem& sys);
SystemSpec tube_system();
DesignSpec tube_design(const CoupledSystem& sys);
SystemSpec tbeam_system();
DesignSpec tbeam_design(const CoupledSystem& sys);
/// Unit square plate of six non-matching strips, clamped at x = 0 with a
/// transverse line force at x = 1.
SystemSpec plate_system();
DesignSpec plate_constant_design();
/// Thickness FFD block of `degree` with three knot spans along x; the
/// thickness is uniform across the width.
DesignSpec plate_ffd_design(const CoupledSystem& sys, int degree);
/// Cantilever plate [0, 1] x [0, 0.5] under pressure, single patch or split
/// at x = 0.5 into non-matching patches.
SystemSpec split_plate_system(bool split, double alpha = 1e3);

/// Euler-Bernoulli cantilever under a tip load with piecewise-constant
/// thickness on `segments` equal segments, fixed volume and thickness bounds
/// [lo, hi] relative to the uniform baseline. Energy ~ sum c_k / t_k^3.
struct BeamOracle {
  Vec thickness;     // relative to the baseline, per segment
  double reduction = 0.0;
  bool converged = false;
};
BeamOracle beam_thickness_oracle(int segments, double lo = 0.1, double hi = 5.0);

/// Thickness along y = 0.5 of the plate for x in [0, 1].
double plate_centerline_thickness(const CoupledSystem& sys, double x);

struct Metric {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;  // pass when |value - expected| <= tolerance; NaN = informational
  bool pass = true;
};

struct BenchmarkReport {
  std::string name;
  bool pass = true;
  bool converged = false;
  int iterations = 0;
  double seconds = 0.0;
  std::vector<Metric> metrics;
  std::string message;

  void check(const std::string& metric, double value, double expected, double tolerance);
  void info(const std::string& metric, double value);
  const Metric* find(const std::string& metric) const;
};

struct BenchmarkOptions {
  std::string output_dir;  // empty: no files written
  bool verbose = false;
};

const std::vector<std::string>& benchmark_names();
/// Throws ValidationError for unknown names.
BenchmarkReport run_benchmark(const std::string& name, const BenchmarkOptions& opt = {});

}  // namespace ffdshell
