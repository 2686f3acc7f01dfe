#pragma once

#include <stdexcept>
#include <string>

namespace ffdshell {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter or point lies outside the domain of a spline.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A point is not contained in an FFD block.
class ContainmentError : public Error {
 public:
  using Error::Error;
};

/// Tangent vectors of a surface are (numerically) parallel.
class SingularGeometryError : public Error {
 public:
  using Error::Error;
};

/// Linear or nonlinear solver failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Two patch images of an intersection do not agree.
class IntersectionError : public Error {
 public:
  using Error::Error;
};

/// Malformed geometry/config file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace ffdshell
