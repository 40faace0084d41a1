#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace newtonspec {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A query point does not lie on the requested surface.
class OffSurface : public Error {
  using Error::Error;
};

/// Gram-Schmidt could not complete an orthonormal frame (pivot underflow).
class DegenerateFrame : public Error {
  using Error::Error;
};

/// Malformed index tuples passed to the generalized Kronecker symbol.
class InvalidIndex : public Error {
  using Error::Error;
};

/// Tensor order r outside the admissible range (or wrong parity).
class InvalidOrder : public Error {
  using Error::Error;
};

/// Requested surface/dimension combination is not in the catalog.
class Unsupported : public Error {
  using Error::Error;
};

/// Simplex with (numerically) vanishing measure.
class DegenerateElement : public Error {
  using Error::Error;
};

/// Generic invalid argument.
class InvalidInput : public Error {
  using Error::Error;
};

/// Mass matrix is not symmetric positive definite.
class InvalidMass : public Error {
  using Error::Error;
};

/// Report serialization failure (path, permissions, ...).
class ReportWriteError : public Error {
  using Error::Error;
};

/// The coefficient tensor fails positive definiteness somewhere on the mesh.
class NotElliptic : public Error {
 public:
  NotElliptic(const std::string& msg, Eigen::VectorXd point, double margin)
      : Error(msg), worst_point(std::move(point)), worst_margin(margin) {}

  Eigen::VectorXd worst_point;
  double worst_margin;
};

/// Eigensolver ran out of iterations before reaching the residual tolerance.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& msg, std::vector<double> res, int iters)
      : Error(msg), residuals(std::move(res)), iterations(iters) {}

  std::vector<double> residuals;
  int iterations;
};

}  // namespace newtonspec
