#pragma once

#include "polyproj/geometry.hpp"

namespace polyproj {

struct NnlsResult {
  Vector solution;        ///< nonnegative coefficients, one per column
  double residual = 0.0;  ///< ||A * solution - b||
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active-set solver for min ||A z - b|| subject to z >= 0.
NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations = 0);

/// True when `v` lies in the cone generated by the columns of `generators`,
/// i.e. the NNLS residual is at most `tol * max(1, ||v||)`.
bool in_cone(const Matrix& generators, const Vector& v, double tol);

}  // namespace polyproj
