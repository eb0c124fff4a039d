#pragma once

namespace polyproj {

/// Numerical thresholds shared by every module. Constraint slacks are measured
/// on unit-normalized halfspaces, so the values are in units of distance.
struct Tolerances {
  double orth = 1e-9;   ///< orthonormality defect allowed in stored bases
  double feas = 1e-9;   ///< residual allowed when a point claims to satisfy a constraint
  double rank = 1e-10;  ///< relative residual below which a direction counts as dependent
  double act = 1e-7;    ///< slack below which a constraint is declared active
  double dual = 1e-8;   ///< NNLS residual allowed for cone membership
};

}  // namespace polyproj
