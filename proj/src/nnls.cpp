#include "polyproj/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "polyproj/errors.hpp"

namespace polyproj {

namespace {

// Unconstrained least squares restricted to the columns flagged in `passive`.
Vector solve_passive(const Matrix& a, const Vector& b, const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < passive.size(); ++j) {
    if (passive[j]) cols.push_back(static_cast<Eigen::Index>(j));
  }
  Vector z = Vector::Zero(a.cols());
  if (cols.empty()) return z;
  Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(cols[k]);
  const Vector zs = sub.colPivHouseholderQr().solve(b);
  for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zs(static_cast<Eigen::Index>(k));
  return z;
}

}  // namespace

NnlsResult nnls(const Matrix& a, const Vector& b, int max_iterations) {
  if (a.rows() != b.size()) throw DimensionMismatch("nnls", "matrix rows do not match right-hand side");
  const auto n = a.cols();
  if (max_iterations <= 0) max_iterations = 3 * static_cast<int>(n) + 10;

  NnlsResult result;
  result.solution = Vector::Zero(n);
  if (n == 0) {
    result.residual = b.norm();
    result.converged = true;
    return result;
  }

  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  const double wtol = 10.0 * std::numeric_limits<double>::epsilon() * scale * scale *
                      static_cast<double>(std::max<Eigen::Index>(n, a.rows()));

  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector& x = result.solution;
  Vector w = a.transpose() * (b - a * x);

  while (result.iterations < max_iterations) {
    Eigen::Index best = -1;
    double best_w = wtol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) {
      result.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;
    ++result.iterations;

    // Inner loop: step toward the unconstrained solution until it is feasible.
    while (true) {
      Vector z = solve_passive(a, b, passive);
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= std::numeric_limits<double>::epsilon() * scale) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
      }
    }
    w = a.transpose() * (b - a * x);
  }

  result.residual = (a * x - b).norm();
  return result;
}

bool in_cone(const Matrix& generators, const Vector& v, double tol) {
  const auto r = nnls(generators, v);
  return r.residual <= tol * std::max(1.0, v.norm());
}

}  // namespace polyproj
