#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"

namespace cartamr {

/// Solves a symmetric tridiagonal system in place with Thomas elimination.
/// diag has n entries, off has n - 1 (off[i] couples i and i + 1), rhs is
/// overwritten by the solution.  `work` must hold n entries.  Throws NonSPD
/// as soon as a pivot is not positive.
inline void line_solve(std::span<const double> diag, std::span<const double> off, std::span<double> rhs,
                       std::span<double> work) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  if (off.size() + 1 != n || rhs.size() != n || work.size() < n)
    throw DimensionMismatch("line_solve: inconsistent sizes");
  double pivot = diag[0];
  if (!(pivot > 0.0)) throw NonSPD("line_solve: non-positive pivot at row 0");
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    work[i - 1] = off[i - 1] / pivot;
    pivot = diag[i] - off[i - 1] * work[i - 1];
    if (!(pivot > 0.0)) throw NonSPD("line_solve: non-positive pivot at row " + std::to_string(i));
    rhs[i] = (rhs[i] - off[i - 1] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i] * rhs[i + 1];
}

inline std::vector<double> line_solve(std::span<const double> diag, std::span<const double> off,
                                      std::span<const double> rhs) {
  std::vector<double> x(rhs.begin(), rhs.end()), work(diag.size());
  line_solve(diag, off, x, work);
  return x;
}

}  // namespace cartamr
