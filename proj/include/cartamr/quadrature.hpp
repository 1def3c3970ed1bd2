#pragma once

// Tensor Gauss-Legendre rules on axis-aligned boxes.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/mesh.hpp"

namespace cartamr {

/// n-point Gauss-Legendre rule on [-1, 1], exact for degree 2n - 1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;

  explicit GaussRule(int n) {
    switch (n) {
      case 1:
        points = {0.0};
        weights = {2.0};
        break;
      case 2: {
        const double p = 1.0 / std::sqrt(3.0);
        points = {-p, p};
        weights = {1.0, 1.0};
        break;
      }
      case 3: {
        const double p = std::sqrt(0.6);
        points = {-p, 0.0, p};
        weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        break;
      }
      case 4: {
        const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
        const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
        const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
        const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
        points = {-b, -a, a, b};
        weights = {wb, wa, wa, wb};
        break;
      }
      case 5: {
        const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
        const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
        const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
        points = {-b, -a, 0.0, a, b};
        weights = {wb, wa, 128.0 / 225.0, wa, wb};
        break;
      }
      default:
        throw InvalidArgument("GaussRule: supported orders are 1..5");
    }
  }

  int size() const { return static_cast<int>(points.size()); }
  int exact_degree() const { return 2 * size() - 1; }
};

/// Calls f(x, w) for every tensor quadrature point of cell c, where x is the
/// physical point and w the physical weight.  Reference coordinates in
/// [-1, 1]^d are passed as the third argument.
template <class F>
void for_each_qpoint(const CartesianMesh& mesh, const CellId& c, const GaussRule& rule, F&& f) {
  const int d = mesh.dim();
  const int n = rule.size();
  std::array<double, kMaxDim> center{}, half{};
  for (int a = 0; a < d; ++a) {
    center[a] = mesh.axis(a).center(c[a]);
    half[a] = 0.5 * mesh.axis(a).width(c[a]);
  }
  std::array<int, kMaxDim> count{1, 1, 1};
  for (int a = 0; a < d; ++a) count[a] = n;
  for (int k = 0; k < count[2]; ++k)
    for (int j = 0; j < count[1]; ++j)
      for (int i = 0; i < count[0]; ++i) {
        const std::array<int, kMaxDim> idx{i, j, k};
        Point x{0.0, 0.0, 0.0}, ref{0.0, 0.0, 0.0};
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
          ref[a] = rule.points[idx[a]];
          x[a] = center[a] + half[a] * ref[a];
          w *= rule.weights[idx[a]] * half[a];
        }
        f(x, w, ref);
      }
}

template <class F>
double integrate_cell(const CartesianMesh& mesh, const CellId& c, const GaussRule& rule, F&& f) {
  double s = 0.0;
  for_each_qpoint(mesh, c, rule, [&](const Point& x, double w, const Point&) { s += w * f(x); });
  return s;
}

}  // namespace cartamr
