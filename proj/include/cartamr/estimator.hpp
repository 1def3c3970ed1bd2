#pragma once

// Residual and flux estimators per cell, the total indicator over facet
// neighbourhoods, and the weighted energy-like norm used for effectivity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/numeric.hpp"
#include "cartamr/quadrature.hpp"
#include "cartamr/reconstruct.hpp"

namespace cartamr {

/// RT0 current of group g inside cell c at reference coordinates xi.
inline Point current_at(const BlockOperators& ops, std::span<const double> P, const CellId& c, std::size_t k,
                        const Point& xi) {
  const auto& mesh = ops.mesh();
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < mesh.dim(); ++a) {
    const std::size_t lo = mesh.face_offset(a) + mesh.cell_face(c, a, 0);
    const std::size_t hi = mesh.face_offset(a) + mesh.cell_face(c, a, 1);
    const double area = ops.volume(k) / mesh.cell_width(c, a);
    const double t = 0.5 * (xi[a] + 1.0);
    p[a] = (ops.current_value(P, lo) * (1.0 - t) + ops.current_value(P, hi) * t) / area;
  }
  return p;
}

inline double divergence(const BlockOperators& ops, std::span<const double> P, const CellId& c, std::size_t k) {
  return ops.net_outflow(P, c) / ops.volume(k);
}

/// Scales (P, phi) so that the mean total flux over the domain is `mean`.
inline void normalize_mean_flux(const BlockOperators& ops, StateVector& s, double mean = 1.0) {
  const std::size_t N = ops.layout().cells;
  const double total = detail::pairwise_reduce(0, s.phi.size() * N, [&](std::size_t i) {
    return s.phi[i / N][i % N] * ops.volume(i % N);
  });
  if (total == 0.0) throw ZeroFissionNorm("normalize_mean_flux: zero flux");
  const double c = mean * ops.mesh().domain_volume() / total;
  for (auto& v : s.P)
    for (double& x : v) x *= c;
  for (auto& v : s.phi)
    for (double& x : v) x *= c;
}

struct EstimatorOptions {
  int quad_points = 3;
  /// Criticality source (1/k) M_f phi: reconstructed flux when true, cell
  /// values otherwise.
  bool fission_from_reconstruction = true;
};

struct CellEstimators {
  std::vector<double> eta_r, eta_f, eta;
  double global = 0.0;

  double max_eta() const { return eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end()); }
  double min_eta() const { return eta.empty() ? 0.0 : *std::min_element(eta.begin(), eta.end()); }
};

/// eta_{r,K} = || delta^{-1/2} (S - div p_h - T_e phi~) ||_{0,K}.  With a
/// null source the fission source (1/k) M_f phi is used.
inline double residual_estimator(const BlockOperators& ops, const StateVector& s, const NodalField& field,
                                 std::size_t k, const SourceField& source = {}, const EstimatorOptions& opt = {}) {
  const auto& mesh = ops.mesh();
  const CellId c = mesh.cell_id(k);
  const auto& co = ops.coeffs(k);
  const std::size_t G = ops.groups();
  const GaussRule rule(opt.quad_points);
  std::vector<double> divp(G), phit(G);
  for (std::size_t g = 0; g < G; ++g) divp[g] = divergence(ops, s.P[g], c, k);
  double sum = 0.0;
  for_each_qpoint(mesh, c, rule, [&](const Point& x, double w, const Point& xi) {
    for (std::size_t g = 0; g < G; ++g) phit[g] = field.eval(g, c, xi);
    double r2 = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      double S = 0.0;
      if (source) {
        S = source(g, x);
      } else {
        for (std::size_t gp = 0; gp < G; ++gp)
          S += co.fission[g][gp] * (opt.fission_from_reconstruction ? phit[gp] : s.phi[gp][k]);
        S /= s.k;
      }
      double r = S - divp[g];
      for (std::size_t gp = 0; gp < G; ++gp) r -= co.removal[g][gp] * phit[gp];
      r2 += r * r / co.delta[g];
    }
    sum += w * r2;
  });
  return std::sqrt(sum);
}

/// eta_{f,K} = || D^{1/2} (D^{-1} p_h + grad phi~) ||_{0,K}
inline double flux_estimator(const BlockOperators& ops, const StateVector& s, const NodalField& field, std::size_t k,
                             const EstimatorOptions& opt = {}) {
  const auto& mesh = ops.mesh();
  const CellId c = mesh.cell_id(k);
  const auto& co = ops.coeffs(k);
  const GaussRule rule(opt.quad_points);
  double sum = 0.0;
  for_each_qpoint(mesh, c, rule, [&](const Point&, double w, const Point& xi) {
    for (std::size_t g = 0; g < ops.groups(); ++g) {
      const Point p = current_at(ops, s.P[g], c, k, xi);
      const Point gr = field.grad(g, c, xi);
      double v = 0.0;
      for (int a = 0; a < mesh.dim(); ++a) {
        const double e = p[a] / co.D[g] + gr[a];
        v += e * e;
      }
      sum += w * co.D[g] * v;
    }
  });
  return std::sqrt(sum);
}

/// eta_K^2 = eta_{r,K}^2 + sum over facet neighbours K' (K included) of
/// eta_{f,K'}^2, and eta(T_h) = (sum eta_K^2)^{1/2}.
inline CellEstimators total_indicator(const CartesianMesh& mesh, std::vector<double> eta_r,
                                      std::vector<double> eta_f) {
  if (eta_r.size() != mesh.num_cells() || eta_f.size() != mesh.num_cells())
    throw DimensionMismatch("total_indicator: estimator sizes differ from the mesh");
  CellEstimators e;
  e.eta.resize(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    double v = eta_r[k] * eta_r[k];
    for (std::size_t n : neighbors(mesh, mesh.cell_id(k))) v += eta_f[n] * eta_f[n];
    e.eta[k] = std::sqrt(v);
  }
  e.global = std::sqrt(detail::pairwise_reduce(0, e.eta.size(), [&](std::size_t i) { return e.eta[i] * e.eta[i]; }));
  e.eta_r = std::move(eta_r);
  e.eta_f = std::move(eta_f);
  return e;
}

inline CellEstimators estimate(const BlockOperators& ops, const StateVector& s, const NodalField& field,
                               const SourceField& source = {}, const EstimatorOptions& opt = {}) {
  const std::size_t N = ops.layout().cells;
  std::vector<double> er(N), ef(N);
  for (std::size_t k = 0; k < N; ++k) {
    er[k] = residual_estimator(ops, s, field, k, source, opt);
    ef[k] = flux_estimator(ops, s, field, k, opt);
  }
  return total_indicator(ops.mesh(), std::move(er), std::move(ef));
}

/// Field description for the weighted norm: callables of (group, cell, x).
struct MixedField {
  std::function<Point(std::size_t, std::size_t, const Point&)> p;
  std::function<double(std::size_t, std::size_t, const Point&)> phi;
  std::function<double(std::size_t, std::size_t, const Point&)> div_p;
};

/// ||zeta||^2 = sum_K ||D^{-1/2} p||^2 + ||delta^{1/2} phi||^2
///              + h_K^2 / D_K^min ||div p||^2
inline double smg_norm(const BlockOperators& ops, const MixedField& z, int quad_points = 3) {
  const auto& mesh = ops.mesh();
  const GaussRule rule(quad_points);
  std::vector<double> cell(mesh.num_cells(), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const CellId c = mesh.cell_id(k);
    const auto& co = ops.coeffs(k);
    const double dmin = *std::min_element(co.D.begin(), co.D.end());
    const double h = mesh.cell_diameter(c);
    double s = 0.0;
    for_each_qpoint(mesh, c, rule, [&](const Point& x, double w, const Point&) {
      for (std::size_t g = 0; g < ops.groups(); ++g) {
        double v = 0.0;
        if (z.p) {
          const Point p = z.p(g, k, x);
          for (int a = 0; a < mesh.dim(); ++a) v += p[a] * p[a] / co.D[g];
        }
        if (z.phi) {
          const double f = z.phi(g, k, x);
          v += co.delta[g] * f * f;
        }
        if (z.div_p) {
          const double dv = z.div_p(g, k, x);
          v += h * h / dmin * dv * dv;
        }
        s += w * v;
      }
    });
    cell[k] = s;
  }
  return std::sqrt(pairwise_sum(cell));
}

/// || phi - phi_h ||_{0, Omega} summed over groups, phi_h piecewise constant.
inline double l2_error_cellwise(const BlockOperators& ops, const StateVector& s,
                                const std::function<double(std::size_t, const Point&)>& exact,
                                int quad_points = 4) {
  const auto& mesh = ops.mesh();
  const GaussRule rule(quad_points);
  std::vector<double> cell(mesh.num_cells(), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k)
    for (std::size_t g = 0; g < ops.groups(); ++g)
      cell[k] += integrate_cell(mesh, mesh.cell_id(k), rule, [&](const Point& x) {
        const double e = exact(g, x) - s.phi[g][k];
        return e * e;
      });
  return std::sqrt(pairwise_sum(cell));
}

/// || phi - phi~ ||_{0, Omega} for a nodal reconstruction.
inline double l2_error_nodal(const BlockOperators& ops, const NodalField& field,
                             const std::function<double(std::size_t, const Point&)>& exact, int quad_points = 4) {
  const auto& mesh = ops.mesh();
  const GaussRule rule(quad_points);
  std::vector<double> cell(mesh.num_cells(), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const CellId c = mesh.cell_id(k);
    for_each_qpoint(mesh, c, rule, [&](const Point& x, double w, const Point& xi) {
      for (std::size_t g = 0; g < ops.groups(); ++g) {
        const double e = exact(g, x) - field.eval(g, c, xi);
        cell[k] += w * e * e;
      }
    });
  }
  return std::sqrt(pairwise_sum(cell));
}

}  // namespace cartamr
