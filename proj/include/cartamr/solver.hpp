#pragma once

// Nested iterations for the mixed system: inverse power iteration outside,
// Gauss-Seidel over energy groups, and alternating-direction sweeps of
// tridiagonal line solves for the currents of one group.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/numeric.hpp"
#include "cartamr/tridiag.hpp"

namespace cartamr {

struct SolverConfig {
  double outer_tol = 1e-6;
  double inner_tol = 1e-2;   // relative l-inf change of P^g between sweeps
  int max_inner = 20;
  int max_outer = 5000;
  bool chebyshev = false;
  int chebyshev_delay = 5;   // plain iterations before acceleration may start
  bool require_convergence = true;

  void validate() const {
    if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidArgument("solver tolerances must be positive");
    if (max_inner < 1 || max_outer < 1) throw InvalidArgument("iteration caps must be positive");
  }
};

struct OuterRecord {
  double eps = 0.0;
  double k = 1.0;
  std::vector<int> inner_sweeps;  // per group
  bool accelerated = false;
  friend bool operator==(const OuterRecord&, const OuterRecord&) = default;
};

struct IterationReport {
  std::vector<OuterRecord> outer;
  bool converged = false;
  double wall_seconds = 0.0;  // excluded from comparisons

  int iterations() const { return static_cast<int>(outer.size()); }
  friend bool operator==(const IterationReport& a, const IterationReport& b) {
    return a.outer == b.outer && a.converged == b.converged;
  }
};

struct SolveResult {
  StateVector state;
  IterationReport report;
};

/// k_{M+1} = k_M (F_{M+1} . F_{M+1}) / (F_M . F_{M+1})
inline double update_keff(double k, std::span<const double> f_old, std::span<const double> f_new) {
  if (f_old.size() != f_new.size()) throw DimensionMismatch("update_keff: size mismatch");
  const double den = dot(f_old, f_new);
  if (den == 0.0) throw DegenerateFissionSource("update_keff: fission sources are orthogonal");
  return k * dot(f_new, f_new) / den;
}

/// || F_{M+1}/k_{M+1} - F_M/k_M ||_inf / || F_{M+1}/k_{M+1} ||_1
inline double residual_eps(double k_old, double k_new, std::span<const double> f_old,
                           std::span<const double> f_new) {
  if (f_old.size() != f_new.size()) throw DimensionMismatch("residual_eps: size mismatch");
  if (k_old == 0.0 || k_new == 0.0) throw ZeroFissionNorm("residual_eps: zero eigenvalue");
  const double den = norm_l1(f_new) / std::abs(k_new);
  if (den == 0.0) throw ZeroFissionNorm("residual_eps: zero fission source");
  double m = 0.0;
  for (std::size_t i = 0; i < f_new.size(); ++i) m = std::fmax(m, std::abs(f_new[i] / k_new - f_old[i] / k_old));
  return m / den;
}

/// Dominance ratio from the last three residuals, or a value outside (0, 1)
/// when no estimate is available.
inline double estimate_dominance_ratio(std::span<const double> eps) {
  if (eps.size() < 3) return -1.0;
  const double e0 = eps[eps.size() - 3], e2 = eps[eps.size() - 1];
  if (!(e0 > 0.0) || !(e2 >= 0.0)) return -1.0;
  return std::sqrt(e2 / e0);
}

/// Two-term Chebyshev coefficients (alpha_p, beta_p) for a power iteration
/// whose subdominant spectrum lies in [0, sigma]; p counts from 1.
struct ChebyshevCoefficients {
  double alpha = 1.0;
  double beta = 0.0;
};

inline ChebyshevCoefficients chebyshev_coefficients(double sigma, int p) {
  if (!(sigma > 0.0 && sigma < 1.0)) return {};
  if (p <= 1) return {2.0 / (2.0 - sigma), 0.0};
  const double gamma = std::acosh(2.0 / sigma - 1.0);
  // cosh((p-1)g)/cosh(pg) evaluated without overflow
  const double pm = static_cast<double>(p - 1), pp = static_cast<double>(p);
  const double ratio = std::exp(-gamma) * (1.0 + std::exp(-2.0 * pm * gamma)) / (1.0 + std::exp(-2.0 * pp * gamma));
  const double alpha = 4.0 / sigma * ratio;
  return {alpha, (1.0 - 0.5 * sigma) * alpha - 1.0};
}

/// || M Z - S ||_inf / || S ||_1 with S = F Z / k (criticality) or the
/// source moments (when given).
inline double discrete_residual(const BlockOperators& ops, const StateVector& s,
                                std::span<const double> moments = {}) {
  const auto& l = ops.layout();
  const auto z = s.flatten();
  std::vector<double> mz(l.size()), rhs(l.size(), 0.0);
  ops.apply_M(z, mz);
  if (moments.empty()) {
    ops.apply_F(z, rhs);
    for (double& v : rhs) v /= s.k;
  } else {
    for (std::size_t g = 0; g < l.groups; ++g)
      for (std::size_t k = 0; k < l.cells; ++k) rhs[l.flux(g, k)] = moments[g * l.cells + k];
  }
  double m = 0.0;
  for (std::size_t i = 0; i < mz.size(); ++i) m = std::fmax(m, std::abs(mz[i] - rhs[i]));
  const double den = norm_l1(rhs);
  return den > 0.0 ? m / den : m;
}

class MinosSolver {
 public:
  explicit MinosSolver(const BlockOperators& ops, SolverConfig config = {}) : ops_(ops), cfg_(config) {
    cfg_.validate();
    std::size_t nmax = 1;
    for (int a = 0; a < ops_.mesh().dim(); ++a) nmax = std::max(nmax, ops_.mesh().cells_along(a) + 1);
    diag_.resize(nmax);
    off_.resize(nmax);
    rhs_.resize(nmax);
    work_.resize(nmax);
    r_.resize(ops_.layout().cells);
  }

  const SolverConfig& config() const { return cfg_; }
  SolverConfig& config() { return cfg_; }

  /// Initial guess: phi = 1, P = 0, k = 1.
  StateVector initial_state() const {
    StateVector s = StateVector::zeros(ops_.layout());
    for (auto& v : s.phi) std::fill(v.begin(), v.end(), 1.0);
    s.k = 1.0;
    return s;
  }

  /// One directional Gauss-Seidel pass over the axes for group g with flux
  /// right-hand side S (one entry per cell).  Returns the relative l-inf
  /// change of P^g.
  double inner_sweep(std::size_t g, std::span<const double> S, StateVector& s) {
    const auto& mesh = ops_.mesh();
    auto& P = s.P[g];
    double change = 0.0, size = 0.0;
    for (int a = 0; a < mesh.dim(); ++a) {
      fill_reduced_rhs(g, a, S, P);
      for_each_line(a, [&](const CellId& base) {
        const std::size_t n = mesh.cells_along(a);
        const std::size_t cell0 = mesh.cell_index(base);
        const std::size_t face0 = mesh.face_offset(a) + mesh.face_index(a, base);
        const std::size_t cs = mesh.cell_stride(a), fs = mesh.face_stride(a, a);
        std::fill_n(diag_.begin(), n + 1, 0.0);
        std::fill_n(rhs_.begin(), n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t k = cell0 + i * cs;
          const double h = mesh.width(a, base[a] + i);
          const double A = h * h / (ops_.coeffs(k).D[g] * ops_.volume(k));
          const double invt = 1.0 / ops_.t_entry(g, g, k);
          diag_[i] += A / 3.0 + invt;
          diag_[i + 1] += A / 3.0 + invt;
          off_[i] = A / 6.0 - invt;
          rhs_[i] -= r_[k];
          rhs_[i + 1] += r_[k];
        }
        for (std::size_t j = 0; j <= n; j += n) {
          const std::size_t f = face0 + j * fs;
          if (ops_.eliminated(f)) {
            diag_[j] = 1.0;
            rhs_[j] = 0.0;
            if (j > 0) off_[j - 1] = 0.0;
            if (j < n) off_[j] = 0.0;
          } else {
            diag_[j] += ops_.robin(f);
          }
        }
        line_solve(std::span<const double>(diag_.data(), n + 1), std::span<const double>(off_.data(), n),
                   std::span<double>(rhs_.data(), n + 1), std::span<double>(work_.data(), n + 1));
        for (std::size_t j = 0; j <= n; ++j) {
          const std::size_t f = face0 + j * fs;
          change = std::fmax(change, std::abs(rhs_[j] - P[f]));
          size = std::fmax(size, std::abs(rhs_[j]));
          P[f] = rhs_[j];
        }
      });
    }
    return size > 0.0 ? change / size : change;
  }

  /// Inner iteration for group g; returns the number of sweeps.
  int inner_solve(std::size_t g, std::span<const double> S, StateVector& s, double tol, int max_sweeps) {
    if (ops_.mesh().dim() == 1) {
      inner_sweep(g, S, s);
      return 1;
    }
    int j = 0;
    while (j < max_sweeps) {
      ++j;
      if (inner_sweep(g, S, s) <= tol) break;
    }
    return j;
  }

  /// phi^g = T_gg^{-1} (S - B^T P^g)
  void update_flux(std::size_t g, std::span<const double> S, StateVector& s) const {
    const auto& mesh = ops_.mesh();
    for (std::size_t k = 0; k < ops_.layout().cells; ++k)
      s.phi[g][k] = (S[k] - ops_.net_outflow(s.P[g], mesh.cell_id(k))) / ops_.t_entry(g, g, k);
  }

  /// Gauss-Seidel pass over groups in increasing order.  `src` holds the
  /// group-major flux right-hand side (fission source over k, or source
  /// moments).  Scattering from other groups uses their latest values.
  std::vector<int> outer_sweep(StateVector& s, std::span<const double> src, double inner_tol, int max_inner) {
    const std::size_t G = ops_.groups(), N = ops_.layout().cells;
    if (src.size() != G * N || !s.matches(ops_.layout())) throw DimensionMismatch("outer_sweep: layout mismatch");
    std::vector<int> sweeps(G, 0);
    std::vector<double> S(N);
    for (std::size_t g = 0; g < G; ++g) {
      for (std::size_t k = 0; k < N; ++k) {
        double v = src[g * N + k];
        for (std::size_t gp = 0; gp < G; ++gp)
          if (gp != g) v -= ops_.t_entry(g, gp, k) * s.phi[gp][k];
        S[k] = v;
      }
      sweeps[g] = inner_solve(g, S, s, inner_tol, max_inner);
      update_flux(g, S, s);
    }
    return sweeps;
  }

  SolveResult solve_criticality() { return solve_criticality(initial_state()); }

  SolveResult solve_criticality(StateVector s) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!s.matches(ops_.layout())) throw DimensionMismatch("solve_criticality: initial state layout mismatch");
    const std::size_t n = s.phi.size() * ops_.layout().cells;
    SolveResult out;
    auto f_old = ops_.fission_source(s);
    const double norm0 = norm_l1(f_old);
    if (norm0 == 0.0) throw DegenerateFissionSource("initial guess produces no fission source");
    scale(s, f_old, 1.0 / norm0);
    double k = s.k > 0.0 ? s.k : 1.0;
    double inner_tol = cfg_.inner_tol;
    std::vector<double> eps_hist, src(n);
    std::vector<double> z_prev;
    bool cheb_active = false, cheb_disabled = !cfg_.chebyshev;
    double sigma = 0.0;
    int p = 0, growth = 0;

    for (int M = 0; M < cfg_.max_outer; ++M) {
      for (std::size_t i = 0; i < n; ++i) src[i] = f_old[i] / k;
      std::vector<double> z_cur;
      if (!cheb_disabled) z_cur = s.flatten();
      OuterRecord rec;
      rec.inner_sweeps = outer_sweep(s, src, inner_tol, cfg_.max_inner);
      auto f_new = ops_.fission_source(s);
      const double k_new = update_keff(k, f_old, f_new);
      const double eps = residual_eps(k, k_new, f_old, f_new);
      const double norm = norm_l1(f_new);
      if (norm == 0.0) throw ZeroFissionNorm("fission source vanished");
      scale(s, f_new, 1.0 / norm);

      if ((!eps_hist.empty() && eps > 0.999 * eps_hist.back()) || eps < inner_tol)
        inner_tol = std::max(kInnerFloor, 0.1 * inner_tol);
      if (!eps_hist.empty() && eps > eps_hist.back()) ++growth;
      else growth = 0;
      eps_hist.push_back(eps);

      if (!cheb_disabled) {
        if (cheb_active && growth >= 5) {
          cheb_active = false;
          cheb_disabled = true;
        }
        if (!cheb_active && !cheb_disabled && M + 1 >= cfg_.chebyshev_delay) {
          sigma = estimate_dominance_ratio(eps_hist);
          if (sigma > 0.0 && sigma < 1.0) {
            cheb_active = true;
            p = 0;
          }
        }
        if (cheb_active && eps > cfg_.outer_tol) {
          const auto c = chebyshev_coefficients(sigma, ++p);
          auto z_new = s.flatten();
          for (std::size_t i = 0; i < z_new.size(); ++i) {
            const double back = p > 1 ? z_cur[i] - z_prev[i] : 0.0;
            z_new[i] = z_cur[i] + c.alpha * (z_new[i] - z_cur[i]) + c.beta * back;
          }
          s = StateVector::unflatten(ops_.layout(), z_new);
          f_new = ops_.fission_source(s);
          const double nn = norm_l1(f_new);
          if (nn == 0.0) throw ZeroFissionNorm("fission source vanished after extrapolation");
          scale(s, f_new, 1.0 / nn);
          rec.accelerated = true;
        }
        z_prev = std::move(z_cur);
      }

      rec.eps = eps;
      rec.k = k_new;
      out.report.outer.push_back(rec);
      k = k_new;
      f_old = std::move(f_new);
      s.k = k;
      if (eps <= cfg_.outer_tol) {
        if (discrete_residual(ops_, s) > 10.0 * cfg_.outer_tol) {
          inner_tol = std::max(kInnerFloor, 0.1 * inner_tol);
          continue;
        }
        out.report.converged = true;
        break;
      }
    }
    s.k = k;
    out.state = std::move(s);
    out.report.wall_seconds = seconds_since(t0);
    if (!out.report.converged && cfg_.require_convergence)
      throw MaxIterationsExceeded("criticality solve did not reach the outer tolerance in " +
                                  std::to_string(cfg_.max_outer) + " iterations");
    return out;
  }

  SolveResult solve_source(const SourceField& source) {
    return solve_source(ops_.source_moments(source), StateVector::zeros(ops_.layout()));
  }

  /// Fixed-source iteration; convergence on the relative change of the
  /// cell fluxes (same formula as the eigenvalue residual with k = 1).
  SolveResult solve_source(std::span<const double> moments, StateVector s) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!s.matches(ops_.layout())) throw DimensionMismatch("solve_source: initial state layout mismatch");
    SolveResult out;
    double inner_tol = cfg_.inner_tol;
    double last = -1.0;
    for (int M = 0; M < cfg_.max_outer; ++M) {
      std::vector<double> old = flat_phi(s);
      OuterRecord rec;
      rec.inner_sweeps = outer_sweep(s, moments, inner_tol, cfg_.max_inner);
      std::vector<double> now = flat_phi(s);
      double eps = 0.0;
      if (norm_l1(now) > 0.0) eps = residual_eps(1.0, 1.0, old, now);
      else if (norm_l1(old) > 0.0) eps = 1.0;
      if ((last >= 0.0 && eps > 0.999 * last) || eps < inner_tol) inner_tol = std::max(kInnerFloor, 0.1 * inner_tol);
      last = eps;
      rec.eps = eps;
      out.report.outer.push_back(rec);
      if (eps <= cfg_.outer_tol) {
        s.k = 1.0;
        if (discrete_residual(ops_, s, moments) > 10.0 * cfg_.outer_tol) {
          inner_tol = std::max(kInnerFloor, 0.1 * inner_tol);
          continue;
        }
        out.report.converged = true;
        break;
      }
    }
    s.k = 1.0;
    out.state = std::move(s);
    out.report.wall_seconds = seconds_since(t0);
    if (!out.report.converged && cfg_.require_convergence)
      throw MaxIterationsExceeded("source solve did not reach the outer tolerance in " +
                                  std::to_string(cfg_.max_outer) + " iterations");
    return out;
  }

 private:
  static constexpr double kInnerFloor = 1e-12;

  template <class F>
  void for_each_line(int a, F&& f) const {
    const auto& mesh = ops_.mesh();
    Index3 n = mesh.shape();
    n[a] = 1;
    for (std::size_t k = 0; k < n[2]; ++k)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t i = 0; i < n[0]; ++i) f(CellId{i, j, k});
  }

  /// r_K = (S_K - sum_{b != a} (B_b^T P_b)_K) / t_K
  void fill_reduced_rhs(std::size_t g, int a, std::span<const double> S, std::span<const double> P) {
    const auto& mesh = ops_.mesh();
    const std::size_t N = ops_.layout().cells;
    for (std::size_t k = 0; k < N; ++k) {
      const CellId c = mesh.cell_id(k);
      double v = S[k];
      for (int b = 0; b < mesh.dim(); ++b) {
        if (b == a) continue;
        const std::size_t lo = mesh.face_offset(b) + mesh.cell_face(c, b, 0);
        const std::size_t hi = mesh.face_offset(b) + mesh.cell_face(c, b, 1);
        v -= ops_.current_value(P, hi) - ops_.current_value(P, lo);
      }
      r_[k] = v / ops_.t_entry(g, g, k);
    }
  }

  static void scale(StateVector& s, std::vector<double>& f, double c) {
    for (auto& v : s.P)
      for (double& x : v) x *= c;
    for (auto& v : s.phi)
      for (double& x : v) x *= c;
    for (double& x : f) x *= c;
  }

  static std::vector<double> flat_phi(const StateVector& s) {
    std::vector<double> out;
    for (const auto& v : s.phi) out.insert(out.end(), v.begin(), v.end());
    return out;
  }

  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  const BlockOperators& ops_;
  SolverConfig cfg_;
  std::vector<double> diag_, off_, rhs_, work_, r_;
};

}  // namespace cartamr
