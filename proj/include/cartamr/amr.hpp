#pragma once

// SOLVE - ESTIMATE - MARK - REFINE on tensor meshes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/estimator.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/geometry.hpp"
#include "cartamr/mesh.hpp"
#include "cartamr/reconstruct.hpp"
#include "cartamr/solver.hpp"

namespace cartamr {

enum class MarkStrategy { Bulk, Direction };

struct MarkConfig {
  double theta = 0.5;
  MarkStrategy strategy = MarkStrategy::Direction;

  void validate() const {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in (0, 1]");
  }
};

namespace detail {

/// Shortest prefix of `order` (scores squared in sq) whose sum reaches
/// theta^2 times the total.
inline std::size_t prefix_length(const std::vector<std::size_t>& order, const std::vector<double>& sq,
                                 double total_sq, double theta) {
  const double target = theta * theta * total_sq * (1.0 - 1e-12);
  double acc = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    acc += sq[order[i]];
    if (acc >= target) return i + 1;
  }
  return order.size();
}

inline std::vector<std::size_t> descending_order(const std::vector<double>& score) {
  std::vector<std::size_t> order(score.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  return order;
}

}  // namespace detail

/// Minimal set of cells whose root-sum-square reaches theta eta(T_h),
/// returned as sorted linear indices.
inline std::vector<std::size_t> mark_bulk(const std::vector<double>& eta, double theta) {
  MarkConfig{theta}.validate();
  std::vector<double> sq(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] < 0.0) throw InvalidArgument("mark_bulk: negative indicator");
    sq[i] = eta[i] * eta[i];
  }
  const double total = pairwise_sum(sq);
  if (total == 0.0) return {};
  const auto order = detail::descending_order(sq);
  const std::size_t n = detail::prefix_length(order, sq, total, theta);
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<long>(n));
  std::sort(out.begin(), out.end());
  return out;
}

/// Per-axis slab scores eta(slab)^2 = sum of eta_K^2 over the slab.
inline std::vector<double> slab_scores_sq(const std::vector<double>& eta, const CartesianMesh& mesh, int axis) {
  std::vector<double> s(mesh.cells_along(axis), 0.0);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) s[mesh.cell_id(k)[axis]] += eta[k] * eta[k];
  return s;
}

/// For every axis, the fewest slabs whose root-sum-square reaches
/// theta eta(T_h); the union over axes is returned.
inline std::set<Slab> mark_direction(const std::vector<double>& eta, const CartesianMesh& mesh, double theta) {
  MarkConfig{theta}.validate();
  if (eta.size() != mesh.num_cells()) throw DimensionMismatch("mark_direction: indicator size differs from mesh");
  double total = 0.0;
  for (double v : eta) {
    if (v < 0.0) throw InvalidArgument("mark_direction: negative indicator");
    total += v * v;
  }
  std::set<Slab> out;
  if (total == 0.0) return out;
  for (int a = 0; a < mesh.dim(); ++a) {
    const auto sq = slab_scores_sq(eta, mesh, a);
    const double axis_total = std::accumulate(sq.begin(), sq.end(), 0.0);
    const auto order = detail::descending_order(sq);
    const std::size_t n = detail::prefix_length(order, sq, axis_total, theta);
    for (std::size_t i = 0; i < n; ++i) out.insert(Slab{a, order[i]});
  }
  return out;
}

/// Slabs through every marked cell, so that bulk marking still refines a
/// tensor mesh.
inline std::set<Slab> slabs_of_cells(const CartesianMesh& mesh, const std::vector<std::size_t>& cells) {
  std::set<Slab> out;
  for (std::size_t k : cells) {
    const CellId c = mesh.cell_id(k);
    for (int a = 0; a < mesh.dim(); ++a) out.insert(Slab{a, c[a]});
  }
  return out;
}

/// Transfers a state to a nested refinement: children inherit the cell
/// value, faces on surviving planes inherit their share of the parent flux,
/// new interior faces start at zero.
inline StateVector inject_state(const CartesianMesh& coarse, const StateVector& s, const CartesianMesh& fine) {
  const int d = fine.dim();
  if (coarse.dim() != d) throw DimensionMismatch("inject_state: dimensions differ");
  std::array<std::vector<std::size_t>, kMaxDim> cell_map, plane_map;
  for (int a = 0; a < kMaxDim; ++a) {
    cell_map[a].assign(fine.cells_along(a), 0);
    plane_map[a].assign(fine.cells_along(a) + 1, 0);
    if (a >= d) continue;
    for (std::size_t i = 0; i < fine.cells_along(a); ++i) cell_map[a][i] = coarse.axis(a).locate(fine.axis(a).center(i));
    for (std::size_t j = 0; j <= fine.cells_along(a); ++j)
      plane_map[a][j] = coarse.axis(a).find_coord(fine.axis(a).coord(j));
  }
  const std::size_t G = s.phi.size();
  StateVector out = StateVector::zeros({G, fine.num_faces_total(), fine.num_cells()});
  out.k = s.k;
  for (std::size_t k = 0; k < fine.num_cells(); ++k) {
    const CellId c = fine.cell_id(k);
    const std::size_t ck = coarse.cell_index({cell_map[0][c[0]], cell_map[1][c[1]], cell_map[2][c[2]]});
    for (std::size_t g = 0; g < G; ++g) out.phi[g][k] = s.phi[g][ck];
  }
  for (int a = 0; a < d; ++a) {
    for (std::size_t lf = 0; lf < fine.num_faces(a); ++lf) {
      const FaceId f = fine.face_id(a, lf);
      const std::size_t plane = plane_map[a][f.index[a]];
      if (plane == AxisGrid::npos) continue;
      FaceId cf{a, {}};
      for (int b = 0; b < kMaxDim; ++b) cf.index[b] = b == a ? plane : cell_map[b][f.index[b]];
      const double ratio = fine.face_area(f) / coarse.face_area(cf);
      const std::size_t from = coarse.global_face_index(cf), to = fine.face_offset(a) + lf;
      for (std::size_t g = 0; g < G; ++g) out.P[g][to] = s.P[g][from] * ratio;
    }
  }
  return out;
}

struct AmrConfig {
  double eps_amr = 0.06;
  int max_iterations = 10;  // refinements allowed
  Reconstruction reconstruction = Reconstruction::PostProcessing;
  bool warm_start = false;
  std::size_t max_cells = 0;  // 0: unlimited; otherwise stop before exceeding
  EstimatorOptions estimator;

  void validate() const {
    if (!(eps_amr > 0.0)) throw InvalidArgument("eps_amr must be positive");
    if (max_iterations < 0) throw InvalidArgument("max_iterations must be >= 0");
  }
};

struct AmrRow {
  int iteration = 0;
  std::size_t n_cells = 0;
  double max_eta = 0.0;
  double keff = 0.0;  // criticality: k_h; source: eta(T_h)
  std::array<std::size_t, kMaxDim> marked_slabs{0, 0, 0};
  int outer_iterations = 0;
  double wall_seconds = 0.0;  // excluded from comparisons

  friend bool operator==(const AmrRow& a, const AmrRow& b) {
    return a.iteration == b.iteration && a.n_cells == b.n_cells && a.max_eta == b.max_eta && a.keff == b.keff &&
           a.marked_slabs == b.marked_slabs && a.outer_iterations == b.outer_iterations;
  }
};

enum class AmrStop { Converged, MaxIterations, CellCap };

struct AmrTrace {
  std::vector<AmrRow> rows;
  AmrStop stop = AmrStop::MaxIterations;
  friend bool operator==(const AmrTrace&, const AmrTrace&) = default;
};

struct AmrResult {
  AmrTrace trace;
  CartesianMesh mesh;
  StateVector state;  // scaled as used by the estimators
  CellEstimators estimators;
  NodalField field;
};

/// Solve on one mesh and evaluate the estimators.  In criticality mode the
/// returned state is scaled to unit mean total flux.
struct SolveEstimate {
  StateVector state;
  IterationReport report;
  NodalField field;
  CellEstimators estimators;
};

inline SolveEstimate solve_and_estimate(const ProblemDefinition& problem, const BlockOperators& ops,
                                        const SolverConfig& scfg, Reconstruction recon,
                                        const EstimatorOptions& eopt = {},
                                        std::optional<StateVector> initial = std::nullopt) {
  MinosSolver solver(ops, scfg);
  SolveResult r;
  if (problem.mode == ProblemMode::Criticality) {
    r = initial ? solver.solve_criticality(std::move(*initial)) : solver.solve_criticality();
    normalize_mean_flux(ops, r.state);
  } else {
    const auto moments = ops.source_moments(problem.source);
    r = solver.solve_source(moments, initial ? std::move(*initial) : StateVector::zeros(ops.layout()));
  }
  SolveEstimate out;
  out.field = reconstruct(recon, ops, r.state, problem.boundary);
  const SourceField src = problem.mode == ProblemMode::Source ? problem.source : SourceField{};
  out.estimators = estimate(ops, r.state, out.field, src, eopt);
  out.state = std::move(r.state);
  out.report = std::move(r.report);
  return out;
}

inline AmrResult run_amr(const ProblemDefinition& problem, CartesianMesh mesh, const AmrConfig& acfg,
                         const MarkConfig& mcfg, const SolverConfig& scfg) {
  acfg.validate();
  mcfg.validate();
  problem.validate();
  AmrResult out;
  std::optional<StateVector> guess;
  for (int it = 0;; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    BlockOperators ops(mesh, problem);
    auto se = solve_and_estimate(problem, ops, scfg, acfg.reconstruction, acfg.estimator, std::move(guess));
    guess.reset();
    AmrRow row;
    row.iteration = it;
    row.n_cells = mesh.num_cells();
    row.max_eta = se.estimators.max_eta();
    row.keff = problem.mode == ProblemMode::Criticality ? se.state.k : se.estimators.global;
    row.outer_iterations = se.report.iterations();

    bool done = false;
    if (row.max_eta <= acfg.eps_amr) {
      out.trace.stop = AmrStop::Converged;
      done = true;
    } else if (it >= acfg.max_iterations) {
      out.trace.stop = AmrStop::MaxIterations;
      done = true;
    }
    std::optional<CartesianMesh> next;
    if (!done) {
      std::set<Slab> slabs = mcfg.strategy == MarkStrategy::Direction
                                 ? mark_direction(se.estimators.eta, mesh, mcfg.theta)
                                 : slabs_of_cells(mesh, mark_bulk(se.estimators.eta, mcfg.theta));
      for (const Slab& s : slabs) ++row.marked_slabs[s.axis];
      CartesianMesh refined = refine_slabs(mesh, slabs);
      if (refined.num_cells() == mesh.num_cells()) throw NoProgress("refinement produced no new cells");
      if (acfg.max_cells > 0 && refined.num_cells() > acfg.max_cells) {
        out.trace.stop = AmrStop::CellCap;
        done = true;
      } else {
        next = std::move(refined);
      }
    }
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.trace.rows.push_back(row);
    if (done) {
      out.mesh = mesh;
      out.state = std::move(se.state);
      out.estimators = std::move(se.estimators);
      out.field = std::move(se.field);
      return out;
    }
    if (acfg.warm_start) guess = inject_state(mesh, se.state, *next);
    mesh = std::move(*next);
  }
}

}  // namespace cartamr
