#include <gtest/gtest.h>

#include <cmath>

#include "cartamr/cartamr.hpp"

#include "support.hpp"

using namespace cartamr;

namespace {

NodalField affine_field(const CartesianMesh& mesh, double c0, const Point& slope) {
  NodalField f(mesh, 1, 1);
  for (std::size_t i = 0; i < f.num_nodes(); ++i) {
    const Point x = f.node_point(f.node_id(i));
    double v = c0;
    for (int a = 0; a < mesh.dim(); ++a) v += slope[a] * x[a];
    f.values(0)[i] = v;
  }
  return f;
}

Point reference_coords(const CartesianMesh& mesh, std::size_t k, const Point& x) {
  const CellId c = mesh.cell_id(k);
  Point xi{0.0, 0.0, 0.0};
  for (int a = 0; a < mesh.dim(); ++a)
    xi[a] = 2.0 * (x[a] - mesh.axis(a).center(c[a])) / mesh.axis(a).width(c[a]);
  return xi;
}

struct ManufacturedRun {
  double global = 0.0, max_eta = 0.0, error = 0.0;
};

ManufacturedRun manufactured(int n) {
  const double D = 0.8, r = 0.6;
  const auto p = build_manufactured_source(2, 1.0, D, r);
  const auto mesh = build_uniform({1.0, 1.0}, 1.0 / n);
  BlockOperators ops(mesh, p);
  SolverConfig cfg;
  cfg.outer_tol = 1e-11;
  const auto sol = MinosSolver(ops, cfg).solve_source(p.source).state;
  const auto field = reconstruct(Reconstruction::PostProcessing, ops, sol, p.boundary);
  const auto est = estimate(ops, sol, field, p.source);
  MixedField err;
  err.p = [&](std::size_t g, std::size_t k, const Point& x) {
    const Point gr = p.exact->grad(g, x);
    const Point ph = current_at(ops, sol.P[g], mesh.cell_id(k), k, reference_coords(mesh, k, x));
    return Point{-D * gr[0] - ph[0], -D * gr[1] - ph[1], 0.0};
  };
  err.phi = [&](std::size_t g, std::size_t k, const Point& x) {
    return p.exact->flux(g, x) - field.eval(g, mesh.cell_id(k), reference_coords(mesh, k, x));
  };
  err.div_p = [&](std::size_t g, std::size_t k, const Point& x) {
    return p.source(g, x) - r * p.exact->flux(g, x) - divergence(ops, sol.P[g], mesh.cell_id(k), k);
  };
  return {est.global, est.max_eta(), smg_norm(ops, err, 4)};
}

}  // namespace

TEST(ResidualEstimator, ConstantMismatchClosedForm) {
  auto p = testing_support::two_group_problem(2, 2.0, 1.0, BoundarySpec::all(BoundaryKind::Reflective));
  p.mode = ProblemMode::Source;
  p.source = [](std::size_t g, const Point&) { return g == 0 ? 1.0 : 0.25; };
  const auto mesh = build_uniform({0.0, 0.0}, {0.5, 0.25}, {0.5, 0.25});
  p.regions = RegionMap({{0.0, 0.5}, {0.0, 0.25}}, {0});
  BlockOperators ops(mesh, p);
  StateVector s = StateVector::zeros(ops.layout());
  s.phi = {{2.0}, {3.0}};
  const auto f = average_reconstruction(mesh, s.phi, p.boundary);
  const auto& co = ops.coeffs(0);
  double expected = 0.0;
  for (std::size_t g = 0; g < 2; ++g) {
    const double rg = p.source(g, {}) - co.removal[g][0] * 2.0 - co.removal[g][1] * 3.0;
    expected += rg * rg / co.delta[g];
  }
  expected = std::sqrt(mesh.cell_volume(0) * expected);
  EXPECT_NEAR(residual_estimator(ops, s, f, 0, p.source), expected, 1e-14);
}

TEST(ResidualEstimator, ZeroOnCompatibleData) {
  // T_e phi~ = S - div p_h with a constant phi~ and a uniform current.
  auto p = build_homogeneous_cube(1.0, 0.5, 0.4, 0.0, 2);
  p.boundary = BoundarySpec::all(BoundaryKind::Reflective);
  p.mode = ProblemMode::Source;
  BlockOperators ops(build_uniform({1.0, 1.0}, 1.0), p);
  StateVector s = StateVector::zeros(ops.layout());
  s.phi[0][0] = 5.0;
  const auto f = average_reconstruction(ops.mesh(), s.phi, p.boundary);
  const SourceField S = [](std::size_t, const Point&) { return 2.0; };
  EXPECT_NEAR(residual_estimator(ops, s, f, 0, S), 0.0, 1e-14);
}

TEST(ResidualEstimator, CriticalityPatchBothSourceModes) {
  auto p = build_homogeneous_cube(1.0, 0.5, 0.4, 0.5, 3);
  p.boundary = BoundarySpec::all(BoundaryKind::Reflective);
  BlockOperators ops(build_uniform({1, 1, 1}, 0.5), p);
  const auto r = MinosSolver(ops).solve_criticality();
  EXPECT_NEAR(r.state.k, 1.25, 1e-12);
  const auto f = reconstruct(Reconstruction::PostProcessing, ops, r.state, p.boundary);
  for (bool from_field : {true, false}) {
    EstimatorOptions opt;
    opt.fission_from_reconstruction = from_field;
    const auto e = estimate(ops, r.state, f, {}, opt);
    EXPECT_LT(e.global, 1e-12);
  }
}

TEST(FluxEstimator, LinearSlopeClosedForm) {
  const double D = 1.7, slope = 0.3;
  const auto p = build_homogeneous_cube(2.0, D, 0.4, 0.0, 2);
  const auto mesh = build_uniform({2.0, 2.0}, 1.0);
  BlockOperators ops(mesh, p);
  const StateVector s = StateVector::zeros(ops.layout());
  const auto f = affine_field(mesh, 0.0, {slope, 0.0, 0.0});
  for (std::size_t k = 0; k < mesh.num_cells(); ++k)
    EXPECT_NEAR(flux_estimator(ops, s, f, k), std::sqrt(D * slope * slope * mesh.cell_volume(k)), 1e-14);
}

TEST(FluxEstimator, InvariantUnderConstantShift) {
  const auto p = build_homogeneous_cube(2.0, 1.1, 0.4, 0.0, 2);
  const auto mesh = build_uniform({2.0, 2.0}, 0.5);
  BlockOperators ops(mesh, p);
  StateVector s = StateVector::zeros(ops.layout());
  for (std::size_t i = 0; i < s.P[0].size(); ++i) s.P[0][i] = std::sin(1.0 + i);
  for (std::size_t k = 0; k < s.phi[0].size(); ++k) s.phi[0][k] = 1.0 + 0.1 * k;
  auto f = average_plus_reconstruction(mesh, s.phi, BoundarySpec::all(BoundaryKind::Reflective));
  std::vector<double> before;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) before.push_back(flux_estimator(ops, s, f, k));
  for (double& v : f.values(0)) v += 4.0;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) EXPECT_NEAR(flux_estimator(ops, s, f, k), before[k], 1e-13);
}

TEST(Estimators, ZeroForAffineExactSolution) {
  // phi = 1 + 0.2 x - 0.1 y, p = -D grad phi constant, S = removal phi.
  const double D = 0.9, removal = 0.3;
  auto p = build_homogeneous_cube(2.0, D, removal, 0.0, 2);
  p.mode = ProblemMode::Source;
  const Point slope{0.2, -0.1, 0.0};
  p.source = [&](std::size_t, const Point& x) { return removal * (1.0 + slope[0] * x[0] + slope[1] * x[1]); };
  const auto mesh = refine_slabs(build_uniform({2.0, 2.0}, 0.5), {{0, 1}});
  BlockOperators ops(mesh, p);
  StateVector s = StateVector::zeros(ops.layout());
  for (int a = 0; a < 2; ++a)
    for (std::size_t lf = 0; lf < mesh.num_faces(a); ++lf) {
      const std::size_t f = mesh.face_offset(a) + lf;
      if (!ops.eliminated(f)) s.P[0][f] = -D * slope[a] * mesh.face_area(mesh.face_id(a, lf));
    }
  const auto field = affine_field(mesh, 1.0, slope);
  const auto e = estimate(ops, s, field, p.source);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    EXPECT_LT(e.eta_r[k], 1e-12);
    EXPECT_LT(e.eta_f[k], 1e-12);
  }
}

TEST(TotalIndicator, TwoCellEnumeration) {
  const auto mesh = build_uniform({2.0, 1.0}, 1.0);
  const double a = 0.3, b = 0.4;
  const auto e = total_indicator(mesh, {0.0, 0.0}, {a, b});
  EXPECT_DOUBLE_EQ(e.eta[0], std::sqrt(a * a + b * b));
  EXPECT_DOUBLE_EQ(e.eta[1], e.eta[0]);
  EXPECT_DOUBLE_EQ(e.global, std::sqrt(2.0 * (a * a + b * b)));
}

TEST(TotalIndicator, SingleCell) {
  const auto mesh = build_uniform({1.0, 1.0, 1.0}, 1.0);
  const auto e = total_indicator(mesh, {0.6}, {0.8});
  EXPECT_DOUBLE_EQ(e.eta[0], 1.0);
  EXPECT_EQ(total_indicator(mesh, {0.0}, {0.0}).global, 0.0);
}

TEST(TotalIndicator, CompositionMatchesNeighbourSum) {
  const auto mesh = refine_slabs(build_uniform({3.0, 2.0, 2.0}, 1.0), {{1, 0}});
  std::vector<double> er, ef;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    er.push_back(0.01 * k);
    ef.push_back(std::cos(0.3 * k) + 1.5);
  }
  const auto e = total_indicator(mesh, er, ef);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    double v = er[k] * er[k];
    for (std::size_t n : neighbors(mesh, mesh.cell_id(k))) v += ef[n] * ef[n];
    EXPECT_EQ(e.eta[k], std::sqrt(v));
  }
  EXPECT_THROW(total_indicator(mesh, {1.0}, ef), DimensionMismatch);
}

TEST(SmgNorm, Examples) {
  const auto p = build_homogeneous_cube(1.0, 1.0, 2.0, 0.0, 2);
  BlockOperators ops(build_uniform({1.0, 1.0}, 1.0), p);
  EXPECT_EQ(smg_norm(ops, MixedField{}), 0.0);
  MixedField one;
  one.phi = [](std::size_t, std::size_t, const Point&) { return 1.0; };
  EXPECT_NEAR(smg_norm(ops, one), std::sqrt(2.0), 1e-14);
  MixedField z;
  z.p = [](std::size_t, std::size_t, const Point& x) { return Point{x[0], 1.0 - x[1], 0.0}; };
  z.phi = [](std::size_t, std::size_t, const Point& x) { return x[0] * x[1]; };
  z.div_p = [](std::size_t, std::size_t, const Point&) { return 0.0; };
  MixedField z3;
  z3.p = [&](std::size_t g, std::size_t k, const Point& x) {
    Point v = z.p(g, k, x);
    return Point{-3 * v[0], -3 * v[1], 0.0};
  };
  z3.phi = [&](std::size_t g, std::size_t k, const Point& x) { return -3 * z.phi(g, k, x); };
  EXPECT_NEAR(smg_norm(ops, z3), 3.0 * smg_norm(ops, z), 1e-13);
}

TEST(Estimators, EffectivityStaysBracketed) {
  for (int n : {4, 8, 16}) {
    const auto r = manufactured(n);
    const double eff = r.global / r.error;
    EXPECT_GE(eff, 0.1) << n;
    EXPECT_LE(eff, 10.0) << n;
  }
}

TEST(Estimators, UniformRefinementDoesNotIncreaseMaximum) {
  double last = manufactured(4).max_eta;
  for (int n : {8, 16}) {
    const double m = manufactured(n).max_eta;
    EXPECT_LE(m, 1.05 * last) << n;
    last = m;
  }
}

TEST(NormalizeMeanFlux, UnitMean) {
  const auto p = testing_support::two_group_problem(2, 20.0, 12.0, BoundarySpec::all(BoundaryKind::ZeroFlux));
  BlockOperators ops(build_uniform({20.0, 20.0}, 4.0), p);
  auto s = MinosSolver(ops).solve_criticality().state;
  normalize_mean_flux(ops, s);
  double total = 0.0;
  for (const auto& v : s.phi)
    for (std::size_t k = 0; k < v.size(); ++k) total += v[k] * ops.volume(k);
  EXPECT_NEAR(total / ops.mesh().domain_volume(), 1.0, 1e-13);
}
