#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cartamr/cartamr.hpp"

#include "support.hpp"

using namespace cartamr;

namespace {

std::vector<std::vector<double>> random_phi(std::size_t groups, std::size_t cells, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  std::vector<std::vector<double>> phi(groups, std::vector<double>(cells));
  for (auto& v : phi)
    for (double& x : v) x = u(rng);
  return phi;
}

StateVector random_state(const DofLayout& l, unsigned seed) {
  StateVector s = StateVector::zeros(l);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : s.P)
    for (double& x : v) x = u(rng);
  for (auto& v : s.phi)
    for (double& x : v) x = u(rng) + 2.0;
  return s;
}

bool on_boundary(const NodalField& f, const Index3& m) {
  for (int a = 0; a < f.mesh().dim(); ++a)
    if (m[a] == 0 || m[a] + 1 == f.nodes_along(a)) return true;
  return false;
}

/// Both cells sharing each interior x-face evaluate to the same value at the
/// face nodes.
void expect_continuous(const NodalField& f) {
  const auto& mesh = f.mesh();
  for (int a = 0; a < mesh.dim(); ++a)
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
      const CellId c = mesh.cell_id(k);
      if (c[a] + 1 == mesh.cells_along(a)) continue;
      CellId n = c;
      ++n[a];
      for (double t : {-1.0, -0.3, 0.6}) {
        Point xl{t, t, t}, xr{t, t, t};
        xl[a] = 1.0;
        xr[a] = -1.0;
        for (int b = mesh.dim(); b < kMaxDim; ++b) xl[b] = xr[b] = 0.0;
        EXPECT_NEAR(f.eval(0, c, xl), f.eval(0, n, xr), 1e-13);
      }
    }
}

}  // namespace

TEST(Average, OneDimensionalSharedNode) {
  const auto mesh = build_uniform({2.0}, 1.0);
  const auto f = average_reconstruction(mesh, {{1.0, 3.0}}, BoundarySpec::all(BoundaryKind::ZeroFlux));
  EXPECT_EQ(f.values(0), (std::vector<double>{0.0, 2.0, 0.0}));
}

TEST(Average, CornerOfFourCells) {
  const auto mesh = build_uniform({2.0, 2.0}, 1.0);
  const auto f = average_reconstruction(mesh, {{1.0, 2.0, 3.0, 4.0}}, BoundarySpec::all(BoundaryKind::ZeroFlux));
  EXPECT_DOUBLE_EQ(f.values(0)[f.node_index({1, 1, 0})], 2.5);
}

TEST(Average, ReflectiveBoundaryKeepsValues) {
  const auto mesh = build_uniform({2.0}, 1.0);
  const auto f = average_reconstruction(mesh, {{1.0, 3.0}}, BoundarySpec::all(BoundaryKind::Reflective));
  EXPECT_EQ(f.values(0), (std::vector<double>{1.0, 2.0, 3.0}));
}

TEST(AveragePlus, Examples) {
  const auto mesh = build_uniform({2.0, 1.0}, 1.0);
  const auto f = average_plus_reconstruction(mesh, {{1.0, 3.0}}, BoundarySpec::all(BoundaryKind::ZeroFlux));
  EXPECT_EQ(f.num_nodes(), 5u * 3u);
  EXPECT_DOUBLE_EQ(f.values(0)[f.node_index({1, 1, 0})], 1.0);
  EXPECT_DOUBLE_EQ(f.values(0)[f.node_index({3, 1, 0})], 3.0);
  EXPECT_DOUBLE_EQ(f.values(0)[f.node_index({2, 1, 0})], 2.0);
  EXPECT_EQ(f.values(0)[f.node_index({2, 0, 0})], 0.0);
}

TEST(Reconstructions, PreserveConstants) {
  auto p = build_homogeneous_cube(3.0, 1.0, 0.3, 0.0, 3);
  p.boundary = BoundarySpec::all(BoundaryKind::Reflective);
  BlockOperators ops(build_uniform({3, 3, 3}, 0.5), p);
  StateVector s = StateVector::zeros(ops.layout());
  for (double& v : s.phi[0]) v = 1.7;
  for (auto kind : {Reconstruction::Average, Reconstruction::AveragePlus, Reconstruction::PostProcessing}) {
    const auto f = reconstruct(kind, ops, s, p.boundary);
    for (double v : f.values(0)) EXPECT_NEAR(v, 1.7, 1e-14);
  }
}

TEST(Reconstructions, AveragesVanishOnZeroFluxBoundary) {
  const auto p = build_homogeneous_cube(3.0, 1.0, 0.3, 0.0, 3);
  BlockOperators ops(build_uniform({3, 3, 3}, 0.5), p);
  StateVector s = StateVector::zeros(ops.layout());
  for (double& v : s.phi[0]) v = 1.7;
  for (auto kind : {Reconstruction::Average, Reconstruction::AveragePlus}) {
    const auto f = reconstruct(kind, ops, s, p.boundary);
    for (std::size_t i = 0; i < f.num_nodes(); ++i)
      EXPECT_NEAR(f.values(0)[i], on_boundary(f, f.node_id(i)) ? 0.0 : 1.7, 1e-14);
  }
}

TEST(Reconstructions, ContinuousAcrossFacets) {
  const auto p = build_homogeneous_cube(3.0, 1.0, 0.3, 0.0, 3);
  const auto mesh = refine_slabs(build_uniform({3, 3, 3}, 1.0), {{0, 1}, {2, 0}});
  BlockOperators ops(mesh, p);
  const auto s = random_state(ops.layout(), 5);
  for (auto kind : {Reconstruction::Average, Reconstruction::AveragePlus, Reconstruction::PostProcessing})
    expect_continuous(reconstruct(kind, ops, s, BoundarySpec::all(BoundaryKind::Reflective)));
}

TEST(OneSided, AgreeWhenMomentumRowHolds) {
  // 1-D heterogeneous source problem: the line solve is exact, so each
  // interior facet sees the same value from both cells.
  auto p = testing_support::two_group_problem(1, 20.0, 7.0, BoundarySpec::all(BoundaryKind::ZeroFlux));
  p.mode = ProblemMode::Source;
  p.source = [](std::size_t g, const Point& x) { return g == 0 ? 1.0 + 0.1 * x[0] : 0.0; };
  const auto mesh = build_uniform({20.0}, 1.0);
  BlockOperators ops(mesh, p);
  const auto r = MinosSolver(ops).solve_source(p.source);
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t k = 0; k + 1 < mesh.num_cells(); ++k) {
      const CellId c = mesh.cell_id(k), n = mesh.cell_id(k + 1);
      auto side = [&](const CellId& cc, std::size_t kk) {
        return one_sided_multipliers(r.state.phi[g][kk], ops.a_coef(g, kk, 0, cc),
                                     ops.current_value(r.state.P[g], mesh.cell_face(cc, 0, 0)),
                                     ops.current_value(r.state.P[g], mesh.cell_face(cc, 0, 1)));
      };
      const double left = side(c, k).high, right = side(n, k + 1).low;
      EXPECT_NEAR(left, right, 1e-12 * std::max(1.0, std::abs(left)));
    }
}

TEST(Multipliers, ReflectivePatchGivesCellValue) {
  auto p = build_manufactured_source(2, 1.0, 0.6, 0.5);
  p.boundary = BoundarySpec::all(BoundaryKind::Reflective);
  p.source = [](std::size_t, const Point&) { return 1.5; };
  BlockOperators ops(build_uniform({1, 1}, 0.25), p);
  SolverConfig cfg;
  cfg.outer_tol = 1e-13;
  const auto r = MinosSolver(ops, cfg).solve_source(p.source);
  const auto lam = recover_multipliers(ops, r.state);
  for (double v : lam.lambda[0]) EXPECT_NEAR(v, 3.0, 1e-12);
  const auto f = rtn_postprocess(ops, r.state, p.boundary);
  for (double v : f.values(0)) EXPECT_NEAR(v, 3.0, 1e-12);
}

TEST(Multipliers, ZeroFluxFacesAreZero) {
  const auto p = build_homogeneous_cube(2.0, 1.0, 0.3, 0.0, 2);
  BlockOperators ops(build_uniform({2, 2}, 0.5), p);
  const auto lam = recover_multipliers(ops, random_state(ops.layout(), 2));
  for (std::size_t f = 0; f < ops.layout().faces; ++f) {
    if (ops.face_kind(f) == FaceKind::ZeroFlux) {
      EXPECT_EQ(lam.lambda[0][f], 0.0);
    }
  }
}

TEST(Multipliers, ConvergeToTraceInOneDimension) {
  const auto p = build_manufactured_source(1, 1.0, 1.0, 1.0);
  std::vector<double> err;
  for (int n : {8, 16, 32, 64}) {
    const auto mesh = build_uniform({1.0}, 1.0 / n);
    BlockOperators ops(mesh, p);
    const auto r = MinosSolver(ops).solve_source(p.source);
    const auto lam = recover_multipliers(ops, r.state);
    double e = 0.0;
    for (std::size_t f = 0; f < mesh.num_faces(0); ++f)
      e = std::max(e, std::abs(lam.lambda[0][f] - p.exact->flux(0, {mesh.axis(0).coord(f), 0, 0})));
    err.push_back(e);
  }
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 0.9);
}

TEST(ProjectMh, LocalSpaceDimension) {
  EXPECT_EQ(PostProcessedField(build_uniform({1, 1}, 1.0), 2).local_dim(), 5u);
  EXPECT_EQ(PostProcessedField(build_uniform({1, 1, 1}, 1.0), 2).local_dim(), 7u);
}

TEST(ProjectMh, FacetMeansMatchMultipliers) {
  const auto p = build_homogeneous_cube(3.0, 1.0, 0.3, 0.0, 3);
  const auto mesh = refine_slabs(build_uniform({3, 3, 3}, 1.0), {{1, 2}});
  BlockOperators ops(mesh, p);
  const auto s = random_state(ops.layout(), 11);
  const auto lam = recover_multipliers(ops, s);
  const auto pp = project_Mh(ops, s, lam);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const CellId c = mesh.cell_id(k);
    EXPECT_NEAR(pp.cell_mean(0, k), s.phi[0][k], 1e-13);
    for (int a = 0; a < 3; ++a)
      for (int side = 0; side < 2; ++side)
        EXPECT_NEAR(pp.facet_mean(0, k, a, side), lam.lambda[0][mesh.face_offset(a) + mesh.cell_face(c, a, side)],
                    1e-12);
  }
}

TEST(ProjectMh, ReproducesLocalQuadratic) {
  // phi = 0.4 + 0.3 X - 0.7 X^2 + 1.1 Y + 0.2 Y^2 on one cell.
  const auto p = build_homogeneous_cube(2.0, 1.0, 0.3, 0.0, 2);
  const auto mesh = build_uniform({2.0, 2.0}, 2.0);
  BlockOperators ops(mesh, p);
  const double c0 = 0.4, cx = 0.3, cxx = -0.7, cy = 1.1, cyy = 0.2;
  StateVector s = StateVector::zeros(ops.layout());
  s.phi[0][0] = c0 + (cxx + cyy) / 3.0;
  Multiplier lam;
  lam.lambda.assign(1, std::vector<double>(ops.layout().faces));
  lam.lambda[0][mesh.face_offset(0) + 0] = c0 - cx + cxx + cyy / 3.0;
  lam.lambda[0][mesh.face_offset(0) + 1] = c0 + cx + cxx + cyy / 3.0;
  lam.lambda[0][mesh.face_offset(1) + 0] = c0 - cy + cyy + cxx / 3.0;
  lam.lambda[0][mesh.face_offset(1) + 1] = c0 + cy + cyy + cxx / 3.0;
  const auto pp = project_Mh(ops, s, lam);
  const double* co = pp.cell(0, 0);
  EXPECT_NEAR(co[0], c0, 1e-15);
  EXPECT_NEAR(co[1], cx, 1e-15);
  EXPECT_NEAR(co[2], cxx, 1e-15);
  EXPECT_NEAR(co[3], cy, 1e-15);
  EXPECT_NEAR(co[4], cyy, 1e-15);
}

TEST(PostProcessing, ReducesToAveragePlusForCellConstants) {
  const auto mesh = refine_slabs(build_uniform({2, 3}, 1.0), {{0, 0}});
  const auto phi = random_phi(2, mesh.num_cells(), 4);
  PostProcessedField pp(mesh, 2);
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t k = 0; k < mesh.num_cells(); ++k) pp.cell(g, k)[0] = phi[g][k];
  BoundarySpec bc = BoundarySpec::all(BoundaryKind::ZeroFlux);
  bc.at(0, 0) = {BoundaryKind::Reflective, 0.5};
  const auto a = rtn_postprocess(pp, bc);
  const auto b = average_plus_reconstruction(mesh, phi, bc);
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t i = 0; i < a.num_nodes(); ++i) EXPECT_NEAR(a.values(g)[i], b.values(g)[i], 1e-15);
}

TEST(PostProcessing, MoreAccurateThanAverage) {
  for (int d : {1, 2}) {
    const auto p = build_manufactured_source(d, 1.0, 1.0, 1.0);
    std::vector<double> step(static_cast<std::size_t>(d), 1.0 / 16);
    BlockOperators ops(build_uniform(std::vector<double>(static_cast<std::size_t>(d), 1.0), 1.0 / 16), p);
    SolverConfig cfg;
    cfg.outer_tol = 1e-10;
    const auto r = MinosSolver(ops, cfg).solve_source(p.source);
    const double e_av = l2_error_nodal(ops, reconstruct(Reconstruction::Average, ops, r.state, p.boundary),
                                       p.exact->flux);
    const double e_pp = l2_error_nodal(ops, reconstruct(Reconstruction::PostProcessing, ops, r.state, p.boundary),
                                       p.exact->flux);
    EXPECT_LT(e_pp, e_av) << "d = " << d;
  }
}

TEST(NodalField, RejectsUnsupportedOrder) {
  EXPECT_THROW(NodalField(build_uniform({1.0}, 1.0), 3, 1), InvalidArgument);
}
