#pragma once

// Dense reference assembly for small meshes.  Basis functions are written
// out explicitly and every entry is integrated by quadrature, so the result
// shares no closed form with the library's matrix-free operators.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "cartamr/cartamr.hpp"

namespace testing_support {

using namespace cartamr;

inline std::string data_path(const std::string& rel) { return std::string(CARTAMR_DATA_DIR) + "/" + rel; }

/// Value of the a-component of the RT0 basis of the (side) face of cell c
/// at physical coordinate x_a, for integrated-flux normalisation.
inline double rt0_component(const CartesianMesh& mesh, const CellId& c, int a, int side, double xa) {
  const double lo = mesh.axis(a).coord(c[a]), hi = mesh.axis(a).coord(c[a] + 1);
  const double h = hi - lo;
  const double area = mesh.cell_volume(c) / h;
  return (side == 1 ? (xa - lo) : (hi - xa)) / (h * area);
}

struct DenseSystem {
  Eigen::MatrixXd M;
  Eigen::MatrixXd F;
};

inline DenseSystem dense_system(const CartesianMesh& mesh, const ProblemDefinition& problem) {
  const std::size_t G = problem.groups();
  const DofLayout l{G, mesh.num_faces_total(), mesh.num_cells()};
  const auto mats = cell_materials(problem.regions, mesh);
  std::vector<GroupCoefficients> co;
  for (const auto& m : problem.materials.materials()) co.push_back(derive_coefficients(m));
  DenseSystem s{Eigen::MatrixXd::Zero(static_cast<long>(l.size()), static_cast<long>(l.size())),
                Eigen::MatrixXd::Zero(static_cast<long>(l.size()), static_cast<long>(l.size()))};
  const GaussRule rule(3);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t k = 0; k < l.cells; ++k) {
      const CellId c = mesh.cell_id(k);
      const auto& cc = co[mats[k]];
      for (int a = 0; a < mesh.dim(); ++a) {
        std::size_t f[2] = {mesh.face_offset(a) + mesh.cell_face(c, a, 0), mesh.face_offset(a) + mesh.cell_face(c, a, 1)};
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const double m = integrate_cell(mesh, c, rule, [&](const Point& x) {
              return rt0_component(mesh, c, a, i, x[a]) * rt0_component(mesh, c, a, j, x[a]) / cc.D[g];
            });
            s.M(static_cast<long>(l.current(g, f[i])), static_cast<long>(l.current(g, f[j]))) -= m;
          }
        for (int i = 0; i < 2; ++i) {
          // integral of the divergence: derivative of the basis component
          const double h = mesh.cell_width(c, a);
          const double div = integrate_cell(mesh, c, rule, [&](const Point& x) {
            return (rt0_component(mesh, c, a, i, x[a] + 0.5 * h) - rt0_component(mesh, c, a, i, x[a] - 0.5 * h)) / h;
          });
          s.M(static_cast<long>(l.current(g, f[i])), static_cast<long>(l.flux(g, k))) += div;
          s.M(static_cast<long>(l.flux(g, k)), static_cast<long>(l.current(g, f[i]))) += div;
        }
      }
      for (std::size_t gp = 0; gp < G; ++gp) {
        const double vol = integrate_cell(mesh, c, rule, [](const Point&) { return 1.0; });
        s.M(static_cast<long>(l.flux(g, k)), static_cast<long>(l.flux(gp, k))) += cc.removal[g][gp] * vol;
        s.F(static_cast<long>(l.flux(g, k)), static_cast<long>(l.flux(gp, k))) += cc.fission[g][gp] * vol;
      }
    }
    for (int a = 0; a < mesh.dim(); ++a)
      for (std::size_t lf = 0; lf < mesh.num_faces(a); ++lf) {
        const FaceId fid = mesh.face_id(a, lf);
        if (!mesh.is_boundary_face(fid)) continue;
        const auto& bc = problem.boundary.at(a, fid.index[a] == 0 ? 0 : 1);
        const long row = static_cast<long>(l.current(g, mesh.face_offset(a) + lf));
        if (bc.kind == BoundaryKind::Vacuum) {
          const double area = mesh.face_area(fid);
          s.M(row, row) -= (1.0 / bc.mu) * area * (1.0 / area) * (1.0 / area);
        } else if (bc.kind == BoundaryKind::Reflective) {
          s.M.row(row).setZero();
          s.M.col(row).setZero();
          s.M(row, row) = -1.0;
        }
      }
  }
  return s;
}

/// Fundamental eigenpair of M Z = (1/k) F Z by dense eigen-decomposition.
inline double dense_keff(const DenseSystem& s) {
  const Eigen::MatrixXd A = s.M.fullPivLu().solve(s.F);
  const Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  double best = 0.0;
  for (long i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()[i].imag()) < 1e-12) best = std::max(best, es.eigenvalues()[i].real());
  return best;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

/// Two-group material with downscattering only.
inline MaterialData two_group_fuel(const std::string& name = "fuel", double upscatter = 0.0) {
  MaterialData m;
  m.name = name;
  m.sigma_t = {0.25, 0.6};
  m.nu_sigma_f = {0.008, 0.2};
  m.chi = {1.0, 0.0};
  m.scatter = {{0.21, 0.02}, {upscatter, 0.5}};
  return m;
}

inline MaterialData two_group_reflector(const std::string& name = "reflector") {
  MaterialData m;
  m.name = name;
  m.sigma_t = {0.25, 0.8};
  m.nu_sigma_f = {0.0, 0.0};
  m.chi = {0.0, 0.0};
  m.scatter = {{0.22, 0.025}, {0.0, 0.78}};
  return m;
}

/// Two-group fuel/reflector problem on a box, split along axis 0 at `split`.
inline ProblemDefinition two_group_problem(int d, double L, double split, BoundarySpec bc,
                                           double upscatter = 0.0) {
  ProblemDefinition p;
  p.name = "two-group";
  p.mode = ProblemMode::Criticality;
  p.materials = MaterialSet(EnergyGroupSet{2, {}}, {two_group_fuel("fuel", upscatter), two_group_reflector()});
  std::vector<std::vector<double>> bp(static_cast<std::size_t>(d), {0.0, L});
  bp[0] = {0.0, split, L};
  p.regions = RegionMap(bp, {0, 1});
  p.boundary = bc;
  return p;
}

}  // namespace testing_support
