#pragma once

// Lowest-order Raviart-Thomas mixed discretization on Cartesian cells.
//
// Per group, the unknowns are one normal flux per face (integrated over the
// face, oriented along +e_a, faces concatenated axis by axis) followed by one
// flux value per cell.  The block operators are never assembled globally:
// every entry is a closed form of the cell geometry and the cell material,
// evaluated on demand.
//
// With A_K = h_a^2 / (D |K|) along axis a, the local current mass matrix of
// cell K on its two a-faces is A_K [[1/3, 1/6], [1/6, 1/3]].  B couples a face
// to the cell below it with +1 and to the cell above it with -1, so (B^T P)_K
// is the net outflow of K.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/geometry.hpp"
#include "cartamr/materials.hpp"
#include "cartamr/mesh.hpp"
#include "cartamr/quadrature.hpp"

namespace cartamr {

struct DofLayout {
  std::size_t groups = 0;
  std::size_t faces = 0;  // current dofs per group
  std::size_t cells = 0;  // flux dofs per group

  std::size_t block() const { return faces + cells; }
  std::size_t size() const { return groups * block(); }
  std::size_t current(std::size_t g, std::size_t f) const { return g * block() + f; }
  std::size_t flux(std::size_t g, std::size_t k) const { return g * block() + faces + k; }
  friend bool operator==(const DofLayout&, const DofLayout&) = default;
};

/// Discrete solution: per group currents P[g] and cell fluxes phi[g].
struct StateVector {
  std::vector<std::vector<double>> P;
  std::vector<std::vector<double>> phi;
  double k = 1.0;

  static StateVector zeros(const DofLayout& l) {
    StateVector s;
    s.P.assign(l.groups, std::vector<double>(l.faces, 0.0));
    s.phi.assign(l.groups, std::vector<double>(l.cells, 0.0));
    return s;
  }

  std::vector<double> flatten() const {
    std::vector<double> z;
    for (std::size_t g = 0; g < P.size(); ++g) {
      z.insert(z.end(), P[g].begin(), P[g].end());
      z.insert(z.end(), phi[g].begin(), phi[g].end());
    }
    return z;
  }

  static StateVector unflatten(const DofLayout& l, std::span<const double> z) {
    if (z.size() != l.size()) throw DimensionMismatch("StateVector: size does not match layout");
    StateVector s = zeros(l);
    for (std::size_t g = 0; g < l.groups; ++g) {
      std::copy_n(z.begin() + static_cast<long>(l.current(g, 0)), l.faces, s.P[g].begin());
      std::copy_n(z.begin() + static_cast<long>(l.flux(g, 0)), l.cells, s.phi[g].begin());
    }
    return s;
  }

  bool matches(const DofLayout& l) const {
    if (P.size() != l.groups || phi.size() != l.groups) return false;
    for (std::size_t g = 0; g < l.groups; ++g)
      if (P[g].size() != l.faces || phi[g].size() != l.cells) return false;
    return true;
  }
};

enum class FaceKind : std::uint8_t { Interior, ZeroFlux, Reflective, Vacuum };

class BlockOperators {
 public:
  BlockOperators(CartesianMesh mesh, const ProblemDefinition& problem) : mesh_(std::move(mesh)) {
    if (problem.dim() != mesh_.dim()) throw DimensionMismatch("mesh and problem dimensions differ");
    problem.boundary.validate();
    const std::size_t G = problem.groups();
    layout_ = {G, mesh_.num_faces_total(), mesh_.num_cells()};
    const auto mats = cell_materials(problem.regions, mesh_);
    material_.assign(mats.begin(), mats.end());
    for (const auto& m : problem.materials.materials()) coeffs_.push_back(derive_coefficients(m));

    face_kind_.assign(layout_.faces, FaceKind::Interior);
    robin_.assign(layout_.faces, 0.0);
    for (int a = 0; a < mesh_.dim(); ++a) {
      for (std::size_t lf = 0; lf < mesh_.num_faces(a); ++lf) {
        const FaceId f = mesh_.face_id(a, lf);
        if (!mesh_.is_boundary_face(f)) continue;
        const int side = f.index[a] == 0 ? 0 : 1;
        const auto& bc = problem.boundary.at(a, side);
        const std::size_t gf = mesh_.face_offset(a) + lf;
        switch (bc.kind) {
          case BoundaryKind::ZeroFlux: face_kind_[gf] = FaceKind::ZeroFlux; break;
          case BoundaryKind::Reflective: face_kind_[gf] = FaceKind::Reflective; break;
          case BoundaryKind::Vacuum:
            face_kind_[gf] = FaceKind::Vacuum;
            robin_[gf] = 1.0 / (bc.mu * mesh_.face_area(f));
            break;
        }
      }
    }

    volume_.resize(layout_.cells);
    for (std::size_t k = 0; k < layout_.cells; ++k) volume_[k] = mesh_.cell_volume(k);
  }

  const CartesianMesh& mesh() const { return mesh_; }
  const DofLayout& layout() const { return layout_; }
  std::size_t groups() const { return layout_.groups; }
  std::size_t material(std::size_t cell) const { return material_[cell]; }
  const GroupCoefficients& coeffs(std::size_t cell) const { return coeffs_[material_[cell]]; }
  double volume(std::size_t cell) const { return volume_[cell]; }

  FaceKind face_kind(std::size_t global_face) const { return face_kind_[global_face]; }
  bool eliminated(std::size_t global_face) const { return face_kind_[global_face] == FaceKind::Reflective; }
  double robin(std::size_t global_face) const { return robin_[global_face]; }

  /// A_K = h_a^2 / (D_g |K|) for cell K along axis a.
  double a_coef(std::size_t g, std::size_t cell, int a, const CellId& c) const {
    const double h = mesh_.cell_width(c, a);
    return h * h / (coeffs(cell).D[g] * volume_[cell]);
  }
  double t_entry(std::size_t g, std::size_t gp, std::size_t cell) const {
    return coeffs(cell).removal[g][gp] * volume_[cell];
  }
  double f_entry(std::size_t g, std::size_t gp, std::size_t cell) const {
    return coeffs(cell).fission[g][gp] * volume_[cell];
  }

  /// (B^T P)_K, reflective faces counted as zero.
  double net_outflow(std::span<const double> P, const CellId& c) const {
    double s = 0.0;
    for (int a = 0; a < mesh_.dim(); ++a) {
      const std::size_t lo = mesh_.face_offset(a) + mesh_.cell_face(c, a, 0);
      const std::size_t hi = mesh_.face_offset(a) + mesh_.cell_face(c, a, 1);
      s += current_value(P, hi) - current_value(P, lo);
    }
    return s;
  }

  double current_value(std::span<const double> P, std::size_t global_face) const {
    return eliminated(global_face) ? 0.0 : P[global_face];
  }

  /// y = M Z.  Per group the diagonal block is [[-A, B], [B^T, T]] and the
  /// off-diagonal blocks carry T^{g,g'} only.  Reflective dofs carry an
  /// identity row with -1 on the diagonal.
  void apply_M(std::span<const double> z, std::span<double> y) const {
    check_sizes(z, y);
    std::fill(y.begin(), y.end(), 0.0);
    const std::size_t G = groups();
    for (std::size_t g = 0; g < G; ++g) {
      auto P = z.subspan(layout_.current(g, 0), layout_.faces);
      auto yP = y.subspan(layout_.current(g, 0), layout_.faces);
      auto yF = y.subspan(layout_.flux(g, 0), layout_.cells);
      for (std::size_t k = 0; k < layout_.cells; ++k) {
        const CellId c = mesh_.cell_id(k);
        const double phik = z[layout_.flux(g, k)];
        for (int a = 0; a < mesh_.dim(); ++a) {
          const std::size_t lo = mesh_.face_offset(a) + mesh_.cell_face(c, a, 0);
          const std::size_t hi = mesh_.face_offset(a) + mesh_.cell_face(c, a, 1);
          const double A = a_coef(g, k, a, c);
          const double plo = current_value(P, lo), phi_ = current_value(P, hi);
          yP[lo] += -(A / 3.0 * plo + A / 6.0 * phi_) - phik;
          yP[hi] += -(A / 6.0 * plo + A / 3.0 * phi_) + phik;
        }
        double t = 0.0;
        for (std::size_t gp = 0; gp < G; ++gp) t += t_entry(g, gp, k) * z[layout_.flux(gp, k)];
        yF[k] = net_outflow(P, c) + t;
      }
      for (std::size_t f = 0; f < layout_.faces; ++f) {
        if (eliminated(f)) yP[f] = -P[f];
        else yP[f] -= robin_[f] * P[f];
      }
    }
  }

  /// y = F Z (nonzero only in the flux blocks).
  void apply_F(std::span<const double> z, std::span<double> y) const {
    check_sizes(z, y);
    std::fill(y.begin(), y.end(), 0.0);
    const std::size_t G = groups();
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t k = 0; k < layout_.cells; ++k) {
        double s = 0.0;
        for (std::size_t gp = 0; gp < G; ++gp) s += f_entry(g, gp, k) * z[layout_.flux(gp, k)];
        y[layout_.flux(g, k)] = s;
      }
  }

  /// Fission source (F Z) restricted to the flux blocks, one entry per
  /// (group, cell), group-major.
  std::vector<double> fission_source(const StateVector& s) const {
    const std::size_t G = groups(), N = layout_.cells;
    std::vector<double> out(G * N, 0.0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t k = 0; k < N; ++k) {
        double v = 0.0;
        for (std::size_t gp = 0; gp < G; ++gp) v += f_entry(g, gp, k) * s.phi[gp][k];
        out[g * N + k] = v;
      }
    return out;
  }

  /// Source moments int_K S_f(g, x) dx, group-major.
  std::vector<double> source_moments(const SourceField& S, int quad_points = 4) const {
    if (!S) throw InvalidArgument("source_moments: no source field");
    const GaussRule rule(quad_points);
    const std::size_t G = groups(), N = layout_.cells;
    std::vector<double> out(G * N);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t k = 0; k < N; ++k)
        out[g * N + k] = integrate_cell(mesh_, mesh_.cell_id(k), rule, [&](const Point& x) { return S(g, x); });
    return out;
  }

 private:
  void check_sizes(std::span<const double> z, std::span<double> y) const {
    if (z.size() != layout_.size() || y.size() != layout_.size())
      throw DimensionMismatch("BlockOperators: vector size does not match layout");
  }

  CartesianMesh mesh_;
  DofLayout layout_;
  std::vector<std::uint32_t> material_;
  std::vector<GroupCoefficients> coeffs_;
  std::vector<FaceKind> face_kind_;
  std::vector<double> robin_;
  std::vector<double> volume_;
};

}  // namespace cartamr
