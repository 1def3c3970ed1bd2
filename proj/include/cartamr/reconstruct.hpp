#pragma once

// Continuous flux reconstructions from the discrete pair (p_h, phi_h):
// nodal averaging of order 1 and 2, and the hybrid post-processing through
// the facet multipliers.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/mesh.hpp"

namespace cartamr {

enum class Reconstruction { Average, AveragePlus, PostProcessing };

namespace detail {

/// Equispaced Lagrange basis of order q (1 or 2) on [-1, 1] and its derivative.
inline double lagrange(int q, int j, double t) {
  if (q == 1) return j == 0 ? 0.5 * (1.0 - t) : 0.5 * (1.0 + t);
  switch (j) {
    case 0: return 0.5 * t * (t - 1.0);
    case 1: return 1.0 - t * t;
    default: return 0.5 * t * (t + 1.0);
  }
}

inline double lagrange_deriv(int q, int j, double t) {
  if (q == 1) return j == 0 ? -0.5 : 0.5;
  switch (j) {
    case 0: return t - 0.5;
    case 1: return -2.0 * t;
    default: return t + 0.5;
  }
}

}  // namespace detail

/// Continuous tensor Q_q field (q = 1 or 2) per group, stored at the global
/// Lagrange nodes: q n_a + 1 nodes along axis a, axis 0 fastest.
class NodalField {
 public:
  NodalField() = default;
  NodalField(CartesianMesh mesh, int order, std::size_t groups) : mesh_(std::move(mesh)), q_(order) {
    if (order != 1 && order != 2) throw InvalidArgument("NodalField: order must be 1 or 2");
    for (int a = 0; a < kMaxDim; ++a) nodes_[a] = a < mesh_.dim() ? q_ * mesh_.cells_along(a) + 1 : 1;
    values_.assign(groups, std::vector<double>(num_nodes(), 0.0));
  }

  const CartesianMesh& mesh() const { return mesh_; }
  int order() const { return q_; }
  std::size_t groups() const { return values_.size(); }
  std::size_t nodes_along(int a) const { return nodes_[a]; }
  std::size_t num_nodes() const { return nodes_[0] * nodes_[1] * nodes_[2]; }
  std::size_t node_index(const Index3& m) const { return m[0] + nodes_[0] * (m[1] + nodes_[1] * m[2]); }
  Index3 node_id(std::size_t i) const {
    Index3 m{};
    for (int a = 0; a < kMaxDim; ++a) {
      m[a] = i % nodes_[a];
      i /= nodes_[a];
    }
    return m;
  }

  /// Physical coordinate of node index m along axis a.
  double node_coord(int a, std::size_t m) const {
    const auto& ax = mesh_.axis(a);
    const std::size_t i = m / q_, r = m % q_;
    if (r == 0) return ax.coord(i);
    return ax.center(i);
  }
  Point node_point(const Index3& m) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < mesh_.dim(); ++a) p[a] = node_coord(a, m[a]);
    return p;
  }

  std::vector<double>& values(std::size_t g) { return values_[g]; }
  const std::vector<double>& values(std::size_t g) const { return values_[g]; }

  /// Global node index of local node j (per axis 0..q) of cell c.
  std::size_t cell_node(const CellId& c, const std::array<int, kMaxDim>& j) const {
    Index3 m{0, 0, 0};
    for (int a = 0; a < mesh_.dim(); ++a) m[a] = q_ * c[a] + static_cast<std::size_t>(j[a]);
    return node_index(m);
  }

  /// Value in cell c at reference coordinates xi in [-1, 1]^d.
  double eval(std::size_t g, const CellId& c, const Point& xi) const {
    double s = 0.0;
    for_each_local_node([&](const std::array<int, kMaxDim>& j) {
      double w = 1.0;
      for (int a = 0; a < mesh_.dim(); ++a) w *= detail::lagrange(q_, j[a], xi[a]);
      s += w * values_[g][cell_node(c, j)];
    });
    return s;
  }

  /// Physical gradient in cell c at reference coordinates xi.
  Point grad(std::size_t g, const CellId& c, const Point& xi) const {
    Point gr{0.0, 0.0, 0.0};
    const int d = mesh_.dim();
    for_each_local_node([&](const std::array<int, kMaxDim>& j) {
      const double v = values_[g][cell_node(c, j)];
      for (int a = 0; a < d; ++a) {
        double w = 2.0 / mesh_.cell_width(c, a) * detail::lagrange_deriv(q_, j[a], xi[a]);
        for (int b = 0; b < d; ++b)
          if (b != a) w *= detail::lagrange(q_, j[b], xi[b]);
        gr[a] += w * v;
      }
    });
    return gr;
  }

  /// Value at a physical point (the containing cell is located per axis).
  double eval_at(std::size_t g, const Point& x) const {
    CellId c{0, 0, 0};
    Point xi{0.0, 0.0, 0.0};
    for (int a = 0; a < mesh_.dim(); ++a) {
      c[a] = mesh_.axis(a).locate(x[a]);
      xi[a] = 2.0 * (x[a] - mesh_.axis(a).center(c[a])) / mesh_.axis(a).width(c[a]);
    }
    return eval(g, c, xi);
  }

  template <class F>
  void for_each_local_node(F&& f) const {
    const int d = mesh_.dim();
    std::array<int, kMaxDim> n{1, 1, 1};
    for (int a = 0; a < d; ++a) n[a] = q_ + 1;
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) f(std::array<int, kMaxDim>{i, j, k});
  }

  /// True if node m lies on a domain face whose kind is ZeroFlux.
  bool on_zero_flux_boundary(const Index3& m, const BoundarySpec& bc) const {
    for (int a = 0; a < mesh_.dim(); ++a) {
      if (m[a] == 0 && bc.at(a, 0).kind == BoundaryKind::ZeroFlux) return true;
      if (m[a] + 1 == nodes_[a] && bc.at(a, 1).kind == BoundaryKind::ZeroFlux) return true;
    }
    return false;
  }

  /// Cells adjacent to node m, in increasing linear order.
  std::vector<std::size_t> adjacent_cells(const Index3& m) const {
    std::array<std::array<std::size_t, 2>, kMaxDim> range{};
    std::array<int, kMaxDim> count{1, 1, 1};
    for (int a = 0; a < kMaxDim; ++a) range[a] = {0, 0};
    for (int a = 0; a < mesh_.dim(); ++a) {
      const std::size_t n = mesh_.cells_along(a);
      const std::size_t i = m[a] / q_;
      if (m[a] % q_ != 0) {
        range[a] = {i, i};
        count[a] = 1;
      } else if (i == 0) {
        range[a] = {0, 0};
        count[a] = 1;
      } else if (i == n) {
        range[a] = {n - 1, n - 1};
        count[a] = 1;
      } else {
        range[a] = {i - 1, i};
        count[a] = 2;
      }
    }
    std::vector<std::size_t> out;
    for (int k = 0; k < count[2]; ++k)
      for (int j = 0; j < count[1]; ++j)
        for (int i = 0; i < count[0]; ++i)
          out.push_back(mesh_.cell_index({range[0][i], range[1][j], range[2][k]}));
    return out;
  }

  /// Local per-axis position (0..q) of node m inside cell c.
  std::array<int, kMaxDim> local_position(const Index3& m, const CellId& c) const {
    std::array<int, kMaxDim> j{0, 0, 0};
    for (int a = 0; a < mesh_.dim(); ++a) j[a] = static_cast<int>(m[a] - q_ * c[a]);
    return j;
  }

 private:
  CartesianMesh mesh_;
  int q_ = 1;
  Index3 nodes_{1, 1, 1};
  std::vector<std::vector<double>> values_;
};

namespace detail {

inline NodalField nodal_average(const CartesianMesh& mesh, const std::vector<std::vector<double>>& phi, int q,
                                const BoundarySpec& bc) {
  NodalField out(mesh, q, phi.size());
  for (std::size_t i = 0; i < out.num_nodes(); ++i) {
    const Index3 m = out.node_id(i);
    if (out.on_zero_flux_boundary(m, bc)) continue;
    const auto cells = out.adjacent_cells(m);
    for (std::size_t g = 0; g < phi.size(); ++g) {
      double s = 0.0;
      for (std::size_t k : cells) s += phi[g][k];
      out.values(g)[i] = s / static_cast<double>(cells.size());
    }
  }
  return out;
}

}  // namespace detail

/// Q_1 field: each vertex takes the mean of the adjacent cell values.
inline NodalField average_reconstruction(const CartesianMesh& mesh, const std::vector<std::vector<double>>& phi,
                                         const BoundarySpec& bc) {
  return detail::nodal_average(mesh, phi, 1, bc);
}

/// Q_2 field built the same way on the order-2 node set.
inline NodalField average_plus_reconstruction(const CartesianMesh& mesh,
                                              const std::vector<std::vector<double>>& phi,
                                              const BoundarySpec& bc) {
  return detail::nodal_average(mesh, phi, 2, bc);
}

/// Facet multipliers per group, indexed by global face.
struct Multiplier {
  std::vector<std::vector<double>> lambda;
};

/// One-sided traces of cell K on its two faces along axis a.
struct OneSided {
  double low = 0.0;
  double high = 0.0;
};

inline OneSided one_sided_multipliers(double phi, double A, double p_low, double p_high) {
  return {phi + A * (p_low / 3.0 + p_high / 6.0), phi - A * (p_low / 6.0 + p_high / 3.0)};
}

/// Multipliers from the cell-local momentum equations: interior facets take
/// the mean of both one-sided values, ZeroFlux facets 0, other boundary
/// facets the one-sided value.
inline Multiplier recover_multipliers(const BlockOperators& ops, const StateVector& s) {
  const auto& mesh = ops.mesh();
  const auto& l = ops.layout();
  if (!s.matches(l)) throw DimensionMismatch("recover_multipliers: layout mismatch");
  Multiplier m;
  m.lambda.assign(l.groups, std::vector<double>(l.faces, 0.0));
  for (std::size_t g = 0; g < l.groups; ++g) {
    auto& lam = m.lambda[g];
    for (std::size_t k = 0; k < l.cells; ++k) {
      const CellId c = mesh.cell_id(k);
      for (int a = 0; a < mesh.dim(); ++a) {
        const std::size_t lo = mesh.face_offset(a) + mesh.cell_face(c, a, 0);
        const std::size_t hi = mesh.face_offset(a) + mesh.cell_face(c, a, 1);
        const auto t = one_sided_multipliers(s.phi[g][k], ops.a_coef(g, k, a, c), ops.current_value(s.P[g], lo),
                                             ops.current_value(s.P[g], hi));
        lam[lo] += t.low;
        lam[hi] += t.high;
      }
    }
    for (std::size_t f = 0; f < l.faces; ++f) {
      switch (ops.face_kind(f)) {
        case FaceKind::Interior: lam[f] *= 0.5; break;
        case FaceKind::ZeroFlux: lam[f] = 0.0; break;
        default: break;
      }
    }
  }
  return m;
}

/// Per-cell coefficients of the local space spanned by 1, X_a, X_a^2 in the
/// scaled coordinates X_a = (x_a - c_a) / (h_a / 2).  Layout per cell:
/// [c0, c_1, c_11, c_2, c_22, c_3, c_33] truncated to 1 + 2d entries.
class PostProcessedField {
 public:
  PostProcessedField() = default;
  PostProcessedField(CartesianMesh mesh, std::size_t groups) : mesh_(std::move(mesh)) {
    stride_ = 1 + 2 * static_cast<std::size_t>(mesh_.dim());
    coef_.assign(groups, std::vector<double>(stride_ * mesh_.num_cells(), 0.0));
  }

  const CartesianMesh& mesh() const { return mesh_; }
  std::size_t groups() const { return coef_.size(); }
  std::size_t local_dim() const { return stride_; }
  double* cell(std::size_t g, std::size_t k) { return coef_[g].data() + stride_ * k; }
  const double* cell(std::size_t g, std::size_t k) const { return coef_[g].data() + stride_ * k; }

  double eval(std::size_t g, std::size_t k, const Point& xi) const {
    const double* c = cell(g, k);
    double v = c[0];
    for (int a = 0; a < mesh_.dim(); ++a) v += c[1 + 2 * a] * xi[a] + c[2 + 2 * a] * xi[a] * xi[a];
    return v;
  }

  /// Mean over the facet of cell k at X_a = -1 (side 0) or +1 (side 1).
  double facet_mean(std::size_t g, std::size_t k, int a, int side) const {
    const double* c = cell(g, k);
    double v = c[0] + (side == 0 ? -c[1 + 2 * a] : c[1 + 2 * a]) + c[2 + 2 * a];
    for (int b = 0; b < mesh_.dim(); ++b)
      if (b != a) v += c[2 + 2 * b] / 3.0;
    return v;
  }

  double cell_mean(std::size_t g, std::size_t k) const {
    const double* c = cell(g, k);
    double v = c[0];
    for (int a = 0; a < mesh_.dim(); ++a) v += c[2 + 2 * a] / 3.0;
    return v;
  }

 private:
  CartesianMesh mesh_;
  std::size_t stride_ = 1;
  std::vector<std::vector<double>> coef_;
};

/// Local projection: cell mean equal to phi_h (the T_e-weighted moment row
/// reduces to this because T_e is invertible) and facet means equal to the
/// multipliers.  The system is solved in closed form.
inline PostProcessedField project_Mh(const BlockOperators& ops, const StateVector& s, const Multiplier& lam) {
  const auto& mesh = ops.mesh();
  const auto& l = ops.layout();
  PostProcessedField out(mesh, l.groups);
  for (std::size_t g = 0; g < l.groups; ++g)
    for (std::size_t k = 0; k < l.cells; ++k) {
      const CellId c = mesh.cell_id(k);
      const double m = s.phi[g][k];
      double* co = out.cell(g, k);
      double sum_sq = 0.0;
      for (int a = 0; a < mesh.dim(); ++a) {
        const double lm = lam.lambda[g][mesh.face_offset(a) + mesh.cell_face(c, a, 0)];
        const double lp = lam.lambda[g][mesh.face_offset(a) + mesh.cell_face(c, a, 1)];
        co[1 + 2 * a] = 0.5 * (lp - lm);
        co[2 + 2 * a] = 1.5 * (0.5 * (lp + lm) - m);
        sum_sq += co[2 + 2 * a];
      }
      co[0] = m - sum_sq / 3.0;
    }
  return out;
}

/// Q_2 nodal field averaging the post-processed cell polynomials.
inline NodalField rtn_postprocess(const PostProcessedField& pp, const BoundarySpec& bc) {
  const auto& mesh = pp.mesh();
  NodalField out(mesh, 2, pp.groups());
  for (std::size_t i = 0; i < out.num_nodes(); ++i) {
    const Index3 m = out.node_id(i);
    if (out.on_zero_flux_boundary(m, bc)) continue;
    const auto cells = out.adjacent_cells(m);
    for (std::size_t g = 0; g < pp.groups(); ++g) {
      double s = 0.0;
      for (std::size_t k : cells) {
        const CellId c = mesh.cell_id(k);
        const auto j = out.local_position(m, c);
        Point xi{0.0, 0.0, 0.0};
        for (int a = 0; a < mesh.dim(); ++a) xi[a] = static_cast<double>(j[a]) - 1.0;
        s += pp.eval(g, k, xi);
      }
      out.values(g)[i] = s / static_cast<double>(cells.size());
    }
  }
  return out;
}

inline NodalField rtn_postprocess(const BlockOperators& ops, const StateVector& s, const BoundarySpec& bc) {
  return rtn_postprocess(project_Mh(ops, s, recover_multipliers(ops, s)), bc);
}

inline NodalField reconstruct(Reconstruction kind, const BlockOperators& ops, const StateVector& s,
                              const BoundarySpec& bc) {
  switch (kind) {
    case Reconstruction::Average: return average_reconstruction(ops.mesh(), s.phi, bc);
    case Reconstruction::AveragePlus: return average_plus_reconstruction(ops.mesh(), s.phi, bc);
    case Reconstruction::PostProcessing: return rtn_postprocess(ops, s, bc);
  }
  throw InvalidArgument("unknown reconstruction");
}

}  // namespace cartamr
