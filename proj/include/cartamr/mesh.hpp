#pragma once

// Tensor-product Cartesian meshes in 1, 2 or 3 dimensions.
//
// Coordinates are stored once per axis; a cell is identified by one interval
// index per axis.  Linear indices run with axis 0 fastest.  Faces normal to
// axis a are indexed by the same multi-index as cells except that the a-th
// entry ranges over the n_a + 1 grid planes.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"

namespace cartamr {

inline constexpr int kMaxDim = 3;

using Index3 = std::array<std::size_t, kMaxDim>;
using Point = std::array<double, kMaxDim>;

class AxisGrid {
 public:
  AxisGrid() : coords_{0.0, 1.0} {}

  explicit AxisGrid(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.size() < 2) throw InvalidArgument("AxisGrid needs at least 2 coordinates");
    for (std::size_t i = 1; i < coords_.size(); ++i) {
      if (!(coords_[i] > coords_[i - 1]))
        throw InvalidArgument("AxisGrid coordinates must be strictly increasing");
    }
  }

  std::size_t num_intervals() const { return coords_.size() - 1; }
  const std::vector<double>& coords() const { return coords_; }
  double coord(std::size_t i) const { return coords_[i]; }
  double lo() const { return coords_.front(); }
  double hi() const { return coords_.back(); }
  double width(std::size_t i) const { return coords_[i + 1] - coords_[i]; }
  double center(std::size_t i) const { return 0.5 * (coords_[i] + coords_[i + 1]); }

  /// Interval containing x (closed on the left); x == hi() maps to the last interval.
  std::size_t locate(double x) const {
    auto it = std::upper_bound(coords_.begin(), coords_.end(), x);
    if (it == coords_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - coords_.begin()) - 1;
    return std::min(i, num_intervals() - 1);
  }

  /// Index of an exact grid coordinate, or npos.
  std::size_t find_coord(double x) const {
    auto it = std::lower_bound(coords_.begin(), coords_.end(), x);
    if (it != coords_.end() && *it == x) return static_cast<std::size_t>(it - coords_.begin());
    return npos;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  friend bool operator==(const AxisGrid&, const AxisGrid&) = default;

 private:
  std::vector<double> coords_;
};

using CellId = Index3;

struct FaceId {
  int axis = 0;
  Index3 index{};  // index[axis] is the grid plane, 0..n_axis
  friend bool operator==(const FaceId&, const FaceId&) = default;
};

/// All cells whose extent along `axis` is the interval `interval`.
struct Slab {
  int axis = 0;
  std::size_t interval = 0;
  friend auto operator<=>(const Slab&, const Slab&) = default;
};

class CartesianMesh {
 public:
  CartesianMesh() : CartesianMesh(std::vector<AxisGrid>{AxisGrid{}}) {}

  explicit CartesianMesh(std::vector<AxisGrid> axes) {
    if (axes.empty() || axes.size() > static_cast<std::size_t>(kMaxDim))
      throw InvalidArgument("CartesianMesh dimension must be 1, 2 or 3");
    dim_ = static_cast<int>(axes.size());
    for (int a = 0; a < dim_; ++a) axes_[a] = std::move(axes[a]);
    n_.fill(1);
    for (int a = 0; a < dim_; ++a) n_[a] = axes_[a].num_intervals();
    cell_stride_[0] = 1;
    for (int a = 1; a < kMaxDim; ++a) cell_stride_[a] = cell_stride_[a - 1] * n_[a - 1];
    num_cells_ = n_[0] * n_[1] * n_[2];
    std::size_t offset = 0;
    for (int a = 0; a < kMaxDim; ++a) {
      face_offset_[a] = offset;
      if (a >= dim_) {
        num_faces_[a] = 0;
        face_stride_[a].fill(0);
        continue;
      }
      Index3 m = n_;
      m[a] += 1;
      face_stride_[a][0] = 1;
      for (int b = 1; b < kMaxDim; ++b) face_stride_[a][b] = face_stride_[a][b - 1] * m[b - 1];
      num_faces_[a] = m[0] * m[1] * m[2];
      offset += num_faces_[a];
    }
    num_faces_total_ = offset;
  }

  int dim() const { return dim_; }
  const AxisGrid& axis(int a) const { return axes_[a]; }
  std::size_t cells_along(int a) const { return n_[a]; }
  const Index3& shape() const { return n_; }
  std::size_t num_cells() const { return num_cells_; }

  std::size_t num_faces(int a) const { return num_faces_[a]; }
  std::size_t face_offset(int a) const { return face_offset_[a]; }
  std::size_t num_faces_total() const { return num_faces_total_; }

  std::size_t cell_index(const CellId& c) const {
    return c[0] * cell_stride_[0] + c[1] * cell_stride_[1] + c[2] * cell_stride_[2];
  }
  CellId cell_id(std::size_t k) const {
    CellId c{};
    for (int a = 0; a < kMaxDim; ++a) {
      c[a] = k % n_[a];
      k /= n_[a];
    }
    return c;
  }
  std::size_t cell_stride(int a) const { return cell_stride_[a]; }

  /// Index local to the faces of one axis (0 .. num_faces(a)-1).
  std::size_t face_index(int a, const Index3& j) const {
    return j[0] * face_stride_[a][0] + j[1] * face_stride_[a][1] + j[2] * face_stride_[a][2];
  }
  std::size_t face_index(const FaceId& f) const { return face_index(f.axis, f.index); }
  /// Index in the concatenated (axis-sorted) face numbering.
  std::size_t global_face_index(const FaceId& f) const { return face_offset_[f.axis] + face_index(f); }
  std::size_t face_stride(int a, int b) const { return face_stride_[a][b]; }

  FaceId face_id(int a, std::size_t local) const {
    FaceId f{a, {}};
    for (int b = 0; b < kMaxDim; ++b) {
      std::size_t m = (b == a) ? n_[b] + 1 : n_[b];
      if (b >= dim_) m = 1;
      f.index[b] = local % m;
      local /= m;
    }
    return f;
  }

  /// Low (side 0) or high (side 1) face of a cell along axis a, local numbering.
  std::size_t cell_face(const CellId& c, int a, int side) const {
    Index3 j = c;
    j[a] += static_cast<std::size_t>(side);
    return face_index(a, j);
  }

  bool is_boundary_face(const FaceId& f) const {
    return f.index[f.axis] == 0 || f.index[f.axis] == n_[f.axis];
  }

  double width(int a, std::size_t i) const { return axes_[a].width(i); }
  double cell_width(const CellId& c, int a) const { return a < dim_ ? axes_[a].width(c[a]) : 1.0; }
  double cell_volume(const CellId& c) const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= axes_[a].width(c[a]);
    return v;
  }
  double cell_volume(std::size_t k) const { return cell_volume(cell_id(k)); }
  Point cell_center(const CellId& c) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = axes_[a].center(c[a]);
    return p;
  }
  /// Area (length in 2-D, 1 in 1-D) of a face normal to axis a.
  double face_area(const FaceId& f) const {
    double s = 1.0;
    for (int b = 0; b < dim_; ++b)
      if (b != f.axis) s *= axes_[b].width(f.index[b]);
    return s;
  }
  double cell_diameter(const CellId& c) const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += axes_[a].width(c[a]) * axes_[a].width(c[a]);
    return std::sqrt(s);
  }
  double domain_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= axes_[a].hi() - axes_[a].lo();
    return v;
  }
  double max_diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double w = 0.0;
      for (std::size_t i = 0; i < n_[a]; ++i) w = std::max(w, axes_[a].width(i));
      s += w * w;
    }
    return std::sqrt(s);
  }

  friend bool operator==(const CartesianMesh& x, const CartesianMesh& y) {
    if (x.dim_ != y.dim_) return false;
    for (int a = 0; a < x.dim_; ++a)
      if (!(x.axes_[a] == y.axes_[a])) return false;
    return true;
  }

 private:
  int dim_ = 1;
  std::array<AxisGrid, kMaxDim> axes_{};
  Index3 n_{};
  Index3 cell_stride_{};
  std::array<Index3, kMaxDim> face_stride_{};
  Index3 num_faces_{};
  Index3 face_offset_{};
  std::size_t num_cells_ = 0;
  std::size_t num_faces_total_ = 0;
};

/// Uniform mesh of the box [lo, hi] with the given step per axis.
inline CartesianMesh build_uniform(const std::vector<double>& lo, const std::vector<double>& hi,
                                   const std::vector<double>& step) {
  if (lo.size() != hi.size() || lo.size() != step.size() || lo.empty() || lo.size() > 3)
    throw InvalidArgument("build_uniform: inconsistent box dimensions");
  std::vector<AxisGrid> axes;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    const double extent = hi[a] - lo[a];
    if (!(extent > 0.0) || !(step[a] > 0.0))
      throw InvalidArgument("build_uniform: extents and steps must be positive");
    const double ratio = extent / step[a];
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, n))
      throw NonDivisibleExtent("build_uniform: extent " + std::to_string(extent) +
                               " is not a multiple of step " + std::to_string(step[a]));
    const auto count = static_cast<std::size_t>(n);
    std::vector<double> c(count + 1);
    for (std::size_t i = 0; i <= count; ++i) c[i] = lo[a] + extent * static_cast<double>(i) / n;
    c.back() = hi[a];
    axes.emplace_back(std::move(c));
  }
  return CartesianMesh(std::move(axes));
}

inline CartesianMesh build_uniform(const std::vector<double>& extent, double step) {
  std::vector<double> lo(extent.size(), 0.0), st(extent.size(), step);
  return build_uniform(lo, extent, st);
}

/// Bisect every selected interval at its midpoint.  Existing coordinates are
/// copied bit for bit, so the result is nested in the input.
inline CartesianMesh refine_slabs(const CartesianMesh& mesh, const std::set<Slab>& slabs) {
  for (const Slab& s : slabs)
    if (s.axis < 0 || s.axis >= mesh.dim() || s.interval >= mesh.cells_along(s.axis))
      throw InvalidArgument("refine_slabs: slab out of range");
  std::vector<AxisGrid> axes;
  for (int a = 0; a < mesh.dim(); ++a) {
    const auto& old = mesh.axis(a).coords();
    std::vector<bool> split(old.size() - 1, false);
    for (const Slab& s : slabs)
      if (s.axis == a) split[s.interval] = true;
    std::vector<double> c;
    c.reserve(old.size() * 2);
    for (std::size_t i = 0; i + 1 < old.size(); ++i) {
      c.push_back(old[i]);
      if (split[i]) c.push_back(0.5 * (old[i] + old[i + 1]));
    }
    c.push_back(old.back());
    axes.emplace_back(std::move(c));
  }
  return CartesianMesh(std::move(axes));
}

/// K together with every cell sharing a (d-1)-dimensional facet with K,
/// sorted by linear index.
inline std::vector<std::size_t> neighbors(const CartesianMesh& mesh, const CellId& c) {
  std::vector<std::size_t> out{mesh.cell_index(c)};
  for (int a = 0; a < mesh.dim(); ++a) {
    if (c[a] > 0) {
      CellId m = c;
      m[a] -= 1;
      out.push_back(mesh.cell_index(m));
    }
    if (c[a] + 1 < mesh.cells_along(a)) {
      CellId p = c;
      p[a] += 1;
      out.push_back(mesh.cell_index(p));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cartamr
