#pragma once

// Region maps, boundary conditions and problem definitions.

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"
#include "cartamr/materials.hpp"
#include "cartamr/mesh.hpp"

namespace cartamr {

/// Lattice of material indices over a tensor grid of region boxes.  The
/// lattice is stored with axis 0 fastest (files list it axial-layer major,
/// i.e. lattice[z][y][x]).
class RegionMap {
 public:
  RegionMap() = default;
  RegionMap(std::vector<std::vector<double>> breakpoints, std::vector<std::size_t> lattice)
      : breakpoints_(std::move(breakpoints)), lattice_(std::move(lattice)) {
    if (breakpoints_.empty() || breakpoints_.size() > 3) throw InvalidArgument("RegionMap: dimension must be 1..3");
    std::size_t count = 1;
    for (const auto& b : breakpoints_) {
      AxisGrid check(b);  // strictly increasing, >= 2 entries
      count *= b.size() - 1;
    }
    if (lattice_.size() != count) throw InvalidArgument("RegionMap: lattice shape does not match breakpoints");
  }

  int dim() const { return static_cast<int>(breakpoints_.size()); }
  const std::vector<double>& breakpoints(int a) const { return breakpoints_[a]; }
  std::size_t regions_along(int a) const { return a < dim() ? breakpoints_[a].size() - 1 : 1; }
  const std::vector<std::size_t>& lattice() const { return lattice_; }

  std::size_t region_index(const Index3& r) const {
    return r[0] + regions_along(0) * (r[1] + regions_along(1) * r[2]);
  }
  std::size_t material_at(const Index3& r) const { return lattice_[region_index(r)]; }

  /// Material index of the region box containing p.
  std::size_t material_at_point(const Point& p) const {
    Index3 r{0, 0, 0};
    for (int a = 0; a < dim(); ++a) r[a] = AxisGrid(breakpoints_[a]).locate(p[a]);
    return material_at(r);
  }

  /// Initial mesh of the map's bounding box with the given step per axis.
  CartesianMesh uniform_mesh(const std::vector<double>& step) const {
    std::vector<double> lo, hi;
    for (const auto& b : breakpoints_) {
      lo.push_back(b.front());
      hi.push_back(b.back());
    }
    return build_uniform(lo, hi, step);
  }

  /// The map reflected about its lower boundary along `axis`, doubling the
  /// domain (used to unfold symmetric sectors into full cores).
  RegionMap mirrored(int axis) const {
    auto bp = breakpoints_;
    const auto& old = breakpoints_[axis];
    const double c = old.front();
    std::vector<double> nb;
    for (std::size_t i = old.size(); i-- > 1;) nb.push_back(2.0 * c - old[i]);
    nb.insert(nb.end(), old.begin(), old.end());
    bp[axis] = nb;
    const std::size_t n_old = old.size() - 1;
    Index3 shape{regions_along(0), regions_along(1), regions_along(2)};
    Index3 new_shape = shape;
    new_shape[axis] = 2 * n_old;
    std::vector<std::size_t> lat(new_shape[0] * new_shape[1] * new_shape[2]);
    for (std::size_t k = 0; k < new_shape[2]; ++k)
      for (std::size_t j = 0; j < new_shape[1]; ++j)
        for (std::size_t i = 0; i < new_shape[0]; ++i) {
          Index3 r{i, j, k};
          Index3 src = r;
          src[axis] = r[axis] < n_old ? n_old - 1 - r[axis] : r[axis] - n_old;
          lat[i + new_shape[0] * (j + new_shape[1] * k)] = material_at(src);
        }
    return RegionMap(std::move(bp), std::move(lat));
  }

 private:
  std::vector<std::vector<double>> breakpoints_;
  std::vector<std::size_t> lattice_;
};

/// Throws AlignmentError unless every region breakpoint is a mesh coordinate.
inline void check_alignment(const RegionMap& map, const CartesianMesh& mesh) {
  if (map.dim() != mesh.dim()) throw AlignmentError("region map and mesh dimensions differ");
  for (int a = 0; a < mesh.dim(); ++a) {
    for (double b : map.breakpoints(a)) {
      const auto& ax = mesh.axis(a);
      bool found = ax.find_coord(b) != AxisGrid::npos;
      if (!found) {
        // tolerate representation noise from uniform mesh construction
        const double tol = 1e-9 * std::max(1.0, std::abs(b));
        std::size_t i = ax.locate(b);
        found = std::abs(ax.coord(i) - b) <= tol || std::abs(ax.coord(i + 1) - b) <= tol;
      }
      if (!found)
        throw AlignmentError("region breakpoint " + std::to_string(b) + " on axis " + std::to_string(a) +
                             " is not a mesh coordinate");
    }
  }
}

inline std::size_t material_of_cell(const RegionMap& map, const CartesianMesh& mesh, const CellId& c) {
  check_alignment(map, mesh);
  return map.material_at_point(mesh.cell_center(c));
}

/// Material index of every cell, by linear cell index.
inline std::vector<std::size_t> cell_materials(const RegionMap& map, const CartesianMesh& mesh) {
  check_alignment(map, mesh);
  std::array<std::vector<std::size_t>, kMaxDim> region_of{};
  for (int a = 0; a < kMaxDim; ++a) {
    region_of[a].assign(mesh.cells_along(a), 0);
    if (a >= mesh.dim()) continue;
    AxisGrid g(map.breakpoints(a));
    for (std::size_t i = 0; i < mesh.cells_along(a); ++i) region_of[a][i] = g.locate(mesh.axis(a).center(i));
  }
  std::vector<std::size_t> out(mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    CellId c = mesh.cell_id(k);
    out[k] = map.material_at({region_of[0][c[0]], region_of[1][c[1]], region_of[2][c[2]]});
  }
  return out;
}

enum class BoundaryKind { ZeroFlux, Reflective, Vacuum };

struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::ZeroFlux;
  double mu = 0.5;  // Fourier coefficient, used for Vacuum only
};

/// One condition per domain face, indexed 2*axis + side (side 0 = low).
struct BoundarySpec {
  std::array<BoundaryCondition, 2 * kMaxDim> faces{};

  static BoundarySpec all(BoundaryKind k, double mu = 0.5) {
    BoundarySpec b;
    for (auto& f : b.faces) f = {k, mu};
    return b;
  }
  const BoundaryCondition& at(int axis, int side) const { return faces[2 * axis + side]; }
  BoundaryCondition& at(int axis, int side) { return faces[2 * axis + side]; }

  void validate() const {
    for (const auto& f : faces)
      if (f.kind == BoundaryKind::Vacuum && !(f.mu > 0.0)) throw InvalidArgument("vacuum boundary needs mu > 0");
  }
};

enum class ProblemMode { Criticality, Source };

/// Source density S_f(group, x) in 1/(cm^3 s).
using SourceField = std::function<double(std::size_t, const Point&)>;

/// Optional closed-form solution, for verification problems.
struct ExactSolution {
  std::function<double(std::size_t, const Point&)> flux;
  std::function<Point(std::size_t, const Point&)> grad;
  std::optional<double> keff;
};

struct ProblemDefinition {
  std::string name;
  ProblemMode mode = ProblemMode::Criticality;
  MaterialSet materials;
  RegionMap regions;
  BoundarySpec boundary;
  SourceField source;                 // required in Source mode
  std::vector<double> initial_step;   // optional default mesh step per axis
  std::optional<ExactSolution> exact;

  int dim() const { return regions.dim(); }
  std::size_t groups() const { return materials.groups(); }

  void validate() const {
    boundary.validate();
    for (std::size_t m : regions.lattice())
      if (m >= materials.size()) throw InvalidArgument("region map names an unknown material");
    if (mode == ProblemMode::Source && !source) throw InvalidArgument("source problem without a source field");
    if (mode == ProblemMode::Criticality) {
      bool fissile = false;
      for (std::size_t m : regions.lattice()) fissile = fissile || materials[m].fissile();
      if (!fissile) throw InvalidArgument("criticality problem without any fissile region");
    }
  }

  CartesianMesh initial_mesh() const {
    if (initial_step.empty()) throw InvalidArgument("problem defines no initial mesh step");
    return regions.uniform_mesh(initial_step);
  }
};

/// One-group material with explicit D, removal and production cross sections.
inline MaterialData one_group_material(std::string name, double D, double removal, double nu_sigma_f) {
  MaterialData m;
  m.name = std::move(name);
  m.sigma_t = {removal};
  m.nu_sigma_f = {nu_sigma_f};
  m.chi = {nu_sigma_f > 0.0 ? 1.0 : 0.0};
  m.scatter = {{0.0}};
  m.diffusion = std::vector<double>{D};
  return m;
}

/// Bare homogeneous cube [0,L]^d, zero flux on every face, criticality mode.
/// Exact k = nu_sigma_f / (removal + d D (pi/L)^2).
inline ProblemDefinition build_homogeneous_cube(double L, double D, double removal, double nu_sigma_f, int d = 3) {
  if (!(L > 0.0)) throw InvalidArgument("cube side must be positive");
  ProblemDefinition p;
  p.name = "homogeneous-cube";
  p.mode = ProblemMode::Criticality;
  p.materials = MaterialSet(EnergyGroupSet{1, {}}, {one_group_material("fuel", D, removal, nu_sigma_f)});
  p.regions = RegionMap(std::vector<std::vector<double>>(static_cast<std::size_t>(d), {0.0, L}), {0});
  p.boundary = BoundarySpec::all(BoundaryKind::ZeroFlux);
  const double b2 = d * (std::numbers::pi / L) * (std::numbers::pi / L);
  ExactSolution ex;
  ex.keff = nu_sigma_f / (removal + D * b2);
  ex.flux = [L, d](std::size_t, const Point& x) {
    double v = 1.0;
    for (int a = 0; a < d; ++a) v *= std::sin(std::numbers::pi * x[a] / L);
    return v;
  };
  p.exact = ex;
  return p;
}

/// Source problem on [0,L]^d whose exact solution is prod_x sin(pi x / L).
inline ProblemDefinition build_manufactured_source(int d, double L, double D, double removal) {
  if (d < 1 || d > 3 || !(L > 0.0) || !(D > 0.0) || !(removal > 0.0))
    throw InvalidArgument("build_manufactured_source: invalid parameters");
  ProblemDefinition p;
  p.name = "manufactured-sine";
  p.mode = ProblemMode::Source;
  p.materials = MaterialSet(EnergyGroupSet{1, {}}, {one_group_material("medium", D, removal, 0.0)});
  p.regions = RegionMap(std::vector<std::vector<double>>(static_cast<std::size_t>(d), {0.0, L}), {0});
  p.boundary = BoundarySpec::all(BoundaryKind::ZeroFlux);
  const double w = std::numbers::pi / L;
  auto phi = [d, w](std::size_t, const Point& x) {
    double v = 1.0;
    for (int a = 0; a < d; ++a) v *= std::sin(w * x[a]);
    return v;
  };
  const double amp = D * d * w * w + removal;
  p.source = [phi, amp](std::size_t g, const Point& x) { return amp * phi(g, x); };
  ExactSolution ex;
  ex.flux = phi;
  ex.grad = [d, w](std::size_t, const Point& x) {
    Point gr{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      double v = w * std::cos(w * x[a]);
      for (int b = 0; b < d; ++b)
        if (b != a) v *= std::sin(w * x[b]);
      gr[a] = v;
    }
    return gr;
  };
  p.exact = ex;
  return p;
}

// ---------------------------------------------------------------------------
// Files
//
// Region map:
//   { "breakpoints": { "x": [...], "y": [...], "z": [...] },
//     "lattice": [ [ ["core", ...], ... ], ... ] }        lattice[z][y][x]
//
// Problem:
//   { "name": "...", "mode": "criticality" | "source",
//     "materials": "relative/path.json", "regions": "relative/path.json",
//     "boundary": { "x_min": "reflective", "x_max": "zero_flux",
//                   "z_max": { "type": "vacuum", "mu": 0.5 }, ... },
//     "mesh_step": 5.0 | [5.0, 5.0, 5.0],
//     "source": { "<material>": [..G..] } }                source mode only

inline RegionMap parse_region_map(const std::string& text, const MaterialSet& materials,
                                  const std::string& source = "<regions>") {
  using detail::line_of_key;
  const auto doc = detail::parse_json_text(text, source);
  if (!doc.is_object() || !doc.contains("breakpoints") || !doc["breakpoints"].is_object())
    throw ParseError(source, 1, "breakpoints", "missing 'breakpoints' object");
  static const char* names[] = {"x", "y", "z"};
  std::vector<std::vector<double>> bp;
  for (int a = 0; a < 3; ++a) {
    if (!doc["breakpoints"].contains(names[a])) break;
    const auto& arr = doc["breakpoints"][names[a]];
    if (!arr.is_array()) throw ParseError(source, line_of_key(text, "breakpoints", names[a]),
                                          std::string("breakpoints.") + names[a], "expected an array");
    bp.push_back(detail::read_vector(arr, arr.size(), text, source, "breakpoints", names[a],
                                     std::string("breakpoints.") + names[a]));
    try {
      AxisGrid check(bp.back());
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_of_key(text, "breakpoints", names[a]),
                       std::string("breakpoints.") + names[a], e.what());
    }
  }
  if (bp.empty()) throw ParseError(source, line_of_key(text, "", "breakpoints"), "breakpoints", "no axes given");
  const int d = static_cast<int>(bp.size());
  if (!doc.contains("lattice")) throw ParseError(source, 0, "lattice", "missing 'lattice'");
  Index3 shape{1, 1, 1};
  for (int a = 0; a < d; ++a) shape[a] = bp[a].size() - 1;
  std::vector<std::size_t> lat(shape[0] * shape[1] * shape[2]);
  const std::size_t lattice_line = line_of_key(text, "", "lattice");
  auto cell = [&](const nlohmann::ordered_json& j, Index3 r, const std::string& field) {
    if (!j.is_string()) throw ParseError(source, lattice_line, field, "expected a material name");
    auto idx = materials.find(j.get<std::string>());
    if (!idx) throw ParseError(source, lattice_line, field, "unknown material '" + j.get<std::string>() + "'");
    lat[r[0] + shape[0] * (r[1] + shape[1] * r[2])] = *idx;
  };
  auto expect_array = [&](const nlohmann::ordered_json& j, std::size_t n, const std::string& field) {
    if (!j.is_array() || j.size() != n)
      throw ParseError(source, lattice_line, field, "expected an array of " + std::to_string(n) + " entries");
  };
  const auto& L = doc["lattice"];
  if (d == 1) {
    expect_array(L, shape[0], "lattice");
    for (std::size_t i = 0; i < shape[0]; ++i) cell(L[i], {i, 0, 0}, "lattice[" + std::to_string(i) + "]");
  } else if (d == 2) {
    expect_array(L, shape[1], "lattice");
    for (std::size_t j = 0; j < shape[1]; ++j) {
      const std::string fj = "lattice[" + std::to_string(j) + "]";
      expect_array(L[j], shape[0], fj);
      for (std::size_t i = 0; i < shape[0]; ++i) cell(L[j][i], {i, j, 0}, fj + "[" + std::to_string(i) + "]");
    }
  } else {
    expect_array(L, shape[2], "lattice");
    for (std::size_t k = 0; k < shape[2]; ++k) {
      const std::string fk = "lattice[" + std::to_string(k) + "]";
      expect_array(L[k], shape[1], fk);
      for (std::size_t j = 0; j < shape[1]; ++j) {
        const std::string fj = fk + "[" + std::to_string(j) + "]";
        expect_array(L[k][j], shape[0], fj);
        for (std::size_t i = 0; i < shape[0]; ++i) cell(L[k][j][i], {i, j, k}, fj + "[" + std::to_string(i) + "]");
      }
    }
  }
  return RegionMap(std::move(bp), std::move(lat));
}

inline RegionMap load_region_map(const std::string& path, const MaterialSet& materials) {
  return parse_region_map(detail::read_text_file(path), materials, path);
}

inline BoundaryCondition parse_boundary_condition(const nlohmann::ordered_json& j, const std::string& source,
                                                  const std::string& field) {
  auto kind_of = [&](const std::string& s) {
    if (s == "zero_flux") return BoundaryKind::ZeroFlux;
    if (s == "reflective") return BoundaryKind::Reflective;
    if (s == "vacuum") return BoundaryKind::Vacuum;
    throw ParseError(source, 0, field, "unknown boundary type '" + s + "'");
  };
  if (j.is_string()) return {kind_of(j.get<std::string>()), 0.5};
  if (j.is_object() && j.contains("type") && j["type"].is_string()) {
    BoundaryCondition bc{kind_of(j["type"].get<std::string>()), 0.5};
    if (j.contains("mu")) {
      if (!j["mu"].is_number()) throw ParseError(source, 0, field + ".mu", "expected a number");
      bc.mu = j["mu"].get<double>();
    }
    return bc;
  }
  throw ParseError(source, 0, field, "expected a boundary type string or object");
}

inline ProblemDefinition load_problem(const std::string& path) {
  namespace fs = std::filesystem;
  const std::string text = detail::read_text_file(path);
  const auto doc = detail::parse_json_text(text, path);
  if (!doc.is_object()) throw ParseError(path, 1, "", "top level must be an object");
  const fs::path dir = fs::path(path).parent_path();
  auto rel = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_string())
      throw ParseError(path, detail::line_of_key(text, "", key), key, "missing file reference");
    return (dir / doc[key].get<std::string>()).string();
  };
  ProblemDefinition p;
  p.name = doc.value("name", fs::path(path).stem().string());
  const std::string mode = doc.value("mode", "criticality");
  if (mode == "criticality") {
    p.mode = ProblemMode::Criticality;
  } else if (mode == "source") {
    p.mode = ProblemMode::Source;
  } else {
    throw ParseError(path, detail::line_of_key(text, "", "mode"), "mode", "unknown mode '" + mode + "'");
  }
  p.materials = load_material_library(rel("materials"));
  p.regions = load_region_map(rel("regions"), p.materials);
  static const char* face_names[] = {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};
  p.boundary = BoundarySpec::all(BoundaryKind::ZeroFlux);
  if (doc.contains("boundary")) {
    const auto& b = doc["boundary"];
    for (int f = 0; f < 2 * p.regions.dim(); ++f)
      if (b.contains(face_names[f]))
        p.boundary.faces[f] = parse_boundary_condition(b[face_names[f]], path, std::string("boundary.") + face_names[f]);
  }
  if (doc.contains("mesh_step")) {
    const auto& s = doc["mesh_step"];
    if (s.is_number()) {
      p.initial_step.assign(static_cast<std::size_t>(p.regions.dim()), s.get<double>());
    } else {
      p.initial_step = detail::read_vector(s, static_cast<std::size_t>(p.regions.dim()), text, path, "",
                                           "mesh_step", "mesh_step");
    }
  }
  if (p.mode == ProblemMode::Source) {
    if (!doc.contains("source") || !doc["source"].is_object())
      throw ParseError(path, detail::line_of_key(text, "", "source"), "source", "source mode needs a 'source' object");
    std::vector<std::vector<double>> per_material(p.materials.size(), std::vector<double>(p.groups(), 0.0));
    for (const auto& [name, vals] : doc["source"].items()) {
      auto idx = p.materials.find(name);
      if (!idx) throw ParseError(path, detail::line_of_key(text, "source", name), "source." + name, "unknown material");
      per_material[*idx] = detail::read_vector(vals, p.groups(), text, path, "source", name, "source." + name);
    }
    RegionMap regions = p.regions;
    p.source = [regions, per_material](std::size_t g, const Point& x) {
      return per_material[regions.material_at_point(x)][g];
    };
  }
  p.validate();
  return p;
}

}  // namespace cartamr
