#pragma once

// Exporters (legacy VTK, CSV traces, reports) and the saved-state format.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cartamr/amr.hpp"
#include "cartamr/errors.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/materials.hpp"
#include "cartamr/mesh.hpp"
#include "cartamr/reconstruct.hpp"

namespace cartamr {

namespace detail {

inline std::ostringstream classic_stream() {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  return os;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace detail

struct CellScalar {
  std::string name;
  std::vector<double> values;  // one per cell
};

struct PointScalar {
  std::string name;
  std::vector<double> values;  // one per mesh vertex, axis 0 fastest
};

/// Vertex values of one group of a nodal field (order-2 fields are sampled
/// at their vertex nodes).
inline PointScalar vertex_values(const NodalField& f, std::size_t g, std::string name) {
  const auto& mesh = f.mesh();
  Index3 n{1, 1, 1};
  for (int a = 0; a < mesh.dim(); ++a) n[a] = mesh.cells_along(a) + 1;
  PointScalar p{std::move(name), {}};
  p.values.reserve(n[0] * n[1] * n[2]);
  const auto q = static_cast<std::size_t>(f.order());
  for (std::size_t k = 0; k < n[2]; ++k)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t i = 0; i < n[0]; ++i) {
        Index3 m{i * q, j * q, k * q};
        for (int a = mesh.dim(); a < kMaxDim; ++a) m[a] = 0;
        p.values.push_back(f.values(g)[f.node_index(m)]);
      }
  return p;
}

/// Legacy ASCII VTK rectilinear grid.  `title` goes to the header line.
inline std::string format_vtk(const CartesianMesh& mesh, const std::vector<CellScalar>& cells,
                              const std::vector<PointScalar>& points, const std::string& title = "cartamr") {
  Index3 n{1, 1, 1};
  for (int a = 0; a < mesh.dim(); ++a) n[a] = mesh.cells_along(a) + 1;
  const std::size_t npoints = n[0] * n[1] * n[2];
  for (const auto& c : cells)
    if (c.values.size() != mesh.num_cells()) throw DimensionMismatch("cell field '" + c.name + "' has wrong size");
  for (const auto& p : points)
    if (p.values.size() != npoints) throw DimensionMismatch("point field '" + p.name + "' has wrong size");
  auto os = detail::classic_stream();
  std::string t = title.substr(0, 250);
  std::replace(t.begin(), t.end(), '\n', ' ');
  os << "# vtk DataFile Version 3.0\n" << t << "\nASCII\nDATASET RECTILINEAR_GRID\n";
  os << "DIMENSIONS " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  static const char* names[] = {"X_COORDINATES", "Y_COORDINATES", "Z_COORDINATES"};
  for (int a = 0; a < kMaxDim; ++a) {
    os << names[a] << ' ' << n[a] << " double\n";
    if (a < mesh.dim()) {
      const auto& c = mesh.axis(a).coords();
      for (std::size_t i = 0; i < c.size(); ++i) os << (i ? " " : "") << c[i];
    } else {
      os << 0;
    }
    os << '\n';
  }
  auto block = [&](const std::string& name, const std::vector<double>& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < v.size(); ++i) os << v[i] << ((i + 1) % 6 == 0 || i + 1 == v.size() ? '\n' : ' ');
  };
  if (!cells.empty()) {
    os << "CELL_DATA " << mesh.num_cells() << '\n';
    for (const auto& c : cells) block(c.name, c.values);
  }
  if (!points.empty()) {
    os << "POINT_DATA " << npoints << '\n';
    for (const auto& p : points) block(p.name, p.values);
  }
  return os.str();
}

inline void export_vtk(const std::string& path, const CartesianMesh& mesh, const std::vector<CellScalar>& cells,
                       const std::vector<PointScalar>& points, const std::string& title = "cartamr") {
  detail::write_file(path, format_vtk(mesh, cells, points, title));
}

/// Standard field set of a solved state: estimators, material id, cell
/// fluxes per group and reconstructed fluxes per group.
inline std::string format_solution_vtk(const BlockOperators& ops, const StateVector& s, const CellEstimators& est,
                                       const NodalField& field) {
  const std::size_t N = ops.layout().cells;
  std::vector<CellScalar> cells{{"eta_r", est.eta_r}, {"eta_f", est.eta_f}, {"eta", est.eta}, {"material", {}}};
  cells.back().values.resize(N);
  for (std::size_t k = 0; k < N; ++k) cells.back().values[k] = static_cast<double>(ops.material(k));
  std::vector<PointScalar> points;
  for (std::size_t g = 0; g < ops.groups(); ++g) {
    cells.push_back({"phi_h_g" + std::to_string(g + 1), s.phi[g]});
    points.push_back(vertex_values(field, g, "phi_rec_g" + std::to_string(g + 1)));
  }
  auto os = detail::classic_stream();
  os << std::setprecision(5) << "cartamr eta min = " << est.min_eta() << ", max = " << est.max_eta();
  return format_vtk(ops.mesh(), cells, points, os.str());
}

inline std::string format_trace_csv(const AmrTrace& trace) {
  if (trace.rows.empty()) throw InvalidArgument("format_trace_csv: empty trace");
  auto os = detail::classic_stream();
  os << "iteration,n_cells,max_eta,keff\n";
  for (const auto& r : trace.rows) os << r.iteration << ',' << r.n_cells << ',' << r.max_eta << ',' << r.keff << '\n';
  return os.str();
}

inline void export_trace(const std::string& path, const AmrTrace& trace) {
  detail::write_file(path, format_trace_csv(trace));
}

/// Rows of a trace CSV written by format_trace_csv.
inline std::vector<AmrRow> parse_trace_csv(const std::string& text, const std::string& source = "<trace>") {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::string line;
  if (!std::getline(in, line) || line != "iteration,n_cells,max_eta,keff")
    throw ParseError(source, 1, "header", "unexpected trace header");
  std::vector<AmrRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls.imbue(std::locale::classic());
    AmrRow r;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ls >> r.iteration >> c1 >> r.n_cells >> c2 >> r.max_eta >> c3 >> r.keff) || c1 != ',' || c2 != ',' ||
        c3 != ',')
      throw ParseError(source, lineno, "row", "malformed trace row");
    rows.push_back(r);
  }
  return rows;
}

inline std::string format_timing_log(const AmrTrace& trace) {
  auto os = detail::classic_stream();
  os << std::setprecision(6) << "iteration,n_cells,outer_iterations,wall_seconds\n";
  for (const auto& r : trace.rows)
    os << r.iteration << ',' << r.n_cells << ',' << r.outer_iterations << ',' << r.wall_seconds << '\n';
  return os.str();
}

inline std::string format_validation_report(const ValidationReport& r) {
  auto os = detail::classic_stream();
  os << std::setprecision(6);
  os << "groups: " << r.groups << '\n';
  os << "upscattering: " << (r.any_upscattering() ? "yes" : "no") << '\n';
  os << "epsilon bound 1/(G-1) met by all materials: " << (r.all_epsilon_within_bound() ? "yes" : "no") << '\n';
  for (const auto& m : r.materials) {
    os << m.name << ": D in [" << m.D_min << ", " << m.D_max << "], removal in [" << m.removal_min << ", "
       << m.removal_max << "], epsilon = " << m.epsilon << (m.epsilon_within_bound ? "" : " (above bound)")
       << ", upscattering = " << (m.upscattering ? "yes" : "no")
       << ", row dominant = " << (m.row_dominant ? "yes" : "no")
       << ", column dominant = " << (m.column_dominant ? "yes" : "no")
       << ", fissile = " << (m.fissile ? "yes" : "no") << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Saved state
//
// { "axes": [[x...], [y...], [z...]], "groups": G, "k": k,
//   "P": [[..faces..] per group], "phi": [[..cells..] per group] }

inline std::string format_state(const CartesianMesh& mesh, const StateVector& s) {
  nlohmann::ordered_json j;
  j["axes"] = nlohmann::ordered_json::array();
  for (int a = 0; a < mesh.dim(); ++a) j["axes"].push_back(mesh.axis(a).coords());
  j["groups"] = s.phi.size();
  j["k"] = s.k;
  j["P"] = s.P;
  j["phi"] = s.phi;
  return j.dump() + "\n";
}

inline std::pair<CartesianMesh, StateVector> parse_state(const std::string& text,
                                                         const std::string& source = "<state>") {
  const auto j = detail::parse_json_text(text, source);
  try {
    std::vector<AxisGrid> axes;
    for (const auto& a : j.at("axes")) axes.emplace_back(a.get<std::vector<double>>());
    CartesianMesh mesh(std::move(axes));
    StateVector s;
    s.k = j.at("k").get<double>();
    s.P = j.at("P").get<std::vector<std::vector<double>>>();
    s.phi = j.at("phi").get<std::vector<std::vector<double>>>();
    const DofLayout l{j.at("groups").get<std::size_t>(), mesh.num_faces_total(), mesh.num_cells()};
    if (!s.matches(l)) throw ParseError(source, 0, "phi", "state does not match its mesh");
    return {std::move(mesh), std::move(s)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, 0, "", e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, "axes", e.what());
  }
}

inline void save_state(const std::string& path, const CartesianMesh& mesh, const StateVector& s) {
  detail::write_file(path, format_state(mesh, s));
}

inline std::pair<CartesianMesh, StateVector> load_state(const std::string& path) {
  return parse_state(detail::read_text_file(path), path);
}

}  // namespace cartamr
