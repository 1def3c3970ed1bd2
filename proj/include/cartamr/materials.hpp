#pragma once

// Multigroup cross sections and the coefficient matrices derived from them.
//
// Group indices are 0-based in code (group 1 of the tables is index 0).
// scatter[from][to] holds the order-0 scattering cross section from group
// `from` into group `to`.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cartamr/errors.hpp"
#include "json.hpp"

namespace cartamr {

using Matrix = std::vector<std::vector<double>>;

struct MaterialData {
  std::string name;
  std::vector<double> sigma_t;
  std::vector<double> nu_sigma_f;
  std::vector<double> chi;
  Matrix scatter;  // scatter[from][to]
  std::optional<std::vector<double>> diffusion;  // explicit D override (cm)

  std::size_t groups() const { return sigma_t.size(); }
  bool fissile() const {
    return std::any_of(nu_sigma_f.begin(), nu_sigma_f.end(), [](double v) { return v != 0.0; });
  }
  friend bool operator==(const MaterialData&, const MaterialData&) = default;
};

/// Per-material coefficients entering the bilinear forms.
struct GroupCoefficients {
  std::vector<double> D;      // diffusion coefficient per group (cm)
  Matrix removal;             // T_e, removal[g][g'] (1/cm)
  std::vector<double> delta;  // diagonal of T_e
  Matrix fission;             // M_f, fission[g][g'] = chi[g] * nu_sigma_f[g'] (1/cm)

  std::size_t groups() const { return D.size(); }
};

inline void check_material(const MaterialData& m) {
  const std::size_t G = m.sigma_t.size();
  if (G < 1) throw InvalidArgument("material '" + m.name + "': at least 1 energy group required");
  if (m.nu_sigma_f.size() != G || m.chi.size() != G || m.scatter.size() != G)
    throw InvalidArgument("material '" + m.name + "': inconsistent group counts");
  for (const auto& row : m.scatter)
    if (row.size() != G) throw InvalidArgument("material '" + m.name + "': scattering block is not GxG");
  for (std::size_t g = 0; g < G; ++g) {
    if (!(m.sigma_t[g] > 0.0)) throw InvalidArgument("material '" + m.name + "': sigma_t must be > 0");
    if (m.nu_sigma_f[g] < 0.0) throw InvalidArgument("material '" + m.name + "': nu_sigma_f must be >= 0");
    if (m.chi[g] < 0.0) throw InvalidArgument("material '" + m.name + "': chi must be >= 0");
  }
  double chi_sum = 0.0;
  for (double c : m.chi) chi_sum += c;
  if (chi_sum != 0.0 && std::abs(chi_sum - 1.0) > 1e-6)
    throw InvalidArgument("material '" + m.name + "': chi must sum to 0 or 1");
  if (m.diffusion) {
    if (m.diffusion->size() != G) throw InvalidArgument("material '" + m.name + "': D has wrong size");
    for (double d : *m.diffusion)
      if (!(d > 0.0)) throw InvalidArgument("material '" + m.name + "': D must be > 0");
  }
}

/// T_e, M_f and D = 1/(3 sigma_t) (unless overridden) for one material.
inline GroupCoefficients derive_coefficients(const MaterialData& m) {
  check_material(m);
  const std::size_t G = m.groups();
  GroupCoefficients c;
  c.D.resize(G);
  c.delta.resize(G);
  c.removal.assign(G, std::vector<double>(G, 0.0));
  c.fission.assign(G, std::vector<double>(G, 0.0));
  for (std::size_t g = 0; g < G; ++g) {
    c.D[g] = m.diffusion ? (*m.diffusion)[g] : 1.0 / (3.0 * m.sigma_t[g]);
    for (std::size_t gp = 0; gp < G; ++gp) {
      c.removal[g][gp] = (g == gp) ? m.sigma_t[g] - m.scatter[g][g] : -m.scatter[gp][g];
      c.fission[g][gp] = m.chi[g] * m.nu_sigma_f[gp];
    }
    c.delta[g] = c.removal[g][g];
    if (!(c.delta[g] > 0.0))
      throw NonPositiveRemoval("material '" + m.name + "': removal cross section of group " +
                               std::to_string(g + 1) + " is not positive");
  }
  return c;
}

struct MaterialValidation {
  std::string name;
  double D_min = 0.0, D_max = 0.0;
  double removal_min = 0.0, removal_max = 0.0;
  /// Smallest eps with |scatter[g][g']| <= eps * removal[g] for all g' != g.
  double epsilon = 0.0;
  bool epsilon_within_bound = false;  // epsilon < 1/(G-1)
  bool upscattering = false;
  bool row_dominant = false;     // |T_gg| > sum_{g'!=g} |T_gg'| for every row
  bool column_dominant = false;  // same, by columns
  bool fissile = false;
};

struct ValidationReport {
  std::size_t groups = 0;
  std::vector<MaterialValidation> materials;

  bool all_epsilon_within_bound() const {
    return std::all_of(materials.begin(), materials.end(),
                       [](const MaterialValidation& m) { return m.epsilon_within_bound; });
  }
  bool any_upscattering() const {
    return std::any_of(materials.begin(), materials.end(),
                       [](const MaterialValidation& m) { return m.upscattering; });
  }
};

inline MaterialValidation validate_material(const MaterialData& m) {
  const GroupCoefficients c = derive_coefficients(m);
  const std::size_t G = m.groups();
  MaterialValidation v;
  v.name = m.name;
  v.fissile = m.fissile();
  v.D_min = *std::min_element(c.D.begin(), c.D.end());
  v.D_max = *std::max_element(c.D.begin(), c.D.end());
  v.removal_min = *std::min_element(c.delta.begin(), c.delta.end());
  v.removal_max = *std::max_element(c.delta.begin(), c.delta.end());
  v.row_dominant = true;
  v.column_dominant = true;
  for (std::size_t g = 0; g < G; ++g) {
    double row = 0.0, col = 0.0;
    for (std::size_t gp = 0; gp < G; ++gp) {
      if (gp == g) continue;
      v.epsilon = std::max(v.epsilon, std::abs(m.scatter[g][gp]) / c.delta[g]);
      if (gp < g && m.scatter[g][gp] != 0.0) v.upscattering = true;
      row += std::abs(c.removal[g][gp]);
      col += std::abs(c.removal[gp][g]);
    }
    v.row_dominant = v.row_dominant && c.delta[g] > row;
    v.column_dominant = v.column_dominant && c.delta[g] > col;
  }
  // A single group has no off-diagonal scattering, so the bound holds trivially.
  v.epsilon_within_bound = G < 2 || v.epsilon < 1.0 / static_cast<double>(G - 1);
  return v;
}

struct EnergyGroupSet {
  std::size_t count = 0;
  std::vector<std::pair<double, double>> bounds_ev;  // (upper, lower), optional
};

class MaterialSet {
 public:
  MaterialSet() = default;
  MaterialSet(EnergyGroupSet groups, std::vector<MaterialData> materials)
      : groups_(std::move(groups)), materials_(std::move(materials)) {
    for (const auto& m : materials_) {
      if (m.groups() != groups_.count)
        throw InvalidArgument("material '" + m.name + "' has a different group count");
      check_material(m);
    }
  }

  std::size_t groups() const { return groups_.count; }
  const EnergyGroupSet& group_set() const { return groups_; }
  const std::vector<MaterialData>& materials() const { return materials_; }
  std::size_t size() const { return materials_.size(); }
  const MaterialData& operator[](std::size_t i) const { return materials_[i]; }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < materials_.size(); ++i)
      if (materials_[i].name == name) return i;
    return std::nullopt;
  }
  const MaterialData& at(const std::string& name) const {
    auto i = find(name);
    if (!i) throw InvalidArgument("unknown material '" + name + "'");
    return materials_[*i];
  }

 private:
  EnergyGroupSet groups_;
  std::vector<MaterialData> materials_;
};

inline ValidationReport validate_assumptions(const MaterialSet& set) {
  ValidationReport r;
  r.groups = set.groups();
  for (const auto& m : set.materials()) r.materials.push_back(validate_material(m));
  return r;
}

// ---------------------------------------------------------------------------
// Material library file (JSON)
//
// {
//   "groups": 4,
//   "energy_bounds_ev": [[upper, lower], ...],        (optional)
//   "chi": [..G..],
//   "materials": {
//     "core": {
//       "sigma_t": [..G..], "nu_sigma_f": [..G..],
//       "scattering": [[from 1 -> to 1..G], ...],      (row = from group)
//       "chi": [..G..],                                (optional override)
//       "D": [..G..]                                   (optional override)
//     }, ...
//   }
// }

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

/// Line of the first occurrence of "key" after the first occurrence of
/// "anchor" (best-effort locus for semantic errors).
inline std::size_t line_of_key(const std::string& text, const std::string& anchor, const std::string& key) {
  std::size_t start = 0;
  if (!anchor.empty()) {
    auto p = text.find("\"" + anchor + "\"");
    if (p != std::string::npos) start = p;
  }
  auto q = key.empty() ? start : text.find("\"" + key + "\"", start);
  if (q == std::string::npos) q = start;
  return line_of_offset(text, q);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::ordered_json parse_json_text(const std::string& text, const std::string& source) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ParseError(source, 1, "", "empty document");
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), "", e.what());
  }
}

inline std::vector<double> read_vector(const nlohmann::ordered_json& j, std::size_t n, const std::string& text,
                                       const std::string& source, const std::string& anchor,
                                       const std::string& key, const std::string& field) {
  auto fail = [&](const std::string& why) {
    throw ParseError(source, line_of_key(text, anchor, key), field, why);
  };
  if (!j.is_array()) fail("expected an array of " + std::to_string(n) + " numbers");
  if (j.size() != n) fail("expected " + std::to_string(n) + " entries, found " + std::to_string(j.size()));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_number()) fail("entry " + std::to_string(i) + " is not a number");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

inline MaterialSet parse_material_library(const std::string& text, const std::string& source = "<materials>") {
  using detail::line_of_key;
  const auto doc = detail::parse_json_text(text, source);
  if (!doc.is_object()) throw ParseError(source, 1, "", "top level must be an object");
  if (!doc.contains("groups") || !doc["groups"].is_number_integer())
    throw ParseError(source, line_of_key(text, "", "groups"), "groups", "missing integer 'groups'");
  const auto G = doc["groups"].get<long long>();
  if (G < 1) throw ParseError(source, line_of_key(text, "", "groups"), "groups", "at least 1 group required");
  const auto n = static_cast<std::size_t>(G);
  EnergyGroupSet gs;
  gs.count = n;
  if (doc.contains("energy_bounds_ev")) {
    const auto& eb = doc["energy_bounds_ev"];
    if (!eb.is_array() || eb.size() != n)
      throw ParseError(source, line_of_key(text, "", "energy_bounds_ev"), "energy_bounds_ev",
                       "expected one [upper, lower] pair per group");
    for (std::size_t g = 0; g < n; ++g) {
      auto pair = detail::read_vector(eb[g], 2, text, source, "", "energy_bounds_ev",
                                      "energy_bounds_ev[" + std::to_string(g) + "]");
      gs.bounds_ev.emplace_back(pair[0], pair[1]);
    }
  }
  if (!doc.contains("chi")) throw ParseError(source, 0, "chi", "missing fission spectrum 'chi'");
  const auto chi = detail::read_vector(doc["chi"], n, text, source, "", "chi", "chi");
  if (!doc.contains("materials") || !doc["materials"].is_object() || doc["materials"].empty())
    throw ParseError(source, line_of_key(text, "", "materials"), "materials", "missing or empty 'materials'");

  std::vector<MaterialData> mats;
  for (const auto& [name, mj] : doc["materials"].items()) {
    const std::string base = "materials." + name;
    if (!mj.is_object()) throw ParseError(source, line_of_key(text, name, ""), base, "material must be an object");
    for (const char* key : {"sigma_t", "nu_sigma_f", "scattering"})
      if (!mj.contains(key))
        throw ParseError(source, line_of_key(text, name, ""), base + "." + key, "missing field");
    MaterialData m;
    m.name = name;
    m.sigma_t = detail::read_vector(mj["sigma_t"], n, text, source, name, "sigma_t", base + ".sigma_t");
    m.nu_sigma_f = detail::read_vector(mj["nu_sigma_f"], n, text, source, name, "nu_sigma_f", base + ".nu_sigma_f");
    m.chi = mj.contains("chi") ? detail::read_vector(mj["chi"], n, text, source, name, "chi", base + ".chi") : chi;
    const auto& sj = mj["scattering"];
    if (!sj.is_array() || sj.size() != n)
      throw ParseError(source, line_of_key(text, name, "scattering"), base + ".scattering",
                       "expected a GxG array (rows = from group)");
    for (std::size_t g = 0; g < n; ++g)
      m.scatter.push_back(detail::read_vector(sj[g], n, text, source, name, "scattering",
                                              base + ".scattering[" + std::to_string(g) + "]"));
    if (mj.contains("D")) m.diffusion = detail::read_vector(mj["D"], n, text, source, name, "D", base + ".D");
    try {
      check_material(m);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_of_key(text, name, ""), base, e.what());
    }
    mats.push_back(std::move(m));
  }
  return MaterialSet(std::move(gs), std::move(mats));
}

inline MaterialSet load_material_library(const std::string& path) {
  return parse_material_library(detail::read_text_file(path), path);
}

/// Inverse of parse_material_library; per-material chi is always written so
/// the round trip is exact even when materials carry their own spectrum.
inline std::string write_material_library(const MaterialSet& set) {
  nlohmann::ordered_json doc;
  doc["groups"] = set.groups();
  if (!set.group_set().bounds_ev.empty()) {
    auto eb = nlohmann::ordered_json::array();
    for (auto [up, lo] : set.group_set().bounds_ev) eb.push_back({up, lo});
    doc["energy_bounds_ev"] = eb;
  }
  doc["chi"] = set.size() > 0 ? set[0].chi : std::vector<double>(set.groups(), 0.0);
  nlohmann::ordered_json mats = nlohmann::ordered_json::object();
  for (const auto& m : set.materials()) {
    nlohmann::ordered_json mj;
    mj["sigma_t"] = m.sigma_t;
    mj["nu_sigma_f"] = m.nu_sigma_f;
    mj["chi"] = m.chi;
    mj["scattering"] = m.scatter;
    if (m.diffusion) mj["D"] = *m.diffusion;
    mats[m.name] = mj;
  }
  doc["materials"] = mats;
  return doc.dump(2) + "\n";
}

}  // namespace cartamr
