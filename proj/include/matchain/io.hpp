#pragma once

// CSV ingestion (refractive indices, growth tables), formulation JSON
// export/import, and report serialization.

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "matchain/disjunctive.hpp"
#include "matchain/error.hpp"
#include "matchain/formulation.hpp"
#include "matchain/optics.hpp"
#include "matchain/thinfilm.hpp"
#include "matchain/timemachine.hpp"

namespace matchain {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where + ": '" + s + "' is not a number");
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row
};

inline CsvTable read_csv(std::istream& in, const std::vector<std::string>& expected, const std::string& what) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (t.header.empty()) {
      t.header = cells;
      if (t.header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError(what + ": header must be '" + want + "'");
      }
      continue;
    }
    if (cells.size() != expected.size()) {
      throw ParseError(what + " line " + std::to_string(lineno) + ": expected " + std::to_string(expected.size()) + " fields");
    }
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) throw ParseError(what + ": empty file");
  return t;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return in;
}

}  // namespace detail

struct RefractiveRow {
  std::string material;
  double wavelength = 0.0;
  double n_real = 0.0;
  double n_imag = 0.0;
};

struct RefractiveTable {
  std::vector<RefractiveRow> rows;

  [[nodiscard]] std::vector<double> wavelengths() const {
    std::set<double> s;
    for (const auto& r : rows) s.insert(r.wavelength);
    return {s.begin(), s.end()};
  }

  [[nodiscard]] const RefractiveRow* find(const std::string& material, double wavelength) const {
    for (const auto& r : rows) {
      if (r.material == material && r.wavelength == wavelength) return &r;
    }
    return nullptr;
  }

  /// Library at exactly `wavelength`. Without `coatings`, every
  /// non-absorbing material at that wavelength except the substrate, in file order.
  [[nodiscard]] MaterialLibrary library(const std::string& substrate, double wavelength,
                                        const std::vector<std::string>& coatings = {}) const {
    bool any = false;
    for (const auto& r : rows) any = any || r.wavelength == wavelength;
    if (!any) throw PreconditionError("refractive data has no rows at wavelength " + std::to_string(wavelength) + " nm");
    const auto* sub = find(substrate, wavelength);
    if (sub == nullptr) throw PreconditionError("refractive data has no substrate " + substrate + " at " + std::to_string(wavelength) + " nm");
    MaterialLibrary lib{wavelength, substrate, {sub->n_real, sub->n_imag}, {}, {}};
    if (coatings.empty()) {
      for (const auto& r : rows) {
        if (r.wavelength == wavelength && r.material != substrate && r.n_imag == 0.0) {
          lib.names.push_back(r.material);
          lib.indices.push_back(r.n_real);
        }
      }
    } else {
      for (const auto& name : coatings) {
        const auto* r = find(name, wavelength);
        if (r == nullptr) throw PreconditionError("refractive data has no coating " + name + " at " + std::to_string(wavelength) + " nm");
        lib.names.push_back(name);
        lib.indices.push_back(r->n_real);
      }
    }
    lib.validate();
    return lib;
  }
};

/// Columns: material,wavelength_nm,n_real,n_imag. The substrate's n_imag
/// may be nonzero; coatings use only n_real.
inline RefractiveTable parse_refractive_csv(std::istream& in) {
  const auto t = detail::read_csv(in, {"material", "wavelength_nm", "n_real", "n_imag"}, "refractive csv");
  RefractiveTable out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::string where = "refractive csv line " + std::to_string(t.lines[i]);
    if (c[0].empty()) throw ParseError(where + ": missing material");
    if (c[1].empty()) throw ParseError(where + ": missing wavelength");
    RefractiveRow r{c[0], detail::to_number(c[1], where), detail::to_number(c[2], where),
                    c[3].empty() ? 0.0 : detail::to_number(c[3], where)};
    if (!(r.wavelength > 0.0)) throw ParseError(where + ": wavelength must be positive");
    if (!(r.n_real > 0.0)) throw ParseError(where + ": index of " + r.material + " must be positive");
    if (out.find(r.material, r.wavelength) != nullptr) {
      throw ParseError(where + ": duplicate " + r.material + " at " + c[1] + " nm");
    }
    out.rows.push_back(std::move(r));
  }
  if (out.rows.empty()) throw ParseError("refractive csv: no data rows");
  return out;
}

inline RefractiveTable parse_refractive_csv(const std::string& path) {
  auto in = detail::open_in(path);
  return parse_refractive_csv(in);
}

/// Columns: drug,genotype,growth_rate with genotypes as little-endian bit
/// strings. Drugs keep their first-appearance order; every drug needs every genotype.
inline GrowthTable parse_growth_csv(std::istream& in) {
  const auto t = detail::read_csv(in, {"drug", "genotype", "growth_rate"}, "growth csv");
  if (t.rows.empty()) throw ParseError("growth csv: no data rows");
  const std::size_t g = t.rows.front()[1].size();
  if (g < 1 || g > 20) throw ParseError("growth csv: genotype length must be in 1..20");
  const GenotypeSpace sp(static_cast<unsigned>(g));
  std::vector<std::string> drugs;
  std::map<std::string, std::size_t> drug_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& c = t.rows[i];
    const std::string where = "growth csv line " + std::to_string(t.lines[i]);
    if (c[0].empty()) throw ParseError(where + ": missing drug name");
    if (c[1].size() != g) {
      throw ParseError(where + ": genotype '" + c[1] + "' has length " + std::to_string(c[1].size()) + ", expected " + std::to_string(g));
    }
    std::size_t j = 0;
    try {
      j = sp.index(c[1]);
    } catch (const PreconditionError& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (c[2].empty()) throw ParseError(where + ": missing growth rate for drug " + c[0] + ", genotype " + c[1]);
    const double w = detail::to_number(c[2], where);
    if (!std::isfinite(w)) throw ParseError(where + ": growth rate must be finite");
    auto [it, fresh] = drug_index.try_emplace(c[0], drugs.size());
    if (fresh) drugs.push_back(c[0]);
    if (!cells.emplace(std::pair{it->second, j}, w).second) {
      throw ParseError(where + ": duplicate cell for drug " + c[0] + ", genotype " + c[1]);
    }
  }
  GrowthTable out;
  out.g = static_cast<unsigned>(g);
  out.drugs = drugs;
  out.omega.resize(static_cast<Eigen::Index>(drugs.size()), static_cast<Eigen::Index>(sp.d()));
  for (std::size_t k = 0; k < drugs.size(); ++k) {
    for (std::size_t j = 0; j < sp.d(); ++j) {
      const auto it = cells.find({k, j});
      if (it == cells.end()) throw ParseError("growth csv: missing cell for drug " + drugs[k] + ", genotype " + sp.name(j));
      out.omega(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = it->second;
    }
  }
  return out;
}

inline GrowthTable parse_growth_csv(const std::string& path) {
  auto in = detail::open_in(path);
  return parse_growth_csv(in);
}

inline void write_growth_csv(const GrowthTable& t, std::ostream& out) {
  t.validate();
  const auto sp = t.space();
  out << "drug,genotype,growth_rate\n";
  char buf[64];
  for (std::size_t k = 0; k < t.K(); ++k) {
    for (std::size_t j = 0; j < sp.d(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", t.omega(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
      out << t.drugs[k] << ',' << sp.name(j) << ',' << buf << '\n';
    }
  }
}

/// Long-format transition table: drug,from,to,probability (nonzeros only).
inline void write_transitions_csv(const std::vector<Eigen::MatrixXd>& matrices, const GrowthTable& t, std::ostream& out) {
  const auto sp = t.space();
  out << "drug,from,to,probability\n";
  char buf[64];
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    const auto& T = matrices[k];
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      for (Eigen::Index j = 0; j < T.cols(); ++j) {
        if (T(i, j) == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.12g", T(i, j));
        out << t.drugs[k] << ',' << sp.name(static_cast<std::size_t>(i)) << ',' << sp.name(static_cast<std::size_t>(j)) << ','
            << buf << '\n';
      }
    }
  }
}

// ---- formulation JSON ----

namespace detail {

inline const char* sense_name(RowSense s) {
  switch (s) {
    case RowSense::LessEqual: return "<=";
    case RowSense::Equal: return "==";
    case RowSense::GreaterEqual: return ">=";
  }
  return "?";
}

inline RowSense parse_sense(const std::string& s) {
  if (s == "<=") return RowSense::LessEqual;
  if (s == "==") return RowSense::Equal;
  if (s == ">=") return RowSense::GreaterEqual;
  throw ParseError("formulation json: unknown row sense '" + s + "'");
}

// JSON has no infinities; unbounded sides are null.
inline json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double bound_value(const json& j, double missing) { return j.is_null() ? missing : j.get<double>(); }

inline json terms_json(const std::vector<LinearTerm>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back({t.var, t.coef});
  return a;
}

inline json terms_json(const std::vector<BilinearTerm>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back({t.var1, t.var2, t.coef});
  return a;
}

inline std::vector<LinearTerm> linear_terms(const json& a) {
  std::vector<LinearTerm> out;
  for (const auto& t : a) out.push_back({t.at(0).get<std::size_t>(), t.at(1).get<double>()});
  return out;
}

inline std::vector<BilinearTerm> bilinear_terms(const json& a) {
  std::vector<BilinearTerm> out;
  for (const auto& t : a) out.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<double>()});
  return out;
}

}  // namespace detail

inline json formulation_to_json(const Model& m) {
  m.validate();
  json j;
  j["format"] = "matchain-formulation";
  j["version"] = 1;
  j["kind"] = m.kind;
  json vars = json::array();
  for (const auto& v : m.variables) {
    vars.push_back({{"name", v.name},
                    {"kind", v.kind == VarKind::Binary ? "binary" : "continuous"},
                    {"lower", detail::bound_json(v.lower)},
                    {"upper", detail::bound_json(v.upper)}});
  }
  j["variables"] = std::move(vars);
  json rows = json::array();
  for (const auto& c : m.constraints) {
    json r{{"name", c.name}, {"group", c.group}, {"sense", detail::sense_name(c.sense)}, {"rhs", c.rhs},
           {"linear", detail::terms_json(c.linear)}};
    if (!c.bilinear.empty()) r["bilinear"] = detail::terms_json(c.bilinear);
    rows.push_back(std::move(r));
  }
  j["constraints"] = std::move(rows);
  j["objective"] = {{"sense", m.objective.sense == ObjectiveSense::Maximize ? "max" : "min"},
                    {"constant", m.objective.constant},
                    {"linear", detail::terms_json(m.objective.linear)},
                    {"quadratic", detail::terms_json(m.objective.quadratic)}};
  return j;
}

inline Model formulation_from_json(const json& j) {
  try {
    if (j.at("format") != "matchain-formulation") throw ParseError("formulation json: unknown format");
    Model m;
    m.kind = j.at("kind").get<std::string>();
    for (const auto& v : j.at("variables")) {
      const auto kind = v.at("kind").get<std::string>();
      if (kind != "binary" && kind != "continuous") throw ParseError("formulation json: unknown variable kind '" + kind + "'");
      m.variables.push_back({v.at("name").get<std::string>(), kind == "binary" ? VarKind::Binary : VarKind::Continuous,
                             detail::bound_value(v.at("lower"), -kInf), detail::bound_value(v.at("upper"), kInf)});
    }
    for (const auto& r : j.at("constraints")) {
      Constraint c;
      c.name = r.at("name").get<std::string>();
      c.group = r.at("group").get<std::string>();
      c.sense = detail::parse_sense(r.at("sense").get<std::string>());
      c.rhs = r.at("rhs").get<double>();
      c.linear = detail::linear_terms(r.at("linear"));
      if (r.contains("bilinear")) c.bilinear = detail::bilinear_terms(r.at("bilinear"));
      m.constraints.push_back(std::move(c));
    }
    const auto& o = j.at("objective");
    const auto sense = o.at("sense").get<std::string>();
    if (sense != "max" && sense != "min") throw ParseError("formulation json: objective sense must be max or min");
    m.objective.sense = sense == "max" ? ObjectiveSense::Maximize : ObjectiveSense::Minimize;
    m.objective.constant = o.at("constant").get<double>();
    m.objective.linear = detail::linear_terms(o.at("linear"));
    m.objective.quadratic = detail::bilinear_terms(o.at("quadratic"));
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("formulation json: ") + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("formulation json: ") + e.what());
  }
}

inline void export_formulation(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << formulation_to_json(m).dump(1) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline Model import_formulation(const std::string& path) {
  auto in = detail::open_in(path);
  try {
    return formulation_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("formulation json: ") + e.what());
  }
}

// ---- reports ----

/// Rounds to 12 significant digits; JSON then prints the shortest form.
inline double sig12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline json num(double v) { return std::isfinite(v) ? json(sig12(v)) : json(nullptr); }

inline json report_json(const SolveReport& r) {
  return {{"status", to_string(r.status)},
          {"optimal_value", num(r.optimal_value)},
          {"best_bound", num(r.best_bound)},
          {"gap", num(r.gap)},
          {"nodes", r.node_count},
          {"lp_solves", r.lp_count},
          {"wall_time", num(r.wall_time)}};
}

inline json design_json(const StackDesign& d, const MaterialLibrary& lib) {
  json layers = json::array();
  for (const auto& l : d.layers) {
    layers.push_back({{"material", lib.names[l.material]},
                      {"index", num(lib.indices[l.material])},
                      {"thickness_nm", num(l.thickness(lib))},
                      {"C", num(l.C)},
                      {"S", num(l.S)}});
  }
  return {{"reflectance", num(d.reflectance)}, {"provenance", to_string(d.provenance)}, {"layers", std::move(layers)}};
}

}  // namespace matchain
