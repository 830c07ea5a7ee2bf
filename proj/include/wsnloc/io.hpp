#pragma once

// JSON and config-file (de)serialization for the external file formats.

#include <json.hpp>

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wsnloc/bench.hpp"
#include "wsnloc/error.hpp"
#include "wsnloc/estimator.hpp"
#include "wsnloc/network.hpp"
#include "wsnloc/rss_sim.hpp"
#include "wsnloc/sdr.hpp"

namespace wsnloc {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json points_to_json(const std::vector<Point2>& pts) {
  Json arr = Json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

inline std::vector<Point2> points_from_json(const Json& j, std::string_view field) {
  if (!j.is_array()) throw ParseError(std::string(field) + " must be an array of [x, y] pairs");
  std::vector<Point2> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(std::string(field) + " entries must be [x, y] number pairs");
    }
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

inline std::size_t count_field(const Json& j, const char* key) {
  const auto v = field<std::int64_t>(j, key);
  if (v < 0) throw ParseError(std::string("field '") + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

inline Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace detail

// --- Scenario -------------------------------------------------------------

inline Json to_json(const Scenario& s) {
  Json j;
  j["n"] = s.num_unknowns();
  j["m"] = s.num_anchors();
  j["d_max"] = s.d_max;
  j["seed"] = s.seed;
  j["unknowns"] = detail::points_to_json(s.unknowns);
  j["anchors_true"] = detail::points_to_json(s.anchors_true);
  j["anchors_reported"] = detail::points_to_json(s.anchors_reported);
  return j;
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  const std::size_t n = detail::count_field(j, "n");
  const std::size_t m = detail::count_field(j, "m");
  s.d_max = detail::field<double>(j, "d_max");
  s.seed = detail::field<std::uint64_t>(j, "seed");
  s.unknowns = detail::points_from_json(detail::field<Json>(j, "unknowns"), "unknowns");
  s.anchors_true = detail::points_from_json(detail::field<Json>(j, "anchors_true"), "anchors_true");
  s.anchors_reported =
      detail::points_from_json(detail::field<Json>(j, "anchors_reported"), "anchors_reported");
  if (s.unknowns.size() != n) throw ParseError("unknowns length differs from n");
  if (s.anchors_true.size() != m) throw ParseError("anchors_true length differs from m");
  if (s.anchors_reported.size() != m) throw ParseError("anchors_reported length differs from m");
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

// --- MeasurementSet -------------------------------------------------------

inline Json to_json(const MeasurementSet& meas) {
  Json j;
  j["n"] = meas.n;
  j["m"] = meas.m;
  j["d_max"] = meas.d_max;
  j["anchors_reported"] = detail::points_to_json(meas.anchors_reported);
  Json edges = Json::array();
  for (const auto& e : meas.edges) {
    Json je;
    je["i"] = e.i;
    je["j"] = e.j;
    je["kind"] = e.kind == EdgeKind::UnknownUnknown ? "uu" : "ua";
    je["dbar"] = e.d_bar;
    edges.push_back(std::move(je));
  }
  j["edges"] = std::move(edges);
  return j;
}

inline MeasurementSet measurements_from_json(const Json& j) {
  MeasurementSet meas;
  meas.n = detail::count_field(j, "n");
  meas.m = detail::count_field(j, "m");
  meas.d_max = detail::field<double>(j, "d_max");
  meas.anchors_reported =
      detail::points_from_json(detail::field<Json>(j, "anchors_reported"), "anchors_reported");
  const Json edges = detail::field<Json>(j, "edges");
  if (!edges.is_array()) throw ParseError("edges must be an array");
  for (const auto& je : edges) {
    Edge e;
    e.i = detail::count_field(je, "i");
    e.j = detail::count_field(je, "j");
    const auto kind = detail::field<std::string>(je, "kind");
    if (kind == "uu") {
      e.kind = EdgeKind::UnknownUnknown;
    } else if (kind == "ua") {
      e.kind = EdgeKind::UnknownAnchor;
    } else {
      throw ParseError("edge kind must be \"uu\" or \"ua\", got \"" + kind + "\"");
    }
    e.d_bar = detail::field<double>(je, "dbar");
    meas.edges.push_back(e);
  }
  try {
    meas.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid measurement set: ") + e.what());
  }
  return meas;
}

// --- ConicProblem debug dump ---------------------------------------------

namespace detail {

inline Json expr_to_json(const LinearExpr& e) {
  Json scalars = Json::array();
  for (const auto& t : e.scalars) scalars.push_back({t.var, t.coef});
  Json psd = Json::array();
  for (const auto& t : e.entries) psd.push_back({t.row, t.col, t.coef});
  Json j;
  j["scalar"] = std::move(scalars);
  j["psd"] = std::move(psd);
  return j;
}

}  // namespace detail

/// Scalar terms are [var, coef]; PSD terms are [row, col, coef] triplets over
/// the upper triangle, coef multiplying D(row, col).
inline Json to_json(const ConicProblem& p) {
  Json j;
  j["psd_dim"] = p.psd_dim;
  j["num_scalar_vars"] = p.num_scalar_vars;
  j["kappa"] = p.kappa;
  j["objective"] = detail::expr_to_json(p.objective);
  Json cons = Json::array();
  for (const auto& c : p.constraints) {
    Json jc = detail::expr_to_json(c.lhs);
    jc["sense"] = c.sense == Sense::Equal ? "==" : ">=";
    jc["rhs"] = c.rhs;
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  Json pinned = Json::array();
  for (const auto& pin : p.pinned) pinned.push_back({pin.row, pin.col, pin.value});
  j["pinned"] = std::move(pinned);
  return j;
}

// --- LocalizationResult ---------------------------------------------------

inline Json to_json(const LocalizationResult& r) {
  Json j;
  j["method"] = to_string(r.method);
  j["C"] = r.connectivity;
  j["kappa"] = r.kappa_used;
  j["objective"] = r.objective;
  j["tightness"] = r.tightness;
  j["positions"] = detail::points_to_json(r.positions);
  return j;
}

inline LocalizationResult result_from_json(const Json& j) {
  LocalizationResult r;
  r.method = parse_method(detail::field<std::string>(j, "method"));
  r.connectivity = detail::field<double>(j, "C");
  r.kappa_used = detail::field<double>(j, "kappa");
  r.objective = detail::field<double>(j, "objective");
  r.tightness = detail::field<double>(j, "tightness");
  r.positions = detail::points_from_json(detail::field<Json>(j, "positions"), "positions");
  return r;
}

// --- Files ----------------------------------------------------------------

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write to '" + path + "' failed");
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Reads a bare MeasurementSet or a generator document holding one under
/// "measurements".
inline MeasurementSet load_measurements(const std::string& path) {
  const Json j = detail::parse_json(read_file(path));
  if (j.is_object() && j.contains("measurements")) return measurements_from_json(j.at("measurements"));
  return measurements_from_json(j);
}

// --- Experiment config ----------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline std::uint64_t to_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': integer out of range");
  }
}

inline void apply_config_value(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  try {
    if (key == "name" || key == "experiment") {
      cfg.name = value;
    } else if (key == "sweep" || key == "swept_parameter") {
      cfg.swept = parse_swept_parameter(value);
    } else if (key == "values" || key == "sweep_values") {
      cfg.sweep_values.clear();
      for (const auto& v : split_list(value)) cfg.sweep_values.push_back(to_double(key, v));
    } else if (key == "n") {
      cfg.n_unknown = to_count(key, value);
    } else if (key == "m") {
      cfg.n_anchor = to_count(key, value);
    } else if (key == "gamma_p" || key == "gamma-p") {
      cfg.fixed.gamma_p = to_double(key, value);
    } else if (key == "sigma_db" || key == "sigma-db" || key == "sigma_dB") {
      cfg.fixed.sigma_db = to_double(key, value);
    } else if (key == "eps" || key == "epsilon") {
      cfg.fixed.epsilon = to_double(key, value);
    } else if (key == "dmax" || key == "d_max") {
      cfg.fixed.d_max = to_double(key, value);
    } else if (key == "trials") {
      cfg.trials = to_count(key, value);
    } else if (key == "seed" || key == "base_seed") {
      cfg.base_seed = to_count(key, value);
    } else if (key == "methods" || key == "method") {
      cfg.methods.clear();
      for (const auto& v : split_list(value)) cfg.methods.push_back(parse_method(v));
    } else if (key == "jobs") {
      cfg.jobs = to_count(key, value);
    } else {
      throw ParseError("unknown config key '" + key + "'");
    }
  } catch (const InvalidArgument& e) {
    throw ParseError("config key '" + key + "': " + e.what());
  }
}

inline std::string json_value_as_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ',';
      out += json_value_as_text(item);
    }
    return out;
  }
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  throw ParseError("unsupported config value " + v.dump());
}

}  // namespace detail

/// Parses `key = value` lines (with # comments) or a flat JSON object onto `base`.
inline ExperimentConfig parse_experiment_config(const std::string& text, ExperimentConfig base = {}) {
  const std::string trimmed = detail::trim(text);
  if (!trimmed.empty() && trimmed.front() == '{') {
    const Json j = detail::parse_json(trimmed);
    for (const auto& [key, value] : j.items()) {
      detail::apply_config_value(base, key, detail::json_value_as_text(value));
    }
    return base;
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    detail::apply_config_value(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return base;
}

}  // namespace wsnloc
