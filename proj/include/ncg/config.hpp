#pragma once

// Job configuration: JSON in, validated JobConfig out.  Every validation
// failure names the offending field or task; parse errors keep the byte
// position the parser reports.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncg/models.hpp"
#include "ncg/report.hpp"

namespace ncg {

enum class Method { winding, direct, character, heat, residue, validate, supertrace, zeta };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TaskConfig {
  Method method{Method::winding};
  std::string method_name;
  std::optional<WindingSymbol> symbol;
  int n{3};                      // character degree
  int k{-1};                     // cocycle degree; -1: pick by parity
  int heat_degree{15};           // top JLO degree
  std::vector<double> eps{1.0, 0.5, 0.25};
  std::vector<double> times{0.1, 1.0, 10.0};
  std::int64_t window{256};
  int m_cap{3};
  double tolerance{1e-6};
  std::string variant{"renormalized"};
  std::string projection{"1"};
};

struct ModelConfig {
  std::string kind;
  Eigen::MatrixXcd p_matrix;  // finite_even only
  std::map<std::string, Eigen::MatrixXcd> generators;
};

struct JobConfig {
  ModelConfig model;
  std::vector<TaskConfig> tasks;
  std::optional<std::string> out_path;
  ReportFormat format{ReportFormat::csv};
};

namespace detail {

using nlohmann::json;

inline cplx parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("config error: " + where + " must be a [re, im] pair");
  return cplx{j[0].get<double>(), j[1].get<double>()};
}

inline Eigen::MatrixXcd parse_matrix(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config error: " + where + " must be a non-empty array of rows");
  size_t cols = j[0].size();
  Eigen::MatrixXcd m(Eigen::Index(j.size()), Eigen::Index(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("config error: " + where + " rows have unequal length");
    for (size_t c = 0; c < cols; ++c)
      m(Eigen::Index(r), Eigen::Index(c)) =
          parse_complex(j[r][c], where + " entry");
  }
  return m;
}

inline WindingSymbol parse_symbol(const json& j, const std::string& where) {
  if (!j.is_object() || j.empty())
    throw ConfigError("config error: " + where + " must map offsets to [re, im]");
  WindingSymbol s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    int off = 0;
    try {
      size_t used = 0;
      off = std::stoi(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError("config error: " + where + " key is not an integer offset: " +
                        it.key());
    }
    s.coefficients[off] = parse_complex(it.value(), where + "[" + it.key() + "]");
  }
  return s;
}

inline Method parse_method(const std::string& name) {
  if (name == "winding") return Method::winding;
  if (name == "direct") return Method::direct;
  if (name == "character") return Method::character;
  if (name == "heat") return Method::heat;
  if (name == "residue") return Method::residue;
  if (name == "validate") return Method::validate;
  if (name == "supertrace") return Method::supertrace;
  if (name == "zeta") return Method::zeta;
  throw ConfigError("config error: unknown method: " + name);
}

inline bool method_is_even_only(Method m) {
  return m == Method::supertrace || m == Method::zeta;
}
inline bool method_is_odd_only(Method m) {
  return m == Method::winding;
}
inline bool method_needs_symbol(Method m) {
  return m == Method::winding || m == Method::direct || m == Method::character ||
         m == Method::heat || m == Method::residue;
}

}  // namespace detail

inline JobConfig load_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config error: top level must be an object");
  if (!j.contains("model")) throw ConfigError("config error: missing field \"model\"");
  if (!j.contains("tasks")) throw ConfigError("config error: missing field \"tasks\"");

  JobConfig job;
  const auto& jm = j["model"];
  if (!jm.is_object() || !jm.contains("kind"))
    throw ConfigError("config error: model requires field \"kind\"");
  job.model.kind = jm["kind"].get<std::string>();
  bool even_model;
  if (job.model.kind == "circle") {
    even_model = false;
  } else if (job.model.kind == "finite-even" || job.model.kind == "finite_even") {
    even_model = true;
    if (!jm.contains("p_matrix"))
      throw ConfigError("config error: finite_even model requires field \"p_matrix\"");
    job.model.p_matrix = detail::parse_matrix(jm["p_matrix"], "model.p_matrix");
    if (jm.contains("generators"))
      for (auto it = jm["generators"].begin(); it != jm["generators"].end(); ++it)
        job.model.generators[it.key()] =
            detail::parse_matrix(it.value(), "model.generators." + it.key());
  } else {
    throw ConfigError("config error: unknown model kind: " + job.model.kind);
  }

  if (j.contains("output")) {
    const auto& jo = j["output"];
    if (jo.contains("path")) job.out_path = jo["path"].get<std::string>();
    if (jo.contains("format")) {
      std::string f = jo["format"].get<std::string>();
      if (f == "csv")
        job.format = ReportFormat::csv;
      else if (f == "jsonl")
        job.format = ReportFormat::jsonl;
      else
        throw ConfigError("config error: unknown output format: " + f);
    }
  }

  const auto& jt = j["tasks"];
  if (!jt.is_array()) throw ConfigError("config error: \"tasks\" must be an array");
  for (size_t i = 0; i < jt.size(); ++i) {
    const auto& e = jt[i];
    std::string where = "task " + std::to_string(i);
    if (!e.is_object() || !e.contains("method"))
      throw ConfigError("config error: " + where + " requires field \"method\"");
    TaskConfig t;
    t.method_name = e["method"].get<std::string>();
    t.method = detail::parse_method(t.method_name);

    if (detail::method_is_even_only(t.method) && !even_model)
      throw ConfigError("config error: " + where + " (" + t.method_name +
                        "): parity mismatch with model");
    if (detail::method_is_odd_only(t.method) && even_model)
      throw ConfigError("config error: " + where + " (" + t.method_name +
                        "): parity mismatch with model");
    if (detail::method_needs_symbol(t.method) && !even_model) {
      if (!e.contains("symbol"))
        throw ConfigError("config error: " + where + " requires field \"symbol\"");
      t.symbol = detail::parse_symbol(e["symbol"], where + ".symbol");
    }

    if (e.contains("n")) t.n = e["n"].get<int>();
    if (e.contains("k")) t.k = e["k"].get<int>();
    if (e.contains("heat_degree")) t.heat_degree = e["heat_degree"].get<int>();
    if (e.contains("eps")) t.eps = e["eps"].get<std::vector<double>>();
    if (e.contains("t")) t.times = e["t"].get<std::vector<double>>();
    if (e.contains("window")) t.window = e["window"].get<std::int64_t>();
    if (e.contains("m_cap")) t.m_cap = e["m_cap"].get<int>();
    if (e.contains("tolerance")) t.tolerance = e["tolerance"].get<double>();
    if (e.contains("variant")) t.variant = e["variant"].get<std::string>();
    if (e.contains("projection")) t.projection = e["projection"].get<std::string>();
    if (t.variant != "raw" && t.variant != "renormalized")
      throw ConfigError("config error: " + where + ": unknown variant: " + t.variant);
    if (t.k == -1) t.k = even_model ? 0 : 1;
    if (t.window < 1)
      throw ConfigError("config error: " + where + ": window must be positive");
    if (t.eps.empty())
      throw ConfigError("config error: " + where + ": eps list must be non-empty");
    job.tasks.push_back(std::move(t));
  }
  return job;
}

}  // namespace ncg
