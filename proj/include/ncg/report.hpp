#pragma once

// Report rows and their two serializations.  The CSV header is part of the
// interface; downstream tooling greps for it verbatim.

#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ncg/certified.hpp"

namespace ncg {

enum class ReportFormat { csv, jsonl };

struct ReportRow {
  int task{0};
  std::string method;
  int k{0};
  cplx value{std::numeric_limits<double>::quiet_NaN(),
             std::numeric_limits<double>::quiet_NaN()};
  double tail_bound{std::numeric_limits<double>::infinity()};
  std::optional<long> rounded;  // empty: integrality not applicable
  std::optional<double> defect;
  double seconds{0.0};
  bool failed{false};
  std::string error;  // not serialized; surfaced on stderr by the driver
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string json_num(double v) {
  if (!std::isfinite(v)) return "null";
  return num(v);
}

}  // namespace detail

inline std::string emit_report(const std::vector<ReportRow>& rows, ReportFormat f) {
  std::string out;
  if (f == ReportFormat::csv) {
    out += "task,method,k,re,im,tail_bound,rounded,defect,seconds\n";
    for (const auto& r : rows) {
      out += std::to_string(r.task) + "," + r.method + "," + std::to_string(r.k) + ",";
      out += detail::num(r.value.real()) + "," + detail::num(r.value.imag()) + ",";
      out += detail::num(r.tail_bound) + ",";
      out += r.rounded ? std::to_string(*r.rounded) : std::string("na");
      out += ",";
      out += r.defect ? detail::num(*r.defect) : std::string("na");
      out += "," + detail::num(r.seconds) + "\n";
    }
  } else {
    for (const auto& r : rows) {
      out += "{\"task\":" + std::to_string(r.task);
      out += ",\"method\":\"" + r.method + "\"";
      out += ",\"k\":" + std::to_string(r.k);
      out += ",\"re\":" + detail::json_num(r.value.real());
      out += ",\"im\":" + detail::json_num(r.value.imag());
      out += ",\"tail_bound\":" + detail::json_num(r.tail_bound);
      out += ",\"rounded\":" + (r.rounded ? std::to_string(*r.rounded) : std::string("null"));
      out += ",\"defect\":" + (r.defect ? detail::json_num(*r.defect) : std::string("null"));
      out += ",\"seconds\":" + detail::num(r.seconds) + "}\n";
    }
  }
  return out;
}

}  // namespace ncg
