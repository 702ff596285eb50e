#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symscope/common.hpp"
#include "symscope/diagnostics.hpp"

namespace symscope {

/// Reports are built as ordered JSON so key order is the insertion order and
/// serialization is reproducible byte for byte.
using Json = nlohmann::ordered_json;

namespace detail {

/// Fixed float rendering: 17 significant digits, no locale dependence.
inline std::string format_float(double v) {
  if (!std::isfinite(v))
    throw std::invalid_argument("report: non-finite value cannot be emitted");
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline void write_json_value(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_json_value(it.value(), out);
      }
      out += '}';
      return;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i != 0) out += ',';
        write_json_value(j[i], out);
      }
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += format_float(j.get<double>());
      return;
    default:
      // strings, integers, booleans, null: the default dump is exact.
      out += j.dump();
      return;
  }
}

}  // namespace detail

inline std::string serialize_json(const Json& j) {
  std::string out;
  detail::write_json_value(j, out);
  out += '\n';
  return out;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f.good())
    throw std::runtime_error("cannot open for writing: " + path.string());
  f << text;
  if (!f.good())
    throw std::runtime_error("write failed: " + path.string());
}

inline Json thresholds_to_json(const DiagnosticThresholds& t) {
  Json j;
  j["vanish"] = t.vanish;
  j["persist"] = t.persist;
  j["persist_relative_change"] = t.persist_relative_change;
  return j;
}

inline Json report_to_json(const DiagnosticReport& rep) {
  Json j;
  j["diagnostic"] = rep.diagnostic;
  j["windows"] = rep.windows;
  j["values"] = rep.values;
  if (!rep.swapped_values.empty()) j["swapped_values"] = rep.swapped_values;
  if (!rep.extra_series.empty()) {
    Json extra;
    for (const auto& [name, series] : rep.extra_series) extra[name] = series;
    j["extra_series"] = std::move(extra);
  }
  j["warnings"] = rep.warnings;
  j["verdict"] = rep.verdict;
  j["thresholds"] = thresholds_to_json(rep.thresholds);
  if (!rep.conventions.empty()) {
    Json conv;
    for (const auto& [key, value] : rep.conventions) conv[key] = value;
    j["conventions"] = std::move(conv);
  }
  return j;
}

/// One CSV line per (window, value) pair, shared header "report,window,value".
inline void append_report_csv(std::string& csv, const std::string& id,
                              const std::vector<int>& windows,
                              const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    csv += id;
    csv += ',';
    csv += i < windows.size() ? std::to_string(windows[i]) : std::to_string(i);
    csv += ',';
    csv += detail::format_float(values[i]);
    csv += '\n';
  }
}

}  // namespace symscope
