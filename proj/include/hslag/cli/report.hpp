#pragma once

// Run reports: a JSON document with the task echo, numeric tables, verdicts
// and a deterministic hash of config + tables, plus RFC-4180 CSV emission of
// every table for plotting.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "hslag/errors.hpp"

namespace hslag {

inline constexpr const char* kToolVersion = "0.1.0";

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  std::string task;
  bool pass = false;
  std::map<std::string, bool> verdicts;
  std::map<std::string, double> scalars;
  std::map<std::string, Table> tables;
  std::string error_code;  // empty on success
  std::string error_what;
  double elapsed_seconds = 0.0;
  std::string config_hash;
  std::string report_hash;  // over config + deterministic numeric content
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& data,
                           std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

inline std::string number17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Deterministic content: everything except timing.
inline std::string report_digest_material(const RunReport& rep) {
  std::string s = rep.task + "|" + (rep.pass ? "1" : "0");
  for (const auto& [k, v] : rep.verdicts) s += "|" + k + "=" + (v ? "1" : "0");
  for (const auto& [k, v] : rep.scalars)
    s += "|" + k + "=" + detail::number17(v);
  for (const auto& [name, t] : rep.tables) {
    s += "|" + name;
    for (const auto& c : t.columns) s += "," + c;
    for (const auto& row : t.rows)
      for (double v : row) s += ";" + detail::number17(v);
  }
  s += "|" + rep.error_code;
  return s;
}

inline void finalize_hashes(RunReport& rep, const nlohmann::json& config) {
  rep.config_hash = detail::hex64(detail::fnv1a(config.dump()));
  rep.report_hash = detail::hex64(
      detail::fnv1a(report_digest_material(rep), detail::fnv1a(config.dump())));
}

inline nlohmann::json report_json(const RunReport& rep) {
  nlohmann::json j;
  j["task"] = rep.task;
  j["pass"] = rep.pass;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = rep.config_hash;
  j["report_hash"] = rep.report_hash;
  j["elapsed_seconds"] = rep.elapsed_seconds;
  for (const auto& [k, v] : rep.verdicts) j["verdicts"][k] = v;
  for (const auto& [k, v] : rep.scalars) j["scalars"][k] = v;
  for (const auto& [name, t] : rep.tables) {
    nlohmann::json jt;
    jt["columns"] = t.columns;
    jt["rows"] = t.rows;
    j["tables"][name] = jt;
  }
  if (!rep.error_code.empty()) {
    j["error"]["code"] = rep.error_code;
    j["error"]["what"] = rep.error_what;
  }
  return j;
}

/// One RFC-4180 CSV per table (CRLF line endings, header row).
inline std::vector<std::string> emit_plot_data(
    const RunReport& rep, const std::filesystem::path& out_dir,
    const std::string& prefix) {
  std::vector<std::string> written;
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, t] : rep.tables) {
    std::filesystem::path file = out_dir / (prefix + "_" + name + ".csv");
    std::ofstream os(file, std::ios::binary);
    for (size_t i = 0; i < t.columns.size(); ++i)
      os << (i ? "," : "") << t.columns[i];
    os << "\r\n";
    for (const auto& row : t.rows) {
      for (size_t i = 0; i < row.size(); ++i)
        os << (i ? "," : "") << detail::number17(row[i]);
      os << "\r\n";
    }
    written.push_back(file.string());
  }
  return written;
}

}  // namespace hslag
