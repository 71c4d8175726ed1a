#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace gpsm {

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// One experiment record.  Measured values live in `values`; `wall_ms` is
// excluded from the deterministic payload.
struct Record {
  std::string suite;
  std::string name;
  nlohmann::json values;
  double tolerance = 0.0;
  bool pass = true;
  double wall_ms = 0.0;
};

struct Report {
  static constexpr const char* schema = "gpsm-report/1";

  nlohmann::json config;
  std::string config_hash;
  std::vector<Record> records;

  bool all_pass() const {
    for (const Record& r : records)
      if (!r.pass) return false;
    return true;
  }

  nlohmann::json record_json(const Record& r, bool include_time) const {
    nlohmann::json j{{"schema", schema},       {"config_hash", config_hash},
                     {"suite", r.suite},       {"case", r.name},
                     {"values", r.values},     {"tolerance", r.tolerance},
                     {"pass", r.pass}};
    if (include_time) j["wall_ms"] = r.wall_ms;
    return j;
  }

  // Deterministic payload: fixed key order (nlohmann objects sort keys),
  // timestamps stripped.
  std::string payload() const {
    std::string out;
    for (const Record& r : records) out += record_json(r, false).dump() + "\n";
    return out;
  }

  void write_jsonl(std::ostream& os) const {
    for (const Record& r : records) os << record_json(r, true).dump() << "\n";
  }

  void write_csv(std::ostream& os) const {
    os << "suite,case,metric,value,tolerance,pass,wall_ms\n";
    for (const Record& r : records) {
      for (auto it = r.values.begin(); it != r.values.end(); ++it) {
        if (!it.value().is_number()) continue;
        os << r.suite << "," << r.name << "," << it.key() << ","
           << it.value().dump() << "," << r.tolerance << ","
           << (r.pass ? 1 : 0) << "," << r.wall_ms << "\n";
      }
    }
  }
};

}  // namespace gpsm
