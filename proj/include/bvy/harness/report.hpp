#ifndef BVY_HARNESS_REPORT_HPP
#define BVY_HARNESS_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace bvy::harness {

enum class Status { pass, fail, exploratory, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::exploratory: return "exploratory";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Status parse_status(const std::string& s) {
  if (s == "pass") return Status::pass;
  if (s == "fail") return Status::fail;
  if (s == "exploratory") return Status::exploratory;
  if (s == "inconclusive") return Status::inconclusive;
  throw std::invalid_argument("unknown status '" + s + "'");
}

/// One check of one experiment. `values` keeps insertion order; the
/// conventional keys are value, target, ratio and tolerance.
struct ReportRecord {
  std::string config_hash;
  std::size_t index = 0;  // experiment index in the config
  std::string experiment;
  std::string check;
  std::string function;
  std::string space;
  double gamma = 0.0;
  double q = 0.0;
  Status status = Status::pass;
  bool theorem_labeled = false;
  std::string hypothesis;
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<std::pair<double, double>> curve;  // (lambda, functional)
  std::string message;
  double wall_time = 0.0;

  void set(const std::string& key, double v) {
    for (auto& kv : values)
      if (kv.first == key) {
        kv.second = v;
        return;
      }
    values.emplace_back(key, v);
  }
  double get(const std::string& key, double fallback = std::nan("")) const {
    for (const auto& kv : values)
      if (kv.first == key) return kv.second;
    return fallback;
  }
  void flag(const std::string& key, bool v) { flags.emplace_back(key, v); }
  bool counts_for_exit() const { return theorem_labeled && status == Status::fail; }
};

namespace detail {

inline nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline double read_number(const nlohmann::ordered_json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return std::nan("");
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ReportRecord& r, bool with_time = true) {
  nlohmann::ordered_json j;
  j["config_hash"] = r.config_hash;
  j["index"] = r.index;
  j["experiment"] = r.experiment;
  j["check"] = r.check;
  j["function"] = r.function;
  j["space"] = r.space;
  j["gamma"] = detail::number(r.gamma);
  j["q"] = detail::number(r.q);
  j["status"] = to_string(r.status);
  j["theorem_labeled"] = r.theorem_labeled;
  j["hypothesis"] = r.hypothesis;
  auto& v = j["values"] = nlohmann::ordered_json::object();
  for (const auto& [k, x] : r.values) v[k] = detail::number(x);
  auto& f = j["flags"] = nlohmann::ordered_json::object();
  for (const auto& [k, x] : r.flags) f[k] = x;
  j["message"] = r.message;
  if (with_time) j["wall_time"] = r.wall_time;
  return j;
}

inline ReportRecord from_json(const nlohmann::ordered_json& j) {
  ReportRecord r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.index = j.at("index").get<std::size_t>();
  r.experiment = j.at("experiment").get<std::string>();
  r.check = j.at("check").get<std::string>();
  r.function = j.at("function").get<std::string>();
  r.space = j.at("space").get<std::string>();
  r.gamma = detail::read_number(j.at("gamma"));
  r.q = detail::read_number(j.at("q"));
  r.status = parse_status(j.at("status").get<std::string>());
  r.theorem_labeled = j.at("theorem_labeled").get<bool>();
  r.hypothesis = j.at("hypothesis").get<std::string>();
  for (const auto& [k, x] : j.at("values").items()) r.values.emplace_back(k, detail::read_number(x));
  for (const auto& [k, x] : j.at("flags").items()) r.flags.emplace_back(k, x.get<bool>());
  r.message = j.at("message").get<std::string>();
  if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
  return r;
}

/// One JSON object per line.
inline void write_json_lines(std::ostream& os, const std::vector<ReportRecord>& records,
                             bool with_time = true) {
  for (const auto& r : records) os << to_json(r, with_time).dump() << '\n';
}

inline std::vector<ReportRecord> read_json_lines(std::istream& is) {
  std::vector<ReportRecord> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(from_json(nlohmann::ordered_json::parse(line)));
  return out;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// experiment,check,space,gamma,q,value,target,ratio,status: one row per check.
inline void write_csv_summary(std::ostream& os, const std::vector<ReportRecord>& records) {
  os << "experiment,check,space,gamma,q,value,target,ratio,status\n";
  for (const auto& r : records) {
    os << detail::csv_field(r.experiment) << ',' << r.check << ',' << detail::csv_field(r.space) << ','
       << detail::csv_number(r.gamma) << ',' << detail::csv_number(r.q) << ','
       << detail::csv_number(r.get("value")) << ',' << detail::csv_number(r.get("target")) << ','
       << detail::csv_number(r.get("ratio")) << ',' << to_string(r.status) << '\n';
  }
}

/// experiment,check,lambda,value for every recorded lambda curve.
inline void write_curves(std::ostream& os, const std::vector<ReportRecord>& records) {
  os << "experiment,check,lambda,value\n";
  for (const auto& r : records)
    for (const auto& [l, v] : r.curve)
      os << detail::csv_field(r.experiment) << ',' << r.check << ',' << detail::csv_number(l) << ','
         << detail::csv_number(v) << '\n';
}

}  // namespace bvy::harness

#endif  // BVY_HARNESS_REPORT_HPP
