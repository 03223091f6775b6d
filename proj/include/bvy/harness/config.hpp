#ifndef BVY_HARNESS_CONFIG_HPP
#define BVY_HARNESS_CONFIG_HPP

// YAML experiment configuration.
//
//   seed: 7
//   defaults:
//     quadrature: {grid: {dim: 1, half_width: 3, counts: [400]}, directions: 64,
//                  ray: {tol: 1e-10, scan_ratio: 1.05, start_fraction: 1e-6, r_max: .inf}}
//     schedule: {anchor: 0, ratio: 2, count: 32, first: -12}
//     tolerances: {lower_bound_slack: 0.03, limit_tolerance: 0.01, limit_window: 4,
//                  limit_band: 0.02, limit_max_steps: 40}
//   functions:
//     bump: {factory: bump, dim: 1, params: {center: 0, radius: 1}, dilate: 1, scale: 1}
//   spaces:
//     L2: {type: lebesgue, p: 2}
//   experiments:
//     - name: limit-l2
//       function: bump          # or a list: cartesian product with spaces/cases
//       space: L2               # or a list
//       gamma: 2
//       q: 2                    # or cases: [[gamma, q], ...]
//       checks: [limit, lower_bound]
//
// Per-experiment quadrature/schedule/tolerances blocks override the
// defaults field by field.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "bvy/functional.hpp"
#include "bvy/spaces.hpp"
#include "bvy/testbench.hpp"

namespace bvy::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Check { sup, limit, lower_bound, gn_type1, gn_type2, nu_gamma, stopping_time };

inline const char* to_string(Check c) {
  switch (c) {
    case Check::sup: return "sup";
    case Check::limit: return "limit";
    case Check::lower_bound: return "lower_bound";
    case Check::gn_type1: return "gn_type1";
    case Check::gn_type2: return "gn_type2";
    case Check::nu_gamma: return "nu_gamma";
    case Check::stopping_time: return "stopping_time";
  }
  return "?";
}

struct FunctionDescriptor {
  std::string name;
  std::string factory = "bump";
  int dim = 1;
  FactoryParams params;
  double dilate = 1.0;
  double scale = 1.0;

  ScalarField build() const {
    ScalarField f = make_field(factory, dim, params);
    if (dilate != 1.0) f = bvy::dilate(f, dilate);
    if (scale != 1.0) f = bvy::scale(f, scale);
    return f;
  }
};

struct Tolerances {
  double lower_bound_slack = 0.03;
  double limit_tolerance = 0.01;  // relative spread over the window
  int limit_window = 4;
  int limit_max_steps = 40;
  double limit_band = 0.02;       // |limit / target - 1| allowed for a pass
  double residual = 1e-8;         // stopping-time equation residual
  double identity = 1e-12;        // nu_gamma definition identity
};

struct GNConfig {
  double s = 0.5;
  double p = std::numeric_limits<double>::infinity();
  double s0 = 0.0;
  double q0 = 4.0;
};

struct StoppingConfig {
  int random_fields = 0;  // extra seeded random non-negative fields
};

struct Experiment {
  std::string name;
  FunctionDescriptor function;
  std::string space_label;
  SpaceSpec space;
  FunctionalParams params;
  QuadratureSpec quad;
  Tolerances tol;
  GNConfig gn;
  StoppingConfig stopping;
  double nu_lambda = 0.0;  // <= 0: characteristic level
  std::vector<Check> checks;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string hash;  // FNV-1a of the source text
  std::vector<Experiment> experiments;
};

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& field) {
  const auto m = n.Mark();
  std::string s = "field '" + field + "'";
  if (m.line >= 0) s = "line " + std::to_string(m.line + 1) + ": " + s;
  return s;
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigError(where(n, field) + ": " + msg);
}

inline double as_double(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    fail(n, field, "expected a number");
  }
}

inline int as_int(const YAML::Node& n, const std::string& field) {
  const double v = as_double(n, field);
  if (v != std::floor(v)) fail(n, field, "expected an integer");
  return static_cast<int>(v);
}

inline std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) fail(n, field, "expected a string");
  return n.as<std::string>();
}

inline std::vector<double> as_numbers(const YAML::Node& n, const std::string& field) {
  std::vector<double> v;
  if (n.IsSequence()) {
    for (const auto& e : n) v.push_back(as_double(e, field));
  } else {
    v.push_back(as_double(n, field));
  }
  return v;
}

inline std::vector<std::string> as_strings(const YAML::Node& n, const std::string& field) {
  std::vector<std::string> v;
  if (n.IsSequence()) {
    for (const auto& e : n) v.push_back(as_string(e, field));
  } else {
    v.push_back(as_string(n, field));
  }
  return v;
}

template <class T>
void known_keys(const YAML::Node& n, const std::string& block, std::initializer_list<T> keys) {
  if (!n.IsMap()) fail(n, block, "expected a mapping");
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    bool ok = false;
    for (const auto& want : keys) ok = ok || k == want;
    if (!ok) fail(kv.first, block + "." + k, "unknown key");
  }
}

inline void read_quadrature(const YAML::Node& n, QuadratureSpec& q) {
  if (!n) return;
  known_keys(n, "quadrature", {"grid", "directions", "ray"});
  if (const auto g = n["grid"]) {
    known_keys(g, "quadrature.grid", {"dim", "half_width", "counts"});
    if (g["dim"]) q.grid.dim = as_int(g["dim"], "grid.dim");
    if (q.grid.dim < 1 || q.grid.dim > 3) fail(g, "grid.dim", "dimension must be 1, 2 or 3");
    if (g["half_width"]) q.grid.half_width = as_double(g["half_width"], "grid.half_width");
    if (!(q.grid.half_width > 0.0)) fail(g, "grid.half_width", "must be positive");
    if (g["counts"]) {
      const auto c = as_numbers(g["counts"], "grid.counts");
      for (int a = 0; a < kMaxDim; ++a) {
        const double v = c.size() == 1 ? c[0] : (a < static_cast<int>(c.size()) ? c[a] : 1.0);
        if (!(v >= 1.0) || v != std::floor(v)) fail(g["counts"], "grid.counts", "counts must be positive integers");
        q.grid.counts[a] = static_cast<int>(v);
      }
    }
  }
  if (n["directions"]) {
    q.directions = as_int(n["directions"], "quadrature.directions");
    if (q.directions < 1) fail(n["directions"], "quadrature.directions", "must be positive");
  }
  if (const auto r = n["ray"]) {
    known_keys(r, "quadrature.ray", {"tol", "scan_ratio", "start_fraction", "r_max"});
    if (r["tol"]) q.ray.tol = as_double(r["tol"], "ray.tol");
    if (r["scan_ratio"]) q.ray.scan_ratio = as_double(r["scan_ratio"], "ray.scan_ratio");
    if (r["start_fraction"]) q.ray.start_fraction = as_double(r["start_fraction"], "ray.start_fraction");
    if (r["r_max"]) q.ray.r_max = as_double(r["r_max"], "ray.r_max");
    if (!(q.ray.tol > 0.0)) fail(r, "ray.tol", "must be positive");
    if (!(q.ray.scan_ratio > 1.0)) fail(r, "ray.scan_ratio", "must exceed 1");
    if (!(q.ray.r_max > 0.0)) fail(r, "ray.r_max", "must be positive");
  }
}

inline void read_schedule(const YAML::Node& n, LambdaSchedule& s) {
  if (!n) return;
  known_keys(n, "schedule", {"anchor", "ratio", "count", "first"});
  if (n["anchor"]) s.anchor = as_double(n["anchor"], "schedule.anchor");
  if (n["ratio"]) s.ratio = as_double(n["ratio"], "schedule.ratio");
  if (n["count"]) s.count = as_int(n["count"], "schedule.count");
  if (n["first"]) s.first = as_int(n["first"], "schedule.first");
  if (!(s.ratio > 1.0)) fail(n, "schedule.ratio", "must exceed 1");
  if (s.count < 1) fail(n, "schedule.count", "must be positive");
}

inline void read_tolerances(const YAML::Node& n, Tolerances& t) {
  if (!n) return;
  known_keys(n, "tolerances", {"lower_bound_slack", "limit_tolerance", "limit_window",
                               "limit_max_steps", "limit_band", "residual", "identity"});
  if (n["lower_bound_slack"]) t.lower_bound_slack = as_double(n["lower_bound_slack"], "tolerances.lower_bound_slack");
  if (n["limit_tolerance"]) t.limit_tolerance = as_double(n["limit_tolerance"], "tolerances.limit_tolerance");
  if (n["limit_window"]) t.limit_window = as_int(n["limit_window"], "tolerances.limit_window");
  if (n["limit_max_steps"]) t.limit_max_steps = as_int(n["limit_max_steps"], "tolerances.limit_max_steps");
  if (n["limit_band"]) t.limit_band = as_double(n["limit_band"], "tolerances.limit_band");
  if (n["residual"]) t.residual = as_double(n["residual"], "tolerances.residual");
  if (n["identity"]) t.identity = as_double(n["identity"], "tolerances.identity");
  if (t.limit_window < 2 || t.limit_max_steps < t.limit_window)
    fail(n, "tolerances.limit_window", "need 2 <= window <= max_steps");
}

inline FunctionDescriptor read_function(const std::string& name, const YAML::Node& n) {
  known_keys(n, "functions." + name, {"factory", "dim", "params", "dilate", "scale"});
  FunctionDescriptor d;
  d.name = name;
  if (n["factory"]) d.factory = as_string(n["factory"], "factory");
  if (n["dim"]) d.dim = as_int(n["dim"], "dim");
  if (n["dilate"]) d.dilate = as_double(n["dilate"], "dilate");
  if (n["scale"]) d.scale = as_double(n["scale"], "scale");
  if (const auto p = n["params"]) {
    if (!p.IsMap()) fail(p, "params", "expected a mapping");
    for (const auto& kv : p) d.params[kv.first.as<std::string>()] = as_numbers(kv.second, "params");
  }
  try {
    (void)d.build();
  } catch (const std::exception& e) {
    fail(n, "functions." + name, e.what());
  }
  return d;
}

inline SpaceSpec read_space(const std::string& name, const YAML::Node& n) {
  if (!n.IsMap() || !n["type"]) fail(n, "spaces." + name, "expected a mapping with a 'type'");
  SpaceDescriptor d;
  for (const auto& kv : n) {
    const std::string k = kv.first.as<std::string>();
    if (k == "type") {
      d.type = as_string(kv.second, "type");
      continue;
    }
    if (kv.second.IsSequence()) {
      std::string joined;
      for (const auto& e : kv.second) joined += (joined.empty() ? "" : ",") + as_string(e, k);
      d.params[k] = joined;
    } else {
      d.params[k] = as_string(kv.second, k);
    }
  }
  try {
    return parse_space(d);
  } catch (const std::exception& e) {
    fail(n, "spaces." + name, e.what());
  }
}

inline Check read_check(const YAML::Node& n) {
  const std::string s = as_string(n, "checks");
  for (Check c : {Check::sup, Check::limit, Check::lower_bound, Check::gn_type1, Check::gn_type2,
                  Check::nu_gamma, Check::stopping_time})
    if (s == to_string(c)) return c;
  fail(n, "checks", "unknown check '" + s + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig cfg;
  cfg.hash = fnv1a_hex(text);
  if (root.IsNull()) return cfg;
  known_keys(root, "root", {"seed", "defaults", "functions", "spaces", "experiments"});
  if (root["seed"]) {
    try {
      cfg.seed = root["seed"].as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(root["seed"], "seed", "expected an unsigned integer");
    }
  }

  QuadratureSpec quad;
  LambdaSchedule sched;
  Tolerances tol;
  if (const auto d = root["defaults"]) {
    known_keys(d, "defaults", {"quadrature", "schedule", "tolerances"});
    read_quadrature(d["quadrature"], quad);
    read_schedule(d["schedule"], sched);
    read_tolerances(d["tolerances"], tol);
  }

  std::map<std::string, FunctionDescriptor> functions;
  if (const auto fs = root["functions"]) {
    if (!fs.IsMap()) fail(fs, "functions", "expected a mapping");
    for (const auto& kv : fs) {
      const std::string name = kv.first.as<std::string>();
      functions[name] = read_function(name, kv.second);
    }
  }
  std::map<std::string, SpaceSpec> spaces;
  if (const auto ss = root["spaces"]) {
    if (!ss.IsMap()) fail(ss, "spaces", "expected a mapping");
    for (const auto& kv : ss) {
      const std::string name = kv.first.as<std::string>();
      spaces[name] = read_space(name, kv.second);
    }
  }

  const auto ex = root["experiments"];
  if (!ex) return cfg;
  if (!ex.IsSequence()) fail(ex, "experiments", "expected a list");
  for (const auto& e : ex) {
    known_keys(e, "experiments[]", {"name", "function", "space", "gamma", "q", "cases", "checks",
                                    "quadrature", "schedule", "tolerances", "gn", "nu_lambda",
                                    "stopping"});
    Experiment base;
    base.name = e["name"] ? as_string(e["name"], "name") : "experiment";
    base.quad = quad;
    read_quadrature(e["quadrature"], base.quad);
    base.params.schedule = sched;
    read_schedule(e["schedule"], base.params.schedule);
    base.tol = tol;
    read_tolerances(e["tolerances"], base.tol);
    if (const auto g = e["gn"]) {
      known_keys(g, "gn", {"s", "p", "s0", "q0"});
      if (g["s"]) base.gn.s = as_double(g["s"], "gn.s");
      if (g["p"]) base.gn.p = as_double(g["p"], "gn.p");
      if (g["s0"]) base.gn.s0 = as_double(g["s0"], "gn.s0");
      if (g["q0"]) base.gn.q0 = as_double(g["q0"], "gn.q0");
    }
    if (e["nu_lambda"]) base.nu_lambda = as_double(e["nu_lambda"], "nu_lambda");
    if (const auto s = e["stopping"]) {
      known_keys(s, "stopping", {"random_fields"});
      if (s["random_fields"]) base.stopping.random_fields = as_int(s["random_fields"], "stopping.random_fields");
    }
    if (const auto c = e["checks"]) {
      if (!c.IsSequence()) fail(c, "checks", "expected a list");
      for (const auto& item : c) base.checks.push_back(read_check(item));
    }

    if (!e["function"]) fail(e, "function", "missing");
    if (!e["space"]) fail(e, "space", "missing");
    const auto fnames = as_strings(e["function"], "function");
    const auto snames = as_strings(e["space"], "space");
    std::vector<std::pair<double, double>> cases;
    if (const auto cs = e["cases"]) {
      if (!cs.IsSequence()) fail(cs, "cases", "expected a list of [gamma, q] pairs");
      for (const auto& c : cs) {
        const auto v = as_numbers(c, "cases");
        if (v.size() != 2) fail(c, "cases", "expected [gamma, q]");
        cases.emplace_back(v[0], v[1]);
      }
    } else {
      if (!e["gamma"]) fail(e, "gamma", "missing");
      const double q = e["q"] ? as_double(e["q"], "q") : 1.0;
      cases.emplace_back(as_double(e["gamma"], "gamma"), q);
    }
    const bool expand = fnames.size() * snames.size() * cases.size() > 1;
    for (const auto& fn : fnames) {
      auto fit = functions.find(fn);
      if (fit == functions.end()) fail(e["function"], "function", "unknown function '" + fn + "'");
      for (const auto& sn : snames) {
        auto sit = spaces.find(sn);
        if (sit == spaces.end()) fail(e["space"], "space", "unknown space '" + sn + "'");
        for (const auto& [gamma, q] : cases) {
          Experiment x = base;
          x.function = fit->second;
          x.space_label = sn;
          x.space = sit->second;
          if (gamma == 0.0) fail(e, "gamma", "gamma = 0 is rejected");
          try {
            x.params = FunctionalParams(gamma, q, base.params.schedule);
          } catch (const std::exception& err) {
            fail(e, "gamma", err.what());
          }
          if (x.function.dim != x.quad.grid.dim)
            fail(e, "function", "function dimension differs from the grid dimension");
          if (const auto* m = std::get_if<MixedNorm>(&x.space))
            if (static_cast<int>(m->r.size()) != x.quad.grid.dim)
              fail(e["space"], "space", "mixed-norm exponent count differs from the grid dimension");
          if (expand) {
            std::ostringstream os;
            os.precision(6);
            os << base.name << "/" << fn << "/" << sn << "/g" << gamma << "q" << q;
            x.name = os.str();
          }
          cfg.experiments.push_back(std::move(x));
        }
      }
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bvy::harness

#endif  // BVY_HARNESS_CONFIG_HPP
