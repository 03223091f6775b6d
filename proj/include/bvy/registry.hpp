#ifndef BVY_REGISTRY_HPP
#define BVY_REGISTRY_HPP

// Named parameter handles used by space descriptors and weights:
//   Orlicz functions   "power_orlicz:p", "sum_power_orlicz:p1,p2"
//   variable exponents "log_holder_exponent:r_inf,c"
//   weights            "const:c", "power:a" (alias "power_weight:a"), "log:b"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bvy/point.hpp"

namespace bvy {

namespace detail {

inline std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
        throw contract_error("");
    } catch (const std::exception&) {
      throw contract_error("cannot parse number '" + item + "' in " + what);
    }
  }
  return out;
}

inline std::pair<std::string, std::vector<double>> split_handle(const std::string& handle) {
  const auto colon = handle.find(':');
  if (colon == std::string::npos) return {handle, {}};
  return {handle.substr(0, colon), parse_numbers(handle.substr(colon + 1), handle)};
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Phi(t) = sum_i t^{p_i}. Lower type min p_i, upper type max p_i.
struct OrliczFunction {
  std::vector<double> powers{2.0};

  double operator()(double t) const {
    double s = 0.0;
    for (double p : powers) s += std::pow(t, p);
    return s;
  }
  double lower_type() const { return *std::min_element(powers.begin(), powers.end()); }
  double upper_type() const { return *std::max_element(powers.begin(), powers.end()); }

  /// t -> Phi(t^p).
  OrliczFunction compose_power(double p) const {
    OrliczFunction g = *this;
    for (double& e : g.powers) e *= p;
    return g;
  }

  std::string handle() const {
    std::string s = powers.size() == 1 ? "power_orlicz:" : "sum_power_orlicz:";
    for (std::size_t i = 0; i < powers.size(); ++i) {
      if (i) s += ",";
      s += detail::format_number(powers[i]);
    }
    return s;
  }

  static OrliczFunction parse(const std::string& handle) {
    auto [name, args] = detail::split_handle(handle);
    OrliczFunction f;
    if (name == "power_orlicz") {
      require(args.size() == 1, "power_orlicz expects one exponent");
    } else if (name == "sum_power_orlicz") {
      require(!args.empty(), "sum_power_orlicz expects exponents");
    } else {
      throw contract_error("unknown Orlicz handle '" + handle + "'");
    }
    for (double p : args) require(p > 0.0, "Orlicz exponents must be positive");
    f.powers = args;
    return f;
  }
};

/// r(x) = r_inf + c / log(e + |x|): globally log-Hoelder continuous.
struct ExponentFunction {
  double r_inf = 2.0;
  double c = 0.0;

  double operator()(const Point& x) const { return r_inf + c / std::log(M_E + norm(x)); }
  /// ess inf over R^n.
  double lower() const { return c >= 0.0 ? r_inf : r_inf + c; }
  /// ess sup over R^n.
  double upper() const { return c >= 0.0 ? r_inf + c : r_inf; }
  ExponentFunction scaled(double p) const { return {r_inf * p, c * p}; }

  std::string handle() const {
    return "log_holder_exponent:" + detail::format_number(r_inf) + "," +
           detail::format_number(c);
  }

  static ExponentFunction parse(const std::string& handle) {
    auto [name, args] = detail::split_handle(handle);
    if (name == "const_exponent") {
      require(args.size() == 1, "const_exponent expects one value");
      return {args[0], 0.0};
    }
    require(name == "log_holder_exponent", "unknown exponent handle '" + handle + "'");
    require(args.size() == 2, "log_holder_exponent expects r_inf,c");
    ExponentFunction r{args[0], args[1]};
    require(r.lower() > 0.0, "variable exponent must stay positive");
    return r;
  }
};

/// Positive weight from the registry.
struct Weight {
  enum class Kind { constant, power, log };
  Kind kind = Kind::constant;
  double param = 1.0;

  double operator()(const Point& x) const {
    switch (kind) {
      case Kind::constant: return param;
      case Kind::power: return std::pow(norm(x), param);
      case Kind::log: return std::pow(std::log(M_E + norm(x)), param);
    }
    return param;
  }

  std::string handle() const {
    switch (kind) {
      case Kind::constant: return "const:" + detail::format_number(param);
      case Kind::power: return "power:" + detail::format_number(param);
      case Kind::log: return "log:" + detail::format_number(param);
    }
    return {};
  }

  static Weight constant(double c = 1.0) { return {Kind::constant, c}; }
  static Weight power(double a) { return {Kind::power, a}; }
  static Weight log(double b) { return {Kind::log, b}; }

  static Weight parse(const std::string& handle) {
    auto [name, args] = detail::split_handle(handle);
    require(args.size() == 1, "weight handle '" + handle + "' expects one parameter");
    if (name == "const") {
      require(args[0] > 0.0, "constant weight must be positive");
      return constant(args[0]);
    }
    if (name == "power" || name == "power_weight") return power(args[0]);
    if (name == "log") return log(args[0]);
    throw contract_error("unknown weight handle '" + handle + "'");
  }
};

}  // namespace bvy

#endif  // BVY_REGISTRY_HPP
