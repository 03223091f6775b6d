#ifndef BVY_SPACES_HPP
#define BVY_SPACES_HPP

// Quasi-norms of the eight concrete ball Banach function spaces, evaluated
// on sampled non-negative fields, and the convexification X -> X^p.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "bvy/grid.hpp"
#include "bvy/registry.hpp"

namespace bvy {

struct Lebesgue {
  double p = 2.0;
};

struct WeightedLebesgue {
  double p = 2.0;
  Weight weight{};
};

struct Lorentz {
  double r = 2.0;
  double tau = 2.0;
};

struct Orlicz {
  OrliczFunction phi{};
};

/// Iterated norm, axis 0 innermost. One exponent per axis.
struct MixedNorm {
  std::vector<double> r{2.0};
};

struct VariableLebesgue {
  ExponentFunction r{};
};

/// Finite ball family used to approximate the Morrey supremum: centers on
/// every `center_stride`-th node per axis, radii geometric with ratio
/// `radius_ratio` from the smallest cell width to 2 * coverage_radius.
struct MorreyBallFamily {
  int center_stride = 4;
  double radius_ratio = 1.1;
};

struct Morrey {
  double r = 2.0;
  double alpha = 2.0;
  MorreyBallFamily family{};
};

struct OrliczSlice {
  OrliczFunction phi{};
  double r = 2.0;
  double t = 1.0;
};

using SpaceSpec = std::variant<Lebesgue, WeightedLebesgue, Lorentz, Orlicz, MixedNorm,
                               VariableLebesgue, Morrey, OrliczSlice>;

inline std::string space_name(const SpaceSpec& s) {
  static const char* names[] = {"lebesgue", "weighted_lebesgue", "lorentz",  "orlicz",
                                "mixed_norm", "variable_lebesgue", "morrey", "orlicz_slice"};
  return names[s.index()];
}

// ---------------------------------------------------------------------------
// Descriptor round trip (name + string parameters).

struct SpaceDescriptor {
  std::string type;
  std::map<std::string, std::string> params;
};

namespace detail {

inline double get_number(const SpaceDescriptor& d, const std::string& key) {
  auto it = d.params.find(key);
  if (it == d.params.end())
    throw contract_error("space '" + d.type + "' is missing parameter '" + key + "'");
  auto v = parse_numbers(it->second, d.type + "." + key);
  require(v.size() == 1, "space parameter '" + key + "' must be a single number");
  return v[0];
}

inline std::string get_string(const SpaceDescriptor& d, const std::string& key,
                              const std::string& fallback = {}) {
  auto it = d.params.find(key);
  if (it == d.params.end()) {
    if (fallback.empty())
      throw contract_error("space '" + d.type + "' is missing parameter '" + key + "'");
    return fallback;
  }
  return it->second;
}

}  // namespace detail

inline void validate(const SpaceSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Lebesgue> || std::is_same_v<T, WeightedLebesgue>) {
          require(s.p > 0.0, "Lebesgue exponent must be positive");
        } else if constexpr (std::is_same_v<T, Lorentz>) {
          require(s.r > 0.0 && s.tau > 0.0, "Lorentz parameters must be positive");
        } else if constexpr (std::is_same_v<T, Orlicz>) {
          require(!s.phi.powers.empty() && s.phi.lower_type() > 0.0, "invalid Orlicz function");
        } else if constexpr (std::is_same_v<T, MixedNorm>) {
          require(!s.r.empty(), "mixed norm needs exponents");
          for (double v : s.r) require(v > 0.0, "mixed-norm exponents must be positive");
        } else if constexpr (std::is_same_v<T, VariableLebesgue>) {
          require(s.r.lower() > 0.0, "variable exponent must stay positive");
        } else if constexpr (std::is_same_v<T, Morrey>) {
          require(s.r > 0.0 && s.r <= s.alpha, "Morrey requires 0 < r <= alpha");
          require(s.family.center_stride >= 1 && s.family.radius_ratio > 1.0,
                  "invalid Morrey ball family");
        } else if constexpr (std::is_same_v<T, OrliczSlice>) {
          require(!s.phi.powers.empty() && s.r > 0.0 && s.t > 0.0,
                  "invalid Orlicz-slice parameters");
        }
      },
      spec);
}

inline SpaceSpec parse_space(const SpaceDescriptor& d) {
  using detail::get_number;
  using detail::get_string;
  SpaceSpec spec;
  if (d.type == "lebesgue") {
    spec = Lebesgue{get_number(d, "p")};
  } else if (d.type == "weighted_lebesgue") {
    spec = WeightedLebesgue{get_number(d, "p"), Weight::parse(get_string(d, "weight"))};
  } else if (d.type == "lorentz") {
    spec = Lorentz{get_number(d, "r"), get_number(d, "tau")};
  } else if (d.type == "orlicz") {
    spec = Orlicz{OrliczFunction::parse(get_string(d, "phi"))};
  } else if (d.type == "mixed_norm") {
    spec = MixedNorm{detail::parse_numbers(get_string(d, "r"), "mixed_norm.r")};
  } else if (d.type == "variable_lebesgue") {
    spec = VariableLebesgue{ExponentFunction::parse(get_string(d, "exponent"))};
  } else if (d.type == "morrey") {
    Morrey m{get_number(d, "r"), get_number(d, "alpha")};
    if (d.params.count("center_stride"))
      m.family.center_stride = static_cast<int>(get_number(d, "center_stride"));
    if (d.params.count("radius_ratio")) m.family.radius_ratio = get_number(d, "radius_ratio");
    spec = m;
  } else if (d.type == "orlicz_slice") {
    spec = OrliczSlice{OrliczFunction::parse(get_string(d, "phi")), get_number(d, "r"),
                       get_number(d, "t")};
  } else {
    throw contract_error("unknown space type '" + d.type + "'");
  }
  validate(spec);
  return spec;
}

inline SpaceDescriptor describe(const SpaceSpec& spec) {
  using detail::format_number;
  SpaceDescriptor d;
  d.type = space_name(spec);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Lebesgue>) {
          d.params["p"] = format_number(s.p);
        } else if constexpr (std::is_same_v<T, WeightedLebesgue>) {
          d.params["p"] = format_number(s.p);
          d.params["weight"] = s.weight.handle();
        } else if constexpr (std::is_same_v<T, Lorentz>) {
          d.params["r"] = format_number(s.r);
          d.params["tau"] = format_number(s.tau);
        } else if constexpr (std::is_same_v<T, Orlicz>) {
          d.params["phi"] = s.phi.handle();
        } else if constexpr (std::is_same_v<T, MixedNorm>) {
          std::string v;
          for (std::size_t i = 0; i < s.r.size(); ++i)
            v += (i ? "," : "") + format_number(s.r[i]);
          d.params["r"] = v;
        } else if constexpr (std::is_same_v<T, VariableLebesgue>) {
          d.params["exponent"] = s.r.handle();
        } else if constexpr (std::is_same_v<T, Morrey>) {
          d.params["r"] = format_number(s.r);
          d.params["alpha"] = format_number(s.alpha);
          d.params["center_stride"] = format_number(s.family.center_stride);
          d.params["radius_ratio"] = format_number(s.family.radius_ratio);
        } else if constexpr (std::is_same_v<T, OrliczSlice>) {
          d.params["phi"] = s.phi.handle();
          d.params["r"] = format_number(s.r);
          d.params["t"] = format_number(s.t);
        }
      },
      spec);
  return d;
}

inline std::string to_string(const SpaceSpec& spec) {
  const auto d = describe(spec);
  std::string s = d.type + "(";
  bool first = true;
  for (const auto& [k, v] : d.params) {
    if (k == "center_stride" || k == "radius_ratio") continue;
    s += (first ? "" : ";") + k + "=" + v;
    first = false;
  }
  return s + ")";
}

// ---------------------------------------------------------------------------
// Evaluators.

namespace detail {

/// Smallest lambda with modular(lambda) <= 1 for a non-increasing modular,
/// by geometric bracketing followed by bisection in log scale.
template <class Modular>
double luxemburg(Modular&& modular, double guess) {
  require(guess > 0.0 && std::isfinite(guess), "luxemburg: invalid initial guess");
  double lo = guess, hi = guess;
  if (modular(guess) > 1.0) {
    int k = 0;
    do {
      lo = hi;
      hi *= 2.0;
      if (++k > 2000) throw numerical_error("Luxemburg bracket failure: modular never <= 1");
    } while (modular(hi) > 1.0);
  } else {
    int k = 0;
    do {
      hi = lo;
      lo *= 0.5;
      if (++k > 2000) throw numerical_error("Luxemburg bracket failure: modular never > 1");
    } while (modular(lo) <= 1.0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (modular(mid) > 1.0) lo = mid; else hi = mid;
  }
  return hi;
}

inline double max_value(const SampledField& g) {
  double m = 0.0;
  for (double v : g.values) m = std::max(m, std::abs(v));
  return m;
}

inline double lebesgue(const SampledField& g, double p) {
  const double scale = max_value(g);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    s += g.cell_measures[i] * std::pow(std::abs(g.values[i]) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

inline double orlicz(const OrliczFunction& phi, const double* mu, const double* v, std::size_t n,
                     double vmax) {
  if (vmax == 0.0) return 0.0;
  return luxemburg(
      [&](double lam) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          if (v[i] != 0.0) s += mu[i] * phi(std::abs(v[i]) / lam);
        return s;
      },
      vmax);
}

inline double lorentz(const SampledField& g, double r, double tau) {
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g.values[a]) > std::abs(g.values[b]);
  });
  const double scale = max_value(g);
  if (scale == 0.0) return 0.0;
  const double e = tau / r;
  double t_prev = 0.0, s = 0.0;
  for (std::size_t k : order) {
    const double v = std::abs(g.values[k]) / scale;
    if (v == 0.0) break;
    const double t = t_prev + g.cell_measures[k];
    s += std::pow(v, tau) * (std::pow(t, e) - std::pow(t_prev, e)) / e;
    t_prev = t;
  }
  return scale * std::pow(s, 1.0 / tau);
}

inline double mixed(const SampledField& g, const std::vector<double>& r) {
  if (!g.grid) throw contract_error("mixed norm requires a tensor-grid field");
  const GridSpec& grid = *g.grid;
  require(static_cast<int>(r.size()) == g.dim,
          "mixed norm: need one exponent per axis");
  const double scale = max_value(g);
  if (scale == 0.0) return 0.0;
  std::vector<double> cur(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) cur[i] = std::abs(g.values[i]) / scale;
  // cur is laid out as [outer][n] with the axis being reduced fastest; after
  // each reduction the next axis becomes the fastest index.
  std::size_t remaining = g.size();
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t n = static_cast<std::size_t>(grid.counts[axis]);
    const double h = grid.spacing(axis);
    const std::size_t outer = remaining / n;
    std::vector<double> next(outer, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += h * std::pow(cur[o * n + k], r[axis]);
      next[o] = std::pow(s, 1.0 / r[axis]);
    }
    cur.swap(next);
    remaining = outer;
  }
  return scale * cur.front();
}

}  // namespace detail

inline double norm(const SpaceSpec& spec, const SampledField& g);

namespace detail {

inline double morrey(const SampledField& g, const Morrey& m) {
  const double scale = max_value(g);
  if (scale == 0.0) return 0.0;
  // radii
  double hmin = std::numeric_limits<double>::infinity();
  if (g.grid) {
    for (int a = 0; a < g.dim; ++a) hmin = std::min(hmin, g.grid->spacing(a));
  } else {
    for (double mu : g.cell_measures) hmin = std::min(hmin, std::pow(mu, 1.0 / g.dim));
  }
  std::vector<double> radii;
  for (double rho = hmin; rho < 2.0 * g.coverage_radius * m.family.radius_ratio;
       rho *= m.family.radius_ratio)
    radii.push_back(std::min(rho, 2.0 * g.coverage_radius));
  // centers
  std::vector<std::size_t> centers;
  if (g.grid) {
    const auto& gs = *g.grid;
    const int s = m.family.center_stride;
    const int n0 = gs.counts[0], n1 = g.dim > 1 ? gs.counts[1] : 1;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const int i0 = static_cast<int>(idx % n0);
      const int i1 = static_cast<int>((idx / n0) % n1);
      const int i2 = static_cast<int>(idx / (static_cast<std::size_t>(n0) * n1));
      if (i0 % s == s / 2 && i1 % s == (n1 > 1 ? s / 2 : 0) &&
          i2 % s == (g.dim > 2 ? s / 2 : 0))
        centers.push_back(idx);
    }
  } else {
    for (std::size_t idx = 0; idx < g.size(); idx += m.family.center_stride)
      centers.push_back(idx);
  }
  const double ball_exp = 1.0 / m.alpha - 1.0 / m.r;
  std::vector<std::pair<double, double>> dist_mass(g.size());
  double best = 0.0;
  for (std::size_t c : centers) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = std::abs(g.values[i]) / scale;
      dist_mass[i] = {norm(g.nodes[i] - g.nodes[c]), g.cell_measures[i] * std::pow(v, m.r)};
    }
    std::sort(dist_mass.begin(), dist_mass.end());
    double acc = 0.0;
    std::size_t k = 0;
    for (double rho : radii) {
      while (k < dist_mass.size() && dist_mass[k].first <= rho) acc += dist_mass[k++].second;
      const double val = std::pow(ball_volume(g.dim, rho), ball_exp) * std::pow(acc, 1.0 / m.r);
      best = std::max(best, val);
    }
  }
  return scale * best;
}

// Indices of nodes in the closed ball B(x_c, t).
inline void ball_members(const SampledField& g, std::size_t c, double t,
                         std::vector<std::size_t>& out) {
  out.clear();
  const Point& xc = g.nodes[c];
  if (g.grid) {
    const auto& gs = *g.grid;
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) {
      const double h = gs.spacing(a);
      lo[a] = std::max(0, static_cast<int>(std::floor((xc[a] - t + gs.half_width) / h - 0.5)));
      hi[a] = std::min(gs.counts[a] - 1,
                       static_cast<int>(std::ceil((xc[a] + t + gs.half_width) / h - 0.5)));
    }
    const std::size_t n0 = gs.counts[0];
    const std::size_t n1 = g.dim > 1 ? gs.counts[1] : 1;
    for (int i2 = lo[2]; i2 <= hi[2]; ++i2)
      for (int i1 = lo[1]; i1 <= hi[1]; ++i1)
        for (int i0 = lo[0]; i0 <= hi[0]; ++i0) {
          const std::size_t idx = i0 + n0 * (i1 + n1 * i2);
          if (norm(g.nodes[idx] - xc) <= t) out.push_back(idx);
        }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (norm(g.nodes[i] - xc) <= t) out.push_back(i);
  }
}

inline double orlicz_slice(const SampledField& g, const OrliczSlice& s) {
  const double scale = max_value(g);
  if (scale == 0.0) return 0.0;
  std::map<double, double> indicator_norm;  // keyed by discrete ball measure
  std::vector<std::size_t> members;
  std::vector<double> mu, v;
  double total = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) {
    ball_members(g, c, s.t, members);
    mu.clear();
    v.clear();
    double measure = 0.0, vmax = 0.0;
    for (std::size_t i : members) {
      mu.push_back(g.cell_measures[i]);
      v.push_back(std::abs(g.values[i]) / scale);
      measure += g.cell_measures[i];
      vmax = std::max(vmax, v.back());
    }
    if (vmax == 0.0) continue;
    auto it = indicator_norm.find(measure);
    if (it == indicator_norm.end()) {
      const double one = 1.0;
      it = indicator_norm.emplace(measure, orlicz(s.phi, &measure, &one, 1, 1.0)).first;
    }
    const double ratio = orlicz(s.phi, mu.data(), v.data(), mu.size(), vmax) / it->second;
    total += g.cell_measures[c] * std::pow(ratio, s.r);
  }
  return scale * std::pow(total, 1.0 / s.r);
}

}  // namespace detail

/// ||g||_X for the sampled field g (absolute values are taken).
inline double norm(const SpaceSpec& spec, const SampledField& g) {
  for (double v : g.values)
    if (!std::isfinite(v)) throw numerical_error("norm: non-finite field value");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Lebesgue>) {
          return detail::lebesgue(g, s.p);
        } else if constexpr (std::is_same_v<T, WeightedLebesgue>) {
          const double scale = detail::max_value(g);
          if (scale == 0.0) return 0.0;
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double w = s.weight(g.nodes[i]);
            if (!(w > 0.0) || !std::isfinite(w))
              throw contract_error("weighted norm: weight must be positive and finite at nodes");
            acc += g.cell_measures[i] * std::pow(std::abs(g.values[i]) / scale, s.p) * w;
          }
          return scale * std::pow(acc, 1.0 / s.p);
        } else if constexpr (std::is_same_v<T, Lorentz>) {
          return detail::lorentz(g, s.r, s.tau);
        } else if constexpr (std::is_same_v<T, Orlicz>) {
          std::vector<double> v(g.size());
          for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::abs(g.values[i]);
          return detail::orlicz(s.phi, g.cell_measures.data(), v.data(), v.size(),
                                detail::max_value(g));
        } else if constexpr (std::is_same_v<T, MixedNorm>) {
          return detail::mixed(g, s.r);
        } else if constexpr (std::is_same_v<T, VariableLebesgue>) {
          const double vmax = detail::max_value(g);
          if (vmax == 0.0) return 0.0;
          std::vector<double> expo(g.size());
          for (std::size_t i = 0; i < g.size(); ++i) expo[i] = s.r(g.nodes[i]);
          return detail::luxemburg(
              [&](double lam) {
                double acc = 0.0;
                for (std::size_t i = 0; i < g.size(); ++i)
                  if (g.values[i] != 0.0)
                    acc += g.cell_measures[i] * std::pow(std::abs(g.values[i]) / lam, expo[i]);
                return acc;
              },
              vmax);
        } else if constexpr (std::is_same_v<T, Morrey>) {
          return detail::morrey(g, s);
        } else {
          return detail::orlicz_slice(g, s);
        }
      },
      spec);
}

/// X^p, the space with ||f||_{X^p} = || |f|^p ||_X^{1/p}.
inline SpaceSpec convexify(const SpaceSpec& spec, double p) {
  require(p > 0.0, "convexify: p must be positive");
  return std::visit(
      [p](const auto& s) -> SpaceSpec {
        using T = std::decay_t<decltype(s)>;
        T out = s;
        if constexpr (std::is_same_v<T, Lebesgue> || std::is_same_v<T, WeightedLebesgue>) {
          out.p = s.p * p;
        } else if constexpr (std::is_same_v<T, Lorentz>) {
          out.r = s.r * p;
          out.tau = s.tau * p;
        } else if constexpr (std::is_same_v<T, Orlicz>) {
          out.phi = s.phi.compose_power(p);
        } else if constexpr (std::is_same_v<T, MixedNorm>) {
          for (double& v : out.r) v *= p;
        } else if constexpr (std::is_same_v<T, VariableLebesgue>) {
          out.r = s.r.scaled(p);
        } else if constexpr (std::is_same_v<T, Morrey>) {
          out.r = s.r * p;
          out.alpha = s.alpha * p;
        } else {
          out.phi = s.phi.compose_power(p);
          out.r = s.r * p;
        }
        return out;
      },
      spec);
}

/// Evaluates the norm of the sampled gradient magnitude |grad f| on `grid`.
template <class Field>
double gradient_norm(const SpaceSpec& spec, const Field& f, const GridSpec& grid) {
  return norm(spec, sample(grid, [&](const Point& x) { return f.grad_norm(x); }));
}

}  // namespace bvy

#endif  // BVY_SPACES_HPP
