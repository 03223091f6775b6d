#ifndef BVY_TESTBENCH_HPP
#define BVY_TESTBENCH_HPP

// Analytic test functions of class C^1 with compactly supported gradient.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bvy/point.hpp"

namespace bvy {

enum class SmoothnessClass {
  smooth_compact,       // f in C_c^infty
  smooth_grad_compact,  // f in C^1, |grad f| in C_c
};

inline const char* to_string(SmoothnessClass c) {
  return c == SmoothnessClass::smooth_compact ? "smooth_compact"
                                              : "smooth_grad_compact";
}

/// An immutable analytic scalar field on R^n with an exact gradient and
/// certified bounds.
///
/// `grad_support_radius` bounds the support of the gradient: |grad f(x)| = 0
/// whenever |x| > grad_support_radius, so f is constant on every ray once the
/// ray leaves that ball. `sup_abs` and `grad_bound` are upper bounds for
/// sup|f| and sup|grad f|; the level-set solver prunes rays with them, so they
/// must never underestimate.
struct ScalarField {
  int dim = 1;
  std::function<double(const Point&)> eval;
  std::function<Point(const Point&)> grad;
  double grad_support_radius = 1.0;
  double sup_abs = 0.0;
  double grad_bound = 0.0;
  SmoothnessClass class_tag = SmoothnessClass::smooth_compact;
  std::string description;

  double operator()(const Point& x) const { return eval(x); }
  double grad_norm(const Point& x) const { return norm(grad(x)); }
};

namespace detail {

// exp(-1/(1-t^2)) on |t| < 1, the classical mollifier profile.
inline double mollifier(double t) {
  const double s = t * t;
  return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
}

inline double mollifier_derivative(double t) {
  const double s = t * t;
  if (s >= 1.0) return 0.0;
  const double d = 1.0 - s;
  return std::exp(-1.0 / d) * (-2.0 * t / (d * d));
}

// C^infty transition 0 -> 1 on [0, 1]: 1/(1 + exp(1/t - 1/(1-t))).
inline double smooth_ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double z = 1.0 / t - 1.0 / (1.0 - t);
  if (z > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(z));
}

inline double smooth_ramp_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double z = 1.0 / t - 1.0 / (1.0 - t);
  if (std::abs(z) > 700.0) return 0.0;
  const double psi = 1.0 / (1.0 + std::exp(z));
  return psi * (1.0 - psi) * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)));
}

// Max of |g| over [lo, hi] for a smooth unimodal-ish profile: dense scan then
// golden refinement around the best sample, inflated by a tiny safety margin.
template <class F>
double profile_max(F g, double lo, double hi) {
  constexpr int kSamples = 20000;
  double best = 0.0;
  int best_i = 0;
  for (int i = 0; i <= kSamples; ++i) {
    const double v = std::abs(g(lo + (hi - lo) * i / kSamples));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  double a = lo + (hi - lo) * std::max(0, best_i - 1) / kSamples;
  double b = lo + (hi - lo) * std::min(kSamples, best_i + 1) / kSamples;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = b - phi * (b - a);
    const double d = a + phi * (b - a);
    if (std::abs(g(c)) > std::abs(g(d))) b = d; else a = c;
  }
  best = std::max(best, std::abs(g(0.5 * (a + b))));
  return best * (1.0 + 1e-9);
}

inline double mollifier_slope_max() {
  static const double value =
      profile_max([](double t) { return mollifier_derivative(t); }, 0.0, 1.0);
  return value;
}

inline double ramp_slope_max() {
  static const double value =
      profile_max([](double t) { return smooth_ramp_derivative(t); }, 0.0, 1.0);
  return value;
}

}  // namespace detail

/// Radial bump amplitude * exp(-1/(1 - |x-center|^2/radius^2)) supported in
/// the ball B(center, radius).
inline ScalarField make_bump(int dim, const Point& center, double radius,
                             double amplitude = 1.0) {
  check_dim(dim);
  require(radius > 0.0, "make_bump: radius must be positive");
  ScalarField f;
  f.dim = dim;
  f.eval = [=](const Point& x) {
    const double rho = norm(x - center) / radius;
    return amplitude * detail::mollifier(rho);
  };
  f.grad = [=](const Point& x) {
    const Point d = x - center;
    const double s = dot(d, d) / (radius * radius);
    if (s >= 1.0) return Point{};
    const double den = 1.0 - s;
    const double c = -amplitude * std::exp(-1.0 / den) * 2.0 /
                     (radius * radius * den * den);
    return c * d;
  };
  f.grad_support_radius = norm(center) + radius;
  f.sup_abs = std::abs(amplitude) * std::exp(-1.0);
  f.grad_bound = std::abs(amplitude) * detail::mollifier_slope_max() / radius;
  f.class_tag = SmoothnessClass::smooth_compact;
  f.description = "bump";
  return f;
}

/// Product of one-dimensional mollifier profiles, one per axis.
inline ScalarField make_tensor_bump(int dim, const Point& center,
                                    const Point& radii, double amplitude = 1.0) {
  check_dim(dim);
  for (int i = 0; i < dim; ++i)
    require(radii[i] > 0.0, "make_tensor_bump: radii must be positive");
  ScalarField f;
  f.dim = dim;
  f.eval = [=](const Point& x) {
    double v = amplitude;
    for (int i = 0; i < dim; ++i)
      v *= detail::mollifier((x[i] - center[i]) / radii[i]);
    return v;
  };
  f.grad = [=](const Point& x) {
    Point phi{}, dphi{};
    for (int i = 0; i < dim; ++i) {
      const double t = (x[i] - center[i]) / radii[i];
      phi[i] = detail::mollifier(t);
      dphi[i] = detail::mollifier_derivative(t) / radii[i];
    }
    Point g{};
    for (int i = 0; i < dim; ++i) {
      double v = amplitude * dphi[i];
      for (int j = 0; j < dim; ++j)
        if (j != i) v *= phi[j];
      g[i] = v;
    }
    return g;
  };
  double r2 = 0.0, inv2 = 0.0;
  for (int i = 0; i < dim; ++i) {
    r2 += radii[i] * radii[i];
    inv2 += 1.0 / (radii[i] * radii[i]);
  }
  f.grad_support_radius = norm(center) + std::sqrt(r2);
  f.sup_abs = std::abs(amplitude) * std::exp(-static_cast<double>(dim));
  f.grad_bound = std::abs(amplitude) * detail::mollifier_slope_max() *
                 std::sqrt(inv2) * std::exp(-static_cast<double>(dim - 1));
  f.class_tag = SmoothnessClass::smooth_compact;
  f.description = "tensor_bump";
  return f;
}

/// One-dimensional C^infty step: 0 on (-inf, a], 1 on [b, inf). The ramp
/// occupies [a + plateau_gap, b - plateau_gap] and is odd-symmetric about the
/// midpoint.
inline ScalarField make_smooth_step(double a, double b, double plateau_gap = 0.0) {
  require(a < b, "make_smooth_step: need a < b");
  require(plateau_gap >= 0.0 && 2.0 * plateau_gap < b - a,
          "make_smooth_step: plateau_gap must lie in [0, (b-a)/2)");
  const double lo = a + plateau_gap;
  const double width = (b - plateau_gap) - lo;
  ScalarField f;
  f.dim = 1;
  f.eval = [=](const Point& x) { return detail::smooth_ramp((x[0] - lo) / width); };
  f.grad = [=](const Point& x) {
    return Point{detail::smooth_ramp_derivative((x[0] - lo) / width) / width, 0.0, 0.0};
  };
  f.grad_support_radius = std::max(std::abs(a), std::abs(b));
  f.sup_abs = 1.0;
  f.grad_bound = detail::ramp_slope_max() / width;
  f.class_tag = SmoothnessClass::smooth_grad_compact;
  f.description = "smooth_step";
  return f;
}

/// x -> f(x / delta).
inline ScalarField dilate(const ScalarField& f, double delta) {
  require(delta > 0.0, "dilate: delta must be positive");
  ScalarField g = f;
  auto ev = f.eval;
  auto gr = f.grad;
  const double inv = 1.0 / delta;
  g.eval = [ev, inv](const Point& x) { return ev(inv * x); };
  g.grad = [gr, inv](const Point& x) { return inv * gr(inv * x); };
  g.grad_support_radius = f.grad_support_radius * delta;
  g.grad_bound = f.grad_bound * inv;
  g.description = f.description + "|dilate(" + std::to_string(delta) + ")";
  return g;
}

/// x -> c f(x).
inline ScalarField scale(const ScalarField& f, double c) {
  ScalarField g = f;
  auto ev = f.eval;
  auto gr = f.grad;
  g.eval = [ev, c](const Point& x) { return c * ev(x); };
  g.grad = [gr, c](const Point& x) { return c * gr(x); };
  g.sup_abs = std::abs(c) * f.sup_abs;
  g.grad_bound = std::abs(c) * f.grad_bound;
  g.description = f.description + "|scale(" + std::to_string(c) + ")";
  return g;
}

/// Sum of fields on the same dimension; bounds add.
inline ScalarField add(const ScalarField& f, const ScalarField& h) {
  require(f.dim == h.dim, "add: dimension mismatch");
  ScalarField g;
  g.dim = f.dim;
  auto fe = f.eval, he = h.eval;
  auto fg = f.grad, hg = h.grad;
  g.eval = [fe, he](const Point& x) { return fe(x) + he(x); };
  g.grad = [fg, hg](const Point& x) { return fg(x) + hg(x); };
  g.grad_support_radius = std::max(f.grad_support_radius, h.grad_support_radius);
  g.sup_abs = f.sup_abs + h.sup_abs;
  g.grad_bound = f.grad_bound + h.grad_bound;
  g.class_tag = (f.class_tag == SmoothnessClass::smooth_compact &&
                 h.class_tag == SmoothnessClass::smooth_compact)
                    ? SmoothnessClass::smooth_compact
                    : SmoothnessClass::smooth_grad_compact;
  g.description = f.description + "+" + h.description;
  return g;
}

/// Numeric parameters of a named factory, e.g. {"radius": {1.0}}.
using FactoryParams = std::map<std::string, std::vector<double>>;

namespace detail {

inline double param(const FactoryParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end() || it->second.empty()) return fallback;
  return it->second.front();
}

inline Point param_point(const FactoryParams& p, const std::string& key, int dim,
                         double fill) {
  Point out{};
  for (int i = 0; i < dim; ++i) out[i] = fill;
  auto it = p.find(key);
  if (it == p.end()) return out;
  const auto& v = it->second;
  if (v.size() == 1) {
    for (int i = 0; i < dim; ++i) out[i] = v[0];
  } else {
    require(static_cast<int>(v.size()) == dim,
            "factory parameter '" + key + "' has wrong length");
    for (int i = 0; i < dim; ++i) out[i] = v[i];
  }
  return out;
}

}  // namespace detail

/// Builds a field from a factory name: "bump", "smooth_step", "tensor_bump".
inline ScalarField make_field(const std::string& factory, int dim,
                              const FactoryParams& p) {
  if (factory == "bump")
    return make_bump(dim, detail::param_point(p, "center", dim, 0.0),
                     detail::param(p, "radius", 1.0),
                     detail::param(p, "amplitude", 1.0));
  if (factory == "tensor_bump")
    return make_tensor_bump(dim, detail::param_point(p, "center", dim, 0.0),
                            detail::param_point(p, "radii", dim, 1.0),
                            detail::param(p, "amplitude", 1.0));
  if (factory == "smooth_step") {
    require(dim == 1, "smooth_step is one-dimensional");
    return make_smooth_step(detail::param(p, "a", -1.0), detail::param(p, "b", 1.0),
                            detail::param(p, "plateau_gap", 0.0));
  }
  throw contract_error("unknown function factory '" + factory + "'");
}

}  // namespace bvy

#endif  // BVY_TESTBENCH_HPP
