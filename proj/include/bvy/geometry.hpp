#ifndef BVY_GEOMETRY_HPP
#define BVY_GEOMETRY_HPP

// Sphere quadrature, the sharp constant kappa(q, n), the per-ray level-set
// solver and the adjacent dyadic cube systems.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bvy/point.hpp"
#include "bvy/testbench.hpp"

namespace bvy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// kappa(q, n) = int_{S^{n-1}} |e . w|^q dw
///             = 2 Gamma((q+1)/2) pi^{(n-1)/2} / Gamma((q+n)/2).
inline double kappa(double q, int n) {
  require(q > 0.0, "kappa: q must be positive");
  require(n >= 1, "kappa: n must be a positive integer");
  const double log_value = std::log(2.0) + std::lgamma(0.5 * (q + 1.0)) +
                           0.5 * (n - 1) * std::log(M_PI) -
                           std::lgamma(0.5 * (q + n));
  return std::exp(log_value);
}

/// Surface measure of S^{n-1}: 2 pi^{n/2} / Gamma(n/2).
inline double sphere_measure(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Weighted direction set on S^{n-1}; the weights sum to |S^{n-1}|.
struct DirectionSet {
  int dim = 1;
  std::vector<Point> directions;
  std::vector<double> weights;

  std::size_t size() const { return directions.size(); }

  template <class F>
  double integrate(F&& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < directions.size(); ++i)
      s += weights[i] * g(directions[i]);
    return s;
  }
};

/// n = 1: {-1, +1}; n = 2: `resolution` equispaced angles; n = 3: a
/// Fibonacci lattice with `resolution` nodes. All weights are equal.
inline DirectionSet sphere_quadrature(int n, int resolution) {
  if (n < 1 || n > 3)
    throw contract_error("sphere_quadrature: unsupported dimension " +
                         std::to_string(n) + "; only n in {1, 2, 3} is implemented");
  DirectionSet set;
  set.dim = n;
  if (n == 1) {
    set.directions = {Point{-1.0, 0.0, 0.0}, Point{1.0, 0.0, 0.0}};
    set.weights = {1.0, 1.0};
    return set;
  }
  require(resolution >= 1, "sphere_quadrature: resolution must be positive");
  const std::size_t m = static_cast<std::size_t>(resolution);
  set.directions.reserve(m);
  if (n == 2) {
    for (std::size_t k = 0; k < m; ++k) {
      const double t = 2.0 * M_PI * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
      set.directions.push_back(Point{std::cos(t), std::sin(t), 0.0});
    }
  } else {
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < m; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(m);
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden_angle * static_cast<double>(k);
      set.directions.push_back(Point{rho * std::cos(phi), rho * std::sin(phi), z});
    }
  }
  set.weights.assign(m, sphere_measure(n) / static_cast<double>(m));
  return set;
}

struct Interval {
  double a = 0.0;
  double b = 0.0;
};

/// Radial slice of a level set along one ray. `b` may be +infinity when the
/// ray was integrated exactly to infinity.
struct RayIntervals {
  std::vector<Interval> intervals;
  bool truncated = false;
  double tail_bound = 0.0;
};

/// Ray inequality |f(x) - f(x + r w)| > lambda * r^exponent with radial
/// kernel r^{gamma - 1}. For the BVY set exponent = 1 + gamma/q; for the
/// fractional set exponent = s + gamma/q.
struct RayProblem {
  double lambda = 1.0;
  double exponent = 2.0;
  double gamma = 1.0;
};

struct RaySolverOptions {
  double scan_ratio = 1.05;      // geometric scan step
  double start_fraction = 1e-6;  // first scan radius relative to the window end
  double tol = 1e-10;            // bisection stops at width <= tol * r
  double r_max = kInf;           // optional hard cutoff; infinity = exact exterior
  int max_bisection = 200;
  // Scan steps never exceed |g(r)| / L, L a Lipschitz bound of the indicator
  // g(r) = |f(x) - f(x + r w)| - lambda r^e on the step, so no sign change is
  // skipped; the floor (relative to r) keeps tangential zeros finite. 0 turns
  // the certificate off and leaves the plain geometric scan.
  double certified_floor = 1e-3;
};

namespace detail {

inline double radial_mass(double a, double b, double gamma) {
  if (gamma > 0.0) {
    if (b == kInf) return kInf;
    return (std::pow(b, gamma) - std::pow(a, gamma)) / gamma;
  }
  if (a <= 0.0) return kInf;
  const double tb = (b == kInf) ? 0.0 : std::pow(b, gamma);
  return (tb - std::pow(a, gamma)) / gamma;
}

// Distance from the origin to the segment [a, b].
inline double segment_distance(const Point& a, const Point& b) {
  const Point d = b - a;
  const double dd = dot(d, d);
  const double t = dd > 0.0 ? std::clamp(-dot(a, d) / dd, 0.0, 1.0) : 0.0;
  return norm(a + t * d);
}

inline void push_interval(std::vector<Interval>& out, double a, double b) {
  if (!(b > a)) return;
  if (!out.empty() && out.back().b >= a) {
    out.back().b = std::max(out.back().b, b);
    return;
  }
  out.push_back({a, b});
}

}  // namespace detail

/// Solves {r in (0, r_max): |f(x) - f(x + r w)| > lambda r^exponent} as a
/// sorted list of maximal intervals.
///
/// The window where the inequality can hold at all is cut down with the
/// certified bounds |f(x) - f(y)| <= grad_bound * r and
/// |f(x) - f(y)| <= |f(x)| + sup_abs. Past R = |x| + grad_support_radius the
/// ray sits in a region where f is constant, so that part is solved in closed
/// form; the remaining window is scanned on a geometric grid, shortened where
/// a Lipschitz bound demands it, and every sign change is refined by
/// bisection.
inline RayIntervals ray_transitions(const ScalarField& f, const Point& x, double fx,
                                    const Point& w, const RayProblem& prob,
                                    const RaySolverOptions& opt = {}) {
  require(prob.lambda > 0.0, "ray_transitions: lambda must be positive");
  require(opt.r_max > 0.0 && opt.tol > 0.0, "ray_transitions: r_max and tol must be positive");
  require(opt.scan_ratio > 1.0, "ray_transitions: scan ratio must exceed 1");
  RayIntervals out;
  if (!std::isfinite(fx)) throw numerical_error("ray_transitions: non-finite f(x)");

  const double lambda = prob.lambda;
  const double e = prob.exponent;
  const double lip = f.grad_bound;
  const double span = std::abs(fx) + f.sup_abs;
  if (lip <= 0.0 || span <= 0.0) return out;

  double lo = 0.0, hi = kInf;
  if (e > 1.0) hi = std::min(hi, std::pow(lip / lambda, 1.0 / (e - 1.0)));
  else if (e < 1.0) lo = std::max(lo, std::pow(lambda / lip, 1.0 / (1.0 - e)));
  else if (lambda >= lip) return out;
  if (e > 0.0) hi = std::min(hi, std::pow(span / lambda, 1.0 / e));
  else if (e < 0.0) lo = std::max(lo, std::pow(lambda / span, -1.0 / e));
  else if (lambda >= span) return out;

  if (hi > opt.r_max) {
    const double cut_lo = std::max(lo, opt.r_max);
    if (hi > cut_lo) {
      out.truncated = true;
      out.tail_bound = detail::radial_mass(cut_lo, hi, prob.gamma);
    }
    hi = opt.r_max;
  }
  if (!(lo < hi)) return out;

  auto indicator = [&](double r) {
    const double fy = f.eval(x + r * w);
    if (!std::isfinite(fy))
      throw numerical_error("ray_transitions: non-finite f on the ray at r = " +
                            std::to_string(r));
    return std::abs(fx - fy) - lambda * std::pow(r, e);
  };

  const double r_far = norm(x) + f.grad_support_radius;

  // Numeric window (lo, min(hi, r_far)).
  const double b0 = std::min(hi, r_far);
  if (lo < b0) {
    const double r_start = lo > 0.0 ? lo : b0 * opt.start_fraction;
    double r_prev = r_start;
    double g_prev = indicator(r_prev);
    bool inside = g_prev > 0.0;
    double open_at = lo > 0.0 ? lo : 0.0;
    if (!inside) open_at = -1.0;
    auto refine = [&](double u, double v, bool u_inside) {
      for (int it = 0; it < opt.max_bisection && (v - u) > opt.tol * v; ++it) {
        const double m = 0.5 * (u + v);
        if ((indicator(m) > 0.0) == u_inside) u = m; else v = m;
      }
      return 0.5 * (u + v);
    };
    while (r_prev < b0) {
      double r = std::min(b0, r_prev * opt.scan_ratio);
      // off the gradient support f is constant on the step and g is monotone
      if (opt.certified_floor > 0.0 &&
          detail::segment_distance(x + r_prev * w, x + r * w) <= f.grad_support_radius) {
        const double slope =
            lip + lambda * std::abs(e) * std::max(std::pow(r_prev, e - 1.0), std::pow(r, e - 1.0));
        const double safe = std::abs(g_prev) / slope;
        if (r - r_prev > safe) r = std::min(b0, r_prev + std::max(safe, opt.certified_floor * r_prev));
      }
      g_prev = indicator(r);
      const bool now = g_prev > 0.0;
      if (now != inside) {
        const double t = refine(r_prev, r, inside);
        if (now) open_at = t;
        else detail::push_interval(out.intervals, open_at, t);
        inside = now;
      }
      r_prev = r;
    }
    if (inside) detail::push_interval(out.intervals, open_at, b0);
  }

  // Closed-form exterior (max(lo, r_far), hi): f(x + r w) is constant there.
  const double a1 = std::max(lo, r_far);
  if (a1 < hi) {
    const double far_value = f.eval(x + (2.0 * r_far + 1.0) * w);
    const double jump = std::abs(fx - far_value);
    double u = a1, v = hi;
    if (jump <= 0.0) {
      v = u;
    } else if (e > 0.0) {
      v = std::min(v, std::pow(jump / lambda, 1.0 / e));
    } else if (e < 0.0) {
      u = std::max(u, std::pow(lambda / jump, -1.0 / e));
    } else if (jump <= lambda) {
      v = u;
    }
    detail::push_interval(out.intervals, u, v);
  }
  return out;
}

/// Convenience overload in the (lambda, gamma, q) parameterization of the
/// BVY level set E_{lambda, gamma/q}[f].
inline RayIntervals ray_transitions(const ScalarField& f, const Point& x, const Point& w,
                                    double lambda, double gamma, double q,
                                    double r_max = kInf, double tol = 1e-10) {
  require(gamma != 0.0, "ray_transitions: gamma must be non-zero");
  require(q > 0.0, "ray_transitions: q must be positive");
  RaySolverOptions opt;
  opt.r_max = r_max;
  opt.tol = tol;
  return ray_transitions(f, x, f.eval(x), w, RayProblem{lambda, 1.0 + gamma / q, gamma}, opt);
}

/// Sum over intervals of int_a^b r^{gamma-1} dr = (b^gamma - a^gamma)/gamma,
/// evaluated exactly.
inline double radial_kernel_integral(const RayIntervals& ray, double gamma) {
  require(gamma != 0.0, "radial_kernel_integral: gamma must be non-zero");
  double s = 0.0;
  for (const auto& iv : ray.intervals) {
    if (gamma < 0.0 && iv.a <= 0.0)
      throw contract_error("radial_kernel_integral: interval touching r = 0 with gamma < 0 diverges");
    if (gamma > 0.0 && iv.b == kInf)
      throw contract_error("radial_kernel_integral: unbounded interval with gamma > 0 diverges");
    s += detail::radial_mass(iv.a, iv.b, gamma);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Adjacent dyadic systems D^alpha = {2^j [k + (0,1]^n + (-1)^j alpha]}.

/// Half-open cube prod_i (lower_i, lower_i + side].
struct Cube {
  int dim = 1;
  Point lower{};
  double side = 1.0;

  bool contains(const Point& x) const {
    for (int i = 0; i < dim; ++i)
      if (!(x[i] > lower[i] && x[i] <= lower[i] + side)) return false;
    return true;
  }
  /// Faces shared by cubes of shifted systems are computed with rounding, so
  /// cube containment allows a relative slack of 1e-12 of the side.
  bool contains(const Cube& c) const {
    const double eps = 1e-12 * side;
    for (int i = 0; i < dim; ++i)
      if (c.lower[i] < lower[i] - eps || c.lower[i] + c.side > lower[i] + side + eps) return false;
    return true;
  }
  bool intersects(const Cube& c) const {
    for (int i = 0; i < dim; ++i)
      if (c.lower[i] >= lower[i] + side || lower[i] >= c.lower[i] + c.side) return false;
    return true;
  }
  double volume() const { return std::pow(side, dim); }
  double diameter() const { return side * std::sqrt(static_cast<double>(dim)); }
  Point center() const {
    Point c{};
    for (int i = 0; i < dim; ++i) c[i] = lower[i] + 0.5 * side;
    return c;
  }
};

using LatticeIndex = std::array<long long, kMaxDim>;

inline Cube adjacent_dyadic_cube(int dim, int j, const LatticeIndex& k, const Point& alpha) {
  check_dim(dim);
  Cube c;
  c.dim = dim;
  c.side = std::ldexp(1.0, j);
  const double sign = (j % 2 == 0) ? 1.0 : -1.0;
  for (int i = 0; i < dim; ++i)
    c.lower[i] = c.side * (static_cast<double>(k[i]) + sign * alpha[i]);
  return c;
}

struct BallCover {
  Point alpha{};
  int level = 0;
  Cube cube;
  double diameter_ratio = 0.0;     // diam(Q) / diam(B)
  double containment_ratio = 0.0;  // smallest C with Q inside B(center, C r)
};

/// Finds a cube Q from one of the 3^n shifted dyadic systems with B subset Q,
/// scanning scales upward from the smallest admissible one.
inline BallCover cube_for_ball(int dim, const Point& center, double radius) {
  check_dim(dim);
  require(radius > 0.0, "cube_for_ball: radius must be positive");
  const int j0 = static_cast<int>(std::ceil(std::log2(2.0 * radius)));
  int shifts = 1;
  for (int i = 0; i < dim; ++i) shifts *= 3;
  for (int j = j0; j < j0 + 16; ++j) {
    const double side = std::ldexp(1.0, j);
    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
    for (int code = 0; code < shifts; ++code) {
      Point alpha{};
      int rest = code;
      for (int i = 0; i < dim; ++i) {
        alpha[i] = (rest % 3) / 3.0;
        rest /= 3;
      }
      LatticeIndex k{};
      for (int i = 0; i < dim; ++i)
        k[i] = static_cast<long long>(std::ceil(center[i] / side - sign * alpha[i])) - 1;
      const Cube q = adjacent_dyadic_cube(dim, j, k, alpha);
      bool inside = true;
      for (int i = 0; i < dim && inside; ++i)
        inside = center[i] - radius > q.lower[i] && center[i] + radius <= q.lower[i] + side;
      if (!inside) continue;
      BallCover out;
      out.alpha = alpha;
      out.level = j;
      out.cube = q;
      out.diameter_ratio = q.diameter() / (2.0 * radius);
      double far2 = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double d = std::max(std::abs(q.lower[i] - center[i]),
                                  std::abs(q.lower[i] + side - center[i]));
        far2 += d * d;
      }
      out.containment_ratio = std::sqrt(far2) / radius;
      return out;
    }
  }
  throw numerical_error("cube_for_ball: no covering cube found");
}

}  // namespace bvy

#endif  // BVY_GEOMETRY_HPP
