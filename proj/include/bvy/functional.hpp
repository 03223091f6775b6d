#ifndef BVY_FUNCTIONAL_HPP
#define BVY_FUNCTIONAL_HPP

// The generalized BVY functional
//   lambda * || ( int 1_{E}(., y) |. - y|^{gamma - n} dy )^{1/q} ||_X,
//   E = { |f(x) - f(y)| > lambda |x - y|^{1 + gamma/q} },
// its sup over lambda, its limits, nu_gamma and the 1-D stopping-time
// partition.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bvy/geometry.hpp"
#include "bvy/grid.hpp"
#include "bvy/spaces.hpp"
#include "bvy/testbench.hpp"

namespace bvy {

/// Geometric lambda grid: lambda_j = anchor * ratio^(first + j), j < count.
/// anchor <= 0 selects the characteristic level of the test function.
struct LambdaSchedule {
  double anchor = 0.0;
  double ratio = 2.0;
  int count = 32;
  int first = -12;
};

struct FunctionalParams {
  double gamma = 1.0;
  double q = 1.0;
  LambdaSchedule schedule{};

  FunctionalParams() = default;
  FunctionalParams(double g, double qq, LambdaSchedule s = {}) : gamma(g), q(qq), schedule(s) {
    validate();
  }
  void validate() const {
    require(gamma != 0.0 && std::isfinite(gamma), "FunctionalParams: gamma must be finite and non-zero");
    require(q > 0.0 && std::isfinite(q), "FunctionalParams: q must be positive");
    require(schedule.ratio > 1.0, "FunctionalParams: schedule ratio must exceed 1");
    require(schedule.count >= 1, "FunctionalParams: schedule needs at least one point");
  }
};

struct QuadratureSpec {
  GridSpec grid{};
  int directions = 64;  // resolution of the sphere quadrature (n >= 2)
  RaySolverOptions ray{};
};

/// lambda level where |f(x) - f(y)| / |x - y|^{exponent} is of order one.
inline double characteristic_lambda(const ScalarField& f, double exponent) {
  const double r = std::max(f.grad_support_radius, 1e-300);
  const double l = f.grad_bound > 0.0 ? f.grad_bound : 1.0;
  return l * std::pow(r, 1.0 - exponent);
}

inline double characteristic_lambda(const ScalarField& f, double gamma, double q) {
  return characteristic_lambda(f, 1.0 + gamma / q);
}

inline std::vector<double> schedule_points(const LambdaSchedule& s, double anchor) {
  require(anchor > 0.0, "schedule_points: anchor must be positive");
  std::vector<double> out(static_cast<std::size_t>(s.count));
  for (int j = 0; j < s.count; ++j) out[j] = anchor * std::pow(s.ratio, s.first + j);
  return out;
}

inline std::vector<double> schedule_points(const LambdaSchedule& s, const ScalarField& f,
                                           double gamma, double q) {
  return schedule_points(s, s.anchor > 0.0 ? s.anchor : characteristic_lambda(f, gamma, q));
}

/// Inner integrals on the grid nodes for one lambda.
struct InnerField {
  SampledField field;
  double tail_bound = 0.0;  // sum of per-ray truncation bounds (weighted)
  bool truncated = false;
};

namespace detail {

/// sum_w weight(w) * int_{ray level set} r^{gamma-1} dr at x.
inline double polar_inner(const ScalarField& f, const Point& x, double lambda, double exponent,
                          double gamma, const DirectionSet& dirs, const RaySolverOptions& opt,
                          double* tail, bool* truncated) {
  const double fx = f.eval(x);
  double s = 0.0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    const RayIntervals ray =
        ray_transitions(f, x, fx, dirs.directions[k], RayProblem{lambda, exponent, gamma}, opt);
    s += dirs.weights[k] * radial_kernel_integral(ray, gamma);
    if (ray.truncated) {
      if (tail) *tail += dirs.weights[k] * ray.tail_bound;
      if (truncated) *truncated = true;
    }
  }
  return s;
}

inline void check_field(const ScalarField& f, const QuadratureSpec& quad) {
  require(f.dim == quad.grid.dim, "field dimension does not match the quadrature grid");
}

}  // namespace detail

/// Level-set integral at x for a general ray exponent (1 + gamma/q for the
/// BVY set, s + gamma/q for the fractional one).
inline double level_set_inner(const ScalarField& f, const Point& x, double lambda, double exponent,
                              double gamma, const QuadratureSpec& quad) {
  require(lambda > 0.0, "inner integral: lambda must be positive");
  require(gamma != 0.0, "inner integral: gamma must be non-zero");
  const DirectionSet dirs = sphere_quadrature(f.dim, quad.directions);
  return detail::polar_inner(f, x, lambda, exponent, gamma, dirs, quad.ray, nullptr, nullptr);
}

/// int 1_{E_{lambda, gamma/q}[f]}(x, y) |x - y|^{gamma - n} dy.
inline double inner_integral(const ScalarField& f, const Point& x, double lambda,
                             const FunctionalParams& params, const QuadratureSpec& quad) {
  params.validate();
  return level_set_inner(f, x, lambda, 1.0 + params.gamma / params.q, params.gamma, quad);
}

inline InnerField level_set_field(const ScalarField& f, double lambda, double exponent,
                                  double gamma, const QuadratureSpec& quad) {
  require(lambda > 0.0, "inner integral: lambda must be positive");
  require(gamma != 0.0, "inner integral: gamma must be non-zero");
  detail::check_field(f, quad);
  const DirectionSet dirs = sphere_quadrature(f.dim, quad.directions);
  InnerField out;
  out.field = make_carrier(quad.grid);
  for (std::size_t i = 0; i < out.field.size(); ++i) {
    double tail = 0.0;
    out.field.values[i] = detail::polar_inner(f, out.field.nodes[i], lambda, exponent, gamma, dirs,
                                              quad.ray, &tail, &out.truncated);
    out.tail_bound += out.field.cell_measures[i] * tail;
  }
  return out;
}

/// lambda * || inner^{1/q} ||_X for a precomputed inner field.
inline double functional_from_inner(const SpaceSpec& spec, const InnerField& inner, double lambda,
                                    double q) {
  const SampledField g = inner.field.map([q](double v) { return std::pow(v, 1.0 / q); });
  return lambda * norm(spec, g);
}

/// Caches inner fields by lambda so several spaces can share the ray solves.
/// Not thread-safe.
class LevelSetEvaluator {
 public:
  LevelSetEvaluator(ScalarField f, double gamma, double exponent, QuadratureSpec quad)
      : f_(std::move(f)), gamma_(gamma), exponent_(exponent), quad_(std::move(quad)) {
    require(gamma_ != 0.0, "LevelSetEvaluator: gamma must be non-zero");
    detail::check_field(f_, quad_);
  }

  const InnerField& inner(double lambda) {
    auto it = cache_.find(lambda);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(lambda, level_set_field(f_, lambda, exponent_, gamma_, quad_)).first->second;
  }

  double functional(const SpaceSpec& spec, double lambda, double q) {
    return functional_from_inner(spec, inner(lambda), lambda, q);
  }

  const ScalarField& field() const { return f_; }
  const QuadratureSpec& quadrature() const { return quad_; }
  double gamma() const { return gamma_; }
  double exponent() const { return exponent_; }
  std::size_t cached() const { return cache_.size(); }

 private:
  ScalarField f_;
  double gamma_;
  double exponent_;
  QuadratureSpec quad_;
  std::map<double, InnerField> cache_;
};

inline LevelSetEvaluator bvy_evaluator(const ScalarField& f, const FunctionalParams& params,
                                       const QuadratureSpec& quad) {
  params.validate();
  return LevelSetEvaluator(f, params.gamma, 1.0 + params.gamma / params.q, quad);
}

inline double bvy_functional(const ScalarField& f, const SpaceSpec& spec, double lambda,
                             const FunctionalParams& params, const QuadratureSpec& quad) {
  params.validate();
  const InnerField inner = level_set_field(f, lambda, 1.0 + params.gamma / params.q, params.gamma, quad);
  return functional_from_inner(spec, inner, lambda, params.q);
}

/// nu_gamma(E_{lambda, gamma/q}[f]) restricted to x in the grid box.
inline double nu_gamma(const ScalarField& f, double lambda, const FunctionalParams& params,
                       const QuadratureSpec& quad) {
  params.validate();
  const InnerField inner = level_set_field(f, lambda, 1.0 + params.gamma / params.q, params.gamma, quad);
  double s = 0.0;
  for (std::size_t i = 0; i < inner.field.size(); ++i)
    s += inner.field.cell_measures[i] * inner.field.values[i];
  return s;
}

// ---------------------------------------------------------------------------
// sup over lambda.

struct SupResult {
  double value = 0.0;
  double argmax = 0.0;
  bool endpoint = false;        // coarse max at the first or last schedule point
  bool secondary_peak = false;  // another coarse local max within 5% of the max
  std::vector<double> lambdas;  // coarse schedule
  std::vector<double> values;
};

/// Coarse max of F over `lambdas` (increasing), then golden-section search in
/// log lambda on the bracketing triple until the bracket ratio is within
/// 1 + rel_tol.
inline SupResult sup_over_lambda(const std::function<double(double)>& F,
                                 const std::vector<double>& lambdas, double rel_tol = 1e-4) {
  require(!lambdas.empty(), "sup_over_lambda: empty schedule");
  SupResult res;
  res.lambdas = lambdas;
  res.values.reserve(lambdas.size());
  for (double l : lambdas) {
    const double v = F(l);
    if (!std::isfinite(v)) throw numerical_error("sup_over_lambda: non-finite functional value");
    res.values.push_back(v);
  }
  const std::size_t k = static_cast<std::size_t>(
      std::max_element(res.values.begin(), res.values.end()) - res.values.begin());
  res.value = res.values[k];
  res.argmax = lambdas[k];
  const std::size_t m = lambdas.size();
  res.endpoint = m > 1 && (k == 0 || k == m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == k || res.value <= 0.0) continue;
    const bool left = j == 0 || res.values[j] >= res.values[j - 1];
    const bool right = j == m - 1 || res.values[j] >= res.values[j + 1];
    const bool adjacent = (j + 1 == k) || (k + 1 == j);
    if (left && right && !adjacent && res.values[j] >= 0.95 * res.value) res.secondary_peak = true;
  }
  if (m < 2 || res.value <= 0.0) return res;

  double a = std::log(lambdas[k == 0 ? 0 : k - 1]);
  double b = std::log(lambdas[k == m - 1 ? m - 1 : k + 1]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = F(std::exp(c)), fd = F(std::exp(d));
  auto consider = [&](double x, double v) {
    if (v > res.value) {
      res.value = v;
      res.argmax = std::exp(x);
    }
  };
  consider(c, fc);
  consider(d, fd);
  while (b - a > std::log1p(rel_tol)) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = F(std::exp(c));
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = F(std::exp(d));
      consider(d, fd);
    }
  }
  return res;
}

inline SupResult bvy_sup(LevelSetEvaluator& ev, const SpaceSpec& spec, const FunctionalParams& params) {
  params.validate();
  const auto lambdas = schedule_points(params.schedule, ev.field(), params.gamma, params.q);
  return sup_over_lambda([&](double l) { return ev.functional(spec, l, params.q); }, lambdas);
}

inline SupResult bvy_sup(const ScalarField& f, const SpaceSpec& spec, const FunctionalParams& params,
                         const QuadratureSpec& quad) {
  LevelSetEvaluator ev = bvy_evaluator(f, params, quad);
  return bvy_sup(ev, spec, params);
}

/// [kappa(q,n)/|gamma|]^{1/q} || |grad f| ||_X on the quadrature grid.
inline double limit_target(const ScalarField& f, const SpaceSpec& spec, const FunctionalParams& params,
                           const QuadratureSpec& quad) {
  params.validate();
  return std::pow(kappa(params.q, f.dim) / std::abs(params.gamma), 1.0 / params.q) *
         gradient_norm(spec, f, quad.grid);
}

// ---------------------------------------------------------------------------
// Limits.

enum class LimitDirection { to_infinity, to_zero_plus };

inline const char* to_string(LimitDirection d) {
  return d == LimitDirection::to_infinity ? "to_infinity" : "to_zero_plus";
}

struct LimitOptions {
  double anchor = 0.0;  // <= 0: characteristic level
  double ratio = 2.0;
  int max_steps = 40;
  int window = 4;
  double tolerance = 0.01;
};

struct LimitEstimate {
  double value = 0.0;
  LimitDirection direction = LimitDirection::to_infinity;
  int stabilization_window = 4;
  double achieved_relative_spread = 0.0;
  bool stabilized = false;
  double target = 0.0;
  std::vector<double> lambdas;
  std::vector<double> values;
};

/// Walks lambda_k = anchor * ratio^{+-k} toward the limit and stops once the
/// last `window` values have relative spread below the tolerance.
inline LimitEstimate limit_along(const std::function<double(double)>& F, LimitDirection dir,
                                 double anchor, const LimitOptions& opt) {
  require(anchor > 0.0, "limit_along: anchor must be positive");
  require(opt.ratio > 1.0 && opt.window >= 2 && opt.max_steps >= opt.window,
          "limit_along: invalid options");
  LimitEstimate est;
  est.direction = dir;
  est.stabilization_window = opt.window;
  est.achieved_relative_spread = kInf;
  for (int k = 0; k < opt.max_steps; ++k) {
    const double l = anchor * std::pow(opt.ratio, dir == LimitDirection::to_infinity ? k : -k);
    const double v = F(l);
    if (!std::isfinite(v)) throw numerical_error("limit_along: non-finite functional value");
    est.lambdas.push_back(l);
    est.values.push_back(v);
    if (static_cast<int>(est.values.size()) < opt.window) continue;
    const auto first = est.values.end() - opt.window;
    const auto [lo, hi] = std::minmax_element(first, est.values.end());
    double mean = 0.0;
    for (auto it = first; it != est.values.end(); ++it) mean += *it;
    mean /= opt.window;
    const double spread = mean != 0.0 ? (*hi - *lo) / std::abs(mean) : (*hi - *lo == 0.0 ? 0.0 : kInf);
    est.achieved_relative_spread = spread;
    est.value = mean;
    if (spread < opt.tolerance) {
      est.stabilized = true;
      break;
    }
  }
  return est;
}

inline LimitEstimate bvy_limit(LevelSetEvaluator& ev, const SpaceSpec& spec, const FunctionalParams& params,
                               const LimitOptions& opt = {}) {
  params.validate();
  const LimitDirection dir =
      params.gamma > 0.0 ? LimitDirection::to_infinity : LimitDirection::to_zero_plus;
  const double anchor =
      opt.anchor > 0.0 ? opt.anchor : characteristic_lambda(ev.field(), params.gamma, params.q);
  LimitEstimate est =
      limit_along([&](double l) { return ev.functional(spec, l, params.q); }, dir, anchor, opt);
  est.target = limit_target(ev.field(), spec, params, ev.quadrature());
  return est;
}

inline LimitEstimate bvy_limit(const ScalarField& f, const SpaceSpec& spec, const FunctionalParams& params,
                               const QuadratureSpec& quad, const LimitOptions& opt = {}) {
  LevelSetEvaluator ev = bvy_evaluator(f, params, quad);
  return bvy_limit(ev, spec, params, opt);
}

struct LowerBoundCheck {
  double sup = 0.0;
  double target = 0.0;
  double margin = 1.0;  // sup / target
  bool endpoint = false;
  bool pass = false;
};

/// sup_lambda F(lambda) >= (1 - slack) [kappa/|gamma|]^{1/q} || |grad f| ||_X.
inline LowerBoundCheck lower_bound_check(LevelSetEvaluator& ev, const SpaceSpec& spec,
                                         const FunctionalParams& params, double slack = 0.03) {
  LowerBoundCheck c;
  c.target = limit_target(ev.field(), spec, params, ev.quadrature());
  const SupResult s = bvy_sup(ev, spec, params);
  c.sup = s.value;
  c.endpoint = s.endpoint;
  c.margin = c.target > 0.0 ? c.sup / c.target : 1.0;
  c.pass = c.sup >= (1.0 - slack) * c.target;
  return c;
}

inline LowerBoundCheck lower_bound_check(const ScalarField& f, const SpaceSpec& spec,
                                         const FunctionalParams& params, const QuadratureSpec& quad,
                                         double slack = 0.03) {
  LevelSetEvaluator ev = bvy_evaluator(f, params, quad);
  return lower_bound_check(ev, spec, params, slack);
}

// ---------------------------------------------------------------------------
// Stopping-time partition on the line.

struct StoppingTime {
  std::vector<double> points;     // a_1 = a < a_2 < ... , last one >= b unless the mass ran out
  std::vector<double> residuals;  // relative residual of each defining equation
};

/// a_1 = a and (a_{i+1} - a_i)^{-(gamma+1)} int_{a_i}^{a_{i+1}} f = 1/2 until
/// a_{i+1} >= b or no mass is left on (a_i, b). f must be non-negative and
/// vanish outside [a, b].
inline StoppingTime stopping_time_partition(const std::function<double(double)>& f, double a,
                                            double b, double gamma, int max_points = 100000) {
  require(a < b, "stopping_time_partition: need a < b");
  require(gamma < -1.0, "stopping_time_partition: gamma must be below -1");
  const double beta = -(gamma + 1.0);
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto mass = [&](double u, double v) {
    v = std::min(v, b);
    if (v <= u) return 0.0;
    // 1e-14 sits at the roundoff floor and makes the recursion split every cell
    return GK::integrate(f, u, v, 20, 1e-12);
  };
  StoppingTime st;
  st.points.push_back(a);
  double ai = a;
  while (ai < b) {
    if (static_cast<int>(st.points.size()) > max_points)
      throw numerical_error("stopping_time_partition: too many points");
    // Nothing left to the right: the equation has no root, the partition ends.
    if (mass(ai, b) == 0.0) break;
    auto phi = [&](double t) { return std::pow(t - ai, beta) * mass(ai, t); };
    double lo = ai, hi = ai + (b - a);
    int grow = 0;
    while (phi(hi) < 0.5) {
      lo = hi;
      hi = ai + 2.0 * (hi - ai);
      if (++grow > 200) throw numerical_error("stopping_time_partition: root bracket failure");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (phi(mid) < 0.5) lo = mid; else hi = mid;
    }
    const double next = 0.5 * (lo + hi);
    if (!(next > ai)) throw numerical_error("stopping_time_partition: root bracket failure");
    st.residuals.push_back(std::abs(phi(next) - 0.5) / 0.5);
    st.points.push_back(next);
    ai = next;
  }
  return st;
}

inline StoppingTime stopping_time_partition(const ScalarField& f, double a, double b, double gamma) {
  require(f.dim == 1, "stopping_time_partition: one-dimensional field required");
  return stopping_time_partition([&](double t) { return f.eval(Point{t, 0.0, 0.0}); }, a, b, gamma);
}

}  // namespace bvy

#endif  // BVY_FUNCTIONAL_HPP
