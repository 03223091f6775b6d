#ifndef BVY_INEQUALITIES_HPP
#define BVY_INEQUALITIES_HPP

// Fractional level-set functionals on
//   D_{lambda, gamma/q, s}[f] = { |f(x) - f(y)| > lambda |x - y|^{s + gamma/q} },
// the two Gagliardo-Nirenberg type ratios, and the Gagliardo seminorm.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bvy/functional.hpp"

namespace bvy {

/// int 1_{D_{lambda, gamma/q, s}[f]}(x, y) |x - y|^{gamma - n} dy. At s = 1
/// this is exactly inner_integral.
inline double fractional_inner(const ScalarField& f, const Point& x, double lambda, double gamma,
                               double q, double s, const QuadratureSpec& quad) {
  require(q > 0.0, "fractional_inner: q must be positive");
  require(s > 0.0 && s <= 1.0, "fractional_inner: s must lie in (0, 1]");
  return level_set_inner(f, x, lambda, s + gamma / q, gamma, quad);
}

inline LevelSetEvaluator fractional_evaluator(const ScalarField& f, double gamma, double q, double s,
                                              const QuadratureSpec& quad) {
  require(q > 0.0, "fractional_evaluator: q must be positive");
  require(s >= 0.0 && s <= 1.0, "fractional_evaluator: s must lie in [0, 1]");
  return LevelSetEvaluator(f, gamma, s + gamma / q, quad);
}

/// sup_lambda lambda || I ||_X^{1/q} with I the D_{lambda, gamma/q, s} inner
/// field, equivalently lambda || I^{1/q} ||_{X^q}.
inline SupResult fractional_sup(const ScalarField& f, const SpaceSpec& spec, double gamma, double q,
                                double s, const QuadratureSpec& quad, const LambdaSchedule& sched = {}) {
  LevelSetEvaluator ev = fractional_evaluator(f, gamma, q, s, quad);
  const SpaceSpec xq = convexify(spec, q);
  const double anchor = sched.anchor > 0.0 ? sched.anchor : characteristic_lambda(f, s + gamma / q);
  return sup_over_lambda([&](double l) { return ev.functional(xq, l, q); },
                         schedule_points(sched, anchor));
}

/// G = sup_lambda lambda || I(s0, gamma/q0) ||_X^{1/q0}.
inline double g_quantity(const ScalarField& f, const SpaceSpec& spec, double gamma, double s0,
                         double q0, const QuadratureSpec& quad, const LambdaSchedule& sched = {}) {
  return fractional_sup(f, spec, gamma, q0, s0, quad, sched).value;
}

struct GNResult {
  double lhs = 0.0;
  double rhs_core = 0.0;
  double ratio = 0.0;
  double q = 0.0;
  double eta = 0.0;        // interpolation weight of |grad f| (type-2), s (type-1)
  double g = 0.0;          // G quantity (type-1 with finite p, type-2)
  bool endpoint = false;   // a sup search peaked at its schedule end
};

namespace detail {

inline void finish_ratio(GNResult& r) {
  if (r.rhs_core == 0.0) {
    if (r.lhs > 0.0) throw contract_error("GN check: right side vanishes while the left side does not");
    r.ratio = 0.0;
    return;
  }
  r.ratio = r.lhs / r.rhs_core;
}

inline bool vanishes(const ScalarField& f) { return f.grad_bound == 0.0 && f.sup_abs == 0.0; }

}  // namespace detail

/// Type-1: 1/q = (1-s)/p + s and
///   sup_lambda lambda || I(s, gamma/q)^{1/q} ||_{X^q}
///     <= C || f ||_{X^p}^{1-s} || |grad f| ||_X^s,
/// p = infinity uses sup_abs for || f ||_infinity.
inline GNResult gn_type1(const ScalarField& f, const SpaceSpec& spec, double gamma, double s, double p,
                         const QuadratureSpec& quad, const LambdaSchedule& sched = {}) {
  require(gamma != 0.0, "gn_type1: gamma must be non-zero");
  require(s > 0.0 && s < 1.0, "gn_type1: s must lie in (0, 1)");
  require(p >= 1.0, "gn_type1: p must lie in [1, infinity]");
  GNResult r;
  r.q = 1.0 / ((std::isinf(p) ? 0.0 : (1.0 - s) / p) + s);
  r.eta = s;
  const double grad = gradient_norm(spec, f, quad.grid);
  if (std::isinf(p)) {
    r.rhs_core = std::pow(f.sup_abs, 1.0 - s) * std::pow(grad, s);
  } else {
    const SampledField absf = sample(quad.grid, [&](const Point& x) { return std::abs(f.eval(x)); });
    r.rhs_core = std::pow(norm(convexify(spec, p), absf), 1.0 - s) * std::pow(grad, s);
  }
  if (detail::vanishes(f)) return r;
  const SupResult sup = fractional_sup(f, spec, gamma, r.q, s, quad, sched);
  r.lhs = sup.value;
  r.endpoint = sup.endpoint;
  if (!std::isinf(p)) r.g = g_quantity(f, spec, gamma, 0.0, p, quad, sched);
  detail::finish_ratio(r);
  return r;
}

struct GNType2Params {
  double s0 = 0.0;
  double s = 0.5;
  double q0 = 4.0;

  double eta() const { return (s - s0) / (1.0 - s0); }
  double q() const { return 1.0 / ((1.0 - eta()) / q0 + eta()); }
  void validate() const {
    require(s0 >= 0.0 && s0 < s && s < 1.0, "GN type-2: need 0 <= s0 < s < 1");
    require(q0 > 1.0, "GN type-2: need q0 > 1");
  }
};

/// Type-2: with s = (1-eta) s0 + eta and 1/q = (1-eta)/q0 + eta,
///   sup_lambda lambda || I(s, gamma/q) ||_X^{1/q} <= C G^{1-eta} || |grad f| ||_X^eta,
///   G = sup_lambda lambda || I(s0, gamma/q0) ||_X^{1/q0}.
inline GNResult gn_type2(const ScalarField& f, const SpaceSpec& spec, double gamma,
                         const GNType2Params& gp, const QuadratureSpec& quad,
                         const LambdaSchedule& sched = {}) {
  require(gamma != 0.0, "gn_type2: gamma must be non-zero");
  gp.validate();
  GNResult r;
  r.q = gp.q();
  r.eta = gp.eta();
  if (detail::vanishes(f)) return r;
  const double grad = gradient_norm(spec, f, quad.grid);
  const SupResult g = fractional_sup(f, spec, gamma, gp.q0, gp.s0, quad, sched);
  r.g = g.value;
  r.rhs_core = std::pow(r.g, 1.0 - r.eta) * std::pow(grad, r.eta);
  const SupResult sup = fractional_sup(f, spec, gamma, r.q, gp.s, quad, sched);
  r.lhs = sup.value;
  r.endpoint = sup.endpoint || g.endpoint;
  detail::finish_ratio(r);
  return r;
}

// ---------------------------------------------------------------------------
// Gagliardo seminorm.

struct GagliardoResult {
  double value = 0.0;
  bool divergent = false;
};

namespace detail {

// Radius at which the ray from x (inside the box) leaves [-L, L]^n.
inline double box_exit(const Point& x, const Point& w, int dim, double half_width) {
  double t = kInf;
  for (int a = 0; a < dim; ++a) {
    if (w[a] > 0.0) t = std::min(t, (half_width - x[a]) / w[a]);
    else if (w[a] < 0.0) t = std::min(t, (-half_width - x[a]) / w[a]);
  }
  return std::max(t, 0.0);
}

}  // namespace detail

/// ( int int |f(x) - f(y)|^p / |x - y|^{sp + n} dx dy )^{1/p}.
///
/// x runs over the cell centers of the grid box B, which must contain the
/// gradient support. The pairs with x outside B are recovered by symmetry
/// (pairs with both points outside B only matter on the line, where f may
/// take different constants on the two sides and the term is closed-form).
/// Radial integrals are first-order exact near r = 0, use GK in log r
/// further out, and are exact beyond the support.
inline GagliardoResult gagliardo_seminorm(const ScalarField& f, double s, double p,
                                          const QuadratureSpec& quad) {
  require(s > 0.0 && s < 1.0, "gagliardo_seminorm: s must lie in (0, 1)");
  require(p >= 1.0 && std::isfinite(p), "gagliardo_seminorm: p must lie in [1, infinity)");
  detail::check_field(f, quad);
  require(quad.grid.half_width >= f.grad_support_radius,
          "gagliardo_seminorm: grid box must contain the gradient support");
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  const double sp = s * p;
  const double kappa = p * (1.0 - s);
  const DirectionSet dirs = sphere_quadrature(f.dim, quad.directions);
  const SampledField carrier = make_carrier(quad.grid);
  const double L = quad.grid.half_width;
  const double r_lin = 1e-3 * 0.5 * quad.grid.spacing(0);
  GagliardoResult res;

  // On the line f may take different constants on the two sides; the pairs
  // straddling the box then decide convergence.
  double jump = 0.0;
  if (f.dim == 1) {
    jump = std::abs(f.eval(Point{-2.0 * L - 1.0, 0.0, 0.0}) - f.eval(Point{2.0 * L + 1.0, 0.0, 0.0}));
    if (jump > 0.0 && sp <= 1.0) {
      res.divergent = true;
      res.value = kInf;
      return res;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < carrier.size(); ++i) {
    const Point& x = carrier.nodes[i];
    const double fx = f.eval(x);
    const double r_far = norm(x) + f.grad_support_radius;
    double per_x = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      const Point& w = dirs.directions[k];
      const double c = std::pow(std::abs(fx - f.eval(x + (2.0 * r_far + 1.0) * w)), p);
      // int_a^b |f(x) - f(x + r w)|^p r^{-sp-1} dr for b <= r_far. Below
      // r_lin the difference is linearized (its rounding error would swamp
      // the quadrature there), above it the variable is u = log r.
      const double slope = std::pow(std::abs(dot(f.grad(x), w)), p);
      auto near = [&](double a, double b) {
        if (b <= a) return 0.0;
        double v = 0.0;
        const double cut = std::min(b, std::max(a, r_lin));
        if (cut > a) v += slope * (std::pow(cut, kappa) - std::pow(a, kappa)) / kappa;
        if (b > cut) {
          auto g = [&](double u) {
            const double r = std::exp(u);
            return std::pow(std::abs(fx - f.eval(x + r * w)), p) * std::pow(r, -sp);
          };
          v += GK::integrate(g, std::log(cut), std::log(b), 15, 1e-10);
        }
        return v;
      };
      // Beyond r_far the difference is the constant c^{1/p}.
      auto far = [&](double a, double b) {
        a = std::max(a, r_far);
        if (b <= a || c == 0.0) return 0.0;
        const double tb = std::isinf(b) ? 0.0 : std::pow(b, -sp);
        return c * (std::pow(a, -sp) - tb) / sp;
      };
      auto piece = [&](double a, double b) { return near(a, std::min(b, r_far)) + far(a, b); };
      const double exit = detail::box_exit(x, w, f.dim, L);
      const double v = piece(0.0, exit) + 2.0 * piece(exit, kInf);
      if (!std::isfinite(v)) res.divergent = true;
      per_x += dirs.weights[k] * v;
    }
    total += carrier.cell_measures[i] * per_x;
  }

  if (jump > 0.0) total += 2.0 * std::pow(jump, p) * std::pow(2.0 * L, 1.0 - sp) / (sp * (sp - 1.0));
  if (!std::isfinite(total)) res.divergent = true;
  res.value = res.divergent ? kInf : std::pow(total, 1.0 / p);
  return res;
}

}  // namespace bvy

#endif  // BVY_INEQUALITIES_HPP
