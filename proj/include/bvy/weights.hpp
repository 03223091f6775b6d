#ifndef BVY_WEIGHTS_HPP
#define BVY_WEIGHTS_HPP

// Muckenhoupt machinery: A_p constant estimates over finite cube families,
// discrete Hardy-Littlewood maximal operators and the Rubio de Francia
// iteration.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bvy/geometry.hpp"
#include "bvy/grid.hpp"
#include "bvy/registry.hpp"
#include "bvy/spaces.hpp"
#include "bvy/testbench.hpp"

namespace bvy {

/// Geometric radius set rmin, rmin*ratio, ... up to rmax (inclusive-ish).
inline std::vector<double> geometric_radii(double rmin, double rmax, double ratio = 1.25) {
  require(rmin > 0.0 && rmax >= rmin && ratio > 1.0, "geometric_radii: invalid range");
  std::vector<double> r;
  for (double v = rmin; v <= rmax * (1.0 + 1e-12); v *= ratio) r.push_back(v);
  return r;
}

/// Cubes aligned with the cells of `g`: side h * 2^k for k = 0.. until the
/// side exceeds the box, with lower corners on a half-side lattice.
inline std::vector<Cube> grid_cube_family(const GridSpec& g, int min_cells = 1) {
  std::vector<Cube> out;
  double h = g.spacing(0);
  for (int a = 1; a < g.dim; ++a) h = std::max(h, g.spacing(a));
  const double box = 2.0 * g.half_width;
  for (double side = h * min_cells; side <= box * (1.0 + 1e-12); side *= 2.0) {
    const double step = side < box ? 0.5 * side : side;
    const int m = static_cast<int>(std::floor((box - side) / step + 1e-9)) + 1;
    int total = 1;
    for (int a = 0; a < g.dim; ++a) total *= m;
    for (int code = 0; code < total; ++code) {
      Cube c;
      c.dim = g.dim;
      c.side = side;
      int rest = code;
      for (int a = 0; a < g.dim; ++a) {
        c.lower[a] = -g.half_width + (rest % m) * step;
        rest /= m;
      }
      out.push_back(c);
    }
  }
  return out;
}

namespace detail {

struct CubeStats {
  double measure = 0.0;
  double mean_w = 0.0;       // average of w
  double mean_dual = 0.0;    // average of w^{-1/(p-1)} (p > 1)
  double max_inverse = 0.0;  // max of 1/w (p = 1)
};

inline double a_p_quotient(const CubeStats& s, double p) {
  if (s.measure <= 0.0) return 0.0;
  if (p == 1.0) return s.mean_w * s.max_inverse;
  return s.mean_w * std::pow(s.mean_dual, p - 1.0);
}

}  // namespace detail

/// Lower estimate of [w]_{A_p}: the maximal A_p quotient over `cubes`, cube
/// averages taken over the nodes of the sampled weight that fall in each cube.
inline double a_p_constant(const SampledField& w, double p, const std::vector<Cube>& cubes) {
  require(p >= 1.0, "a_p_constant: p must be >= 1");
  require(!cubes.empty(), "a_p_constant: empty cube family");
  for (double v : w.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw contract_error("a_p_constant: weight samples must be positive and finite");
  double best = 0.0;
  for (const Cube& q : cubes) {
    detail::CubeStats s;
    double sw = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!q.contains(w.nodes[i])) continue;
      const double mu = w.cell_measures[i];
      s.measure += mu;
      sw += mu * w.values[i];
      if (p > 1.0) sd += mu * std::pow(w.values[i], -1.0 / (p - 1.0));
      s.max_inverse = std::max(s.max_inverse, 1.0 / w.values[i]);
    }
    if (s.measure <= 0.0) continue;
    s.mean_w = sw / s.measure;
    s.mean_dual = sd / s.measure;
    best = std::max(best, detail::a_p_quotient(s, p));
  }
  return best;
}

/// Same estimate for an analytic weight, with `samples` midpoints per axis
/// inside every cube.
inline double a_p_constant(const Weight& w, int dim, double p, const std::vector<Cube>& cubes,
                           int samples = 64) {
  require(p >= 1.0, "a_p_constant: p must be >= 1");
  require(!cubes.empty(), "a_p_constant: empty cube family");
  require(samples >= 1, "a_p_constant: samples must be positive");
  double best = 0.0;
  int total = 1;
  for (int a = 0; a < dim; ++a) total *= samples;
  for (const Cube& q : cubes) {
    detail::CubeStats s;
    double sw = 0.0, sd = 0.0;
    for (int code = 0; code < total; ++code) {
      Point x{};
      int rest = code;
      for (int a = 0; a < dim; ++a) {
        x[a] = q.lower[a] + q.side * ((rest % samples) + 0.5) / samples;
        rest /= samples;
      }
      const double v = w(x);
      if (!(v > 0.0) || !std::isfinite(v))
        throw contract_error("a_p_constant: weight must be positive and finite at samples");
      s.measure += 1.0;
      sw += v;
      if (p > 1.0) sd += std::pow(v, -1.0 / (p - 1.0));
      s.max_inverse = std::max(s.max_inverse, 1.0 / v);
    }
    s.mean_w = sw / s.measure;
    s.mean_dual = sd / s.measure;
    best = std::max(best, detail::a_p_quotient(s, p));
  }
  return best;
}

/// Doubling property (|S|/|Q|)^p w(Q) <= A w(S) for S inside Q; returns the
/// ratio rhs / lhs (>= 1 when the inequality holds).
inline double doubling_margin(const Weight& w, int dim, double p, double a_p_estimate,
                              const Cube& inner, const Cube& outer, int samples = 64) {
  require(outer.contains(inner), "doubling_margin: inner cube must lie in outer cube");
  auto mass = [&](const Cube& q) {
    int total = 1;
    for (int a = 0; a < dim; ++a) total *= samples;
    double s = 0.0;
    for (int code = 0; code < total; ++code) {
      Point x{};
      int rest = code;
      for (int a = 0; a < dim; ++a) {
        x[a] = q.lower[a] + q.side * ((rest % samples) + 0.5) / samples;
        rest /= samples;
      }
      s += w(x);
    }
    return s / total * q.volume();
  };
  const double lhs = std::pow(inner.volume() / outer.volume(), p) * mass(outer);
  const double rhs = a_p_estimate * mass(inner);
  return rhs / lhs;
}

// ---------------------------------------------------------------------------
// Maximal operators.

struct MaximalValue {
  double centered = 0.0;  // sup over the radius set of centered ball averages
  double lower = 0.0;     // bracket for the uncentered value: [centered, 2^n centered]
  double upper = 0.0;
};

namespace detail {

// Integral of the piecewise-constant 1-D field over (-inf, t].
inline double cumulative_1d(const SampledField& f, const std::vector<double>& prefix, double t) {
  const GridSpec& g = *f.grid;
  const double h = g.spacing(0);
  const double u = (t + g.half_width) / h;
  if (u <= 0.0) return 0.0;
  const int n = g.counts[0];
  if (u >= n) return prefix[n];
  const int k = static_cast<int>(std::floor(u));
  return prefix[k] + (u - k) * h * std::abs(f.values[k]);
}

inline std::vector<double> prefix_1d(const SampledField& f) {
  std::vector<double> p(f.size() + 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    p[i + 1] = p[i] + f.cell_measures[i] * std::abs(f.values[i]);
  return p;
}

inline bool is_grid_1d(const SampledField& f) { return f.dim == 1 && f.grid.has_value(); }

inline double ball_average(const SampledField& f, const std::vector<double>& prefix,
                           const Point& x, double r) {
  if (is_grid_1d(f))
    return (cumulative_1d(f, prefix, x[0] + r) - cumulative_1d(f, prefix, x[0] - r)) / (2.0 * r);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (norm(f.nodes[i] - x) <= r) s += f.cell_measures[i] * std::abs(f.values[i]);
  return s / ball_volume(f.dim, r);
}

}  // namespace detail

/// Centered maximal approximation at x over the radius set, with the
/// dimensional sandwich bracketing the uncentered value.
inline MaximalValue maximal(const SampledField& f, const Point& x, const std::vector<double>& radii) {
  require(!radii.empty(), "maximal: empty radius set");
  const auto prefix = detail::is_grid_1d(f) ? detail::prefix_1d(f) : std::vector<double>{};
  MaximalValue m;
  for (double r : radii) {
    require(r > 0.0, "maximal: radii must be positive");
    m.centered = std::max(m.centered, detail::ball_average(f, prefix, x, r));
  }
  m.lower = m.centered;
  m.upper = std::pow(2.0, f.dim) * m.centered;
  return m;
}

/// Centered maximal approximation for an analytic field. One-dimensional
/// ball averages use adaptive Gauss-Kronrod; higher dimensions a midpoint
/// rule on `samples` points per axis.
inline MaximalValue maximal(const ScalarField& f, const Point& x, const std::vector<double>& radii,
                            int samples = 48) {
  require(!radii.empty(), "maximal: empty radius set");
  MaximalValue m;
  for (double r : radii) {
    require(r > 0.0, "maximal: radii must be positive");
    double avg = 0.0;
    if (f.dim == 1) {
      auto g = [&](double t) { return std::abs(f.eval(Point{t, 0.0, 0.0})); };
      avg = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, x[0] - r, x[0] + r,
                                                                          15, 1e-12) /
            (2.0 * r);
    } else {
      int total = 1;
      for (int a = 0; a < f.dim; ++a) total *= samples;
      double s = 0.0;
      int count = 0;
      for (int code = 0; code < total; ++code) {
        Point y = x;
        int rest = code;
        for (int a = 0; a < f.dim; ++a) {
          y[a] = x[a] - r + 2.0 * r * ((rest % samples) + 0.5) / samples;
          rest /= samples;
        }
        if (norm(y - x) > r) continue;
        s += std::abs(f.eval(y));
        ++count;
      }
      avg = count ? s / count : 0.0;
    }
    m.centered = std::max(m.centered, avg);
  }
  m.lower = m.centered;
  m.upper = std::pow(2.0, f.dim) * m.centered;
  return m;
}

/// Exact uncentered maximal function of a piecewise-constant 1-D grid field
/// at x: sup over intervals [a, b] containing x of the average. Candidate
/// endpoints are the cell boundaries and x itself.
inline double uncentered_maximal_1d(const SampledField& f, double x) {
  require(detail::is_grid_1d(f), "uncentered_maximal_1d: needs a one-dimensional grid field");
  const auto prefix = detail::prefix_1d(f);
  const GridSpec& g = *f.grid;
  const double h = g.spacing(0);
  std::vector<double> left{x}, right{x};
  for (int k = 0; k <= g.counts[0]; ++k) {
    const double b = -g.half_width + k * h;
    if (b < x) left.push_back(b);
    if (b > x) right.push_back(b);
  }
  // A field that is zero outside the box never gains from endpoints beyond it.
  if (x < -g.half_width) left.clear(), left.push_back(x);
  double best = 0.0;
  for (double a : left) {
    const double fa = detail::cumulative_1d(f, prefix, a);
    for (double b : right) {
      if (b <= a) continue;
      best = std::max(best, (detail::cumulative_1d(f, prefix, b) - fa) / (b - a));
    }
  }
  // Degenerate interval: the value at x itself (Lebesgue point of the cell).
  const double u = (x + g.half_width) / h;
  if (u > 0.0 && u < g.counts[0])
    best = std::max(best, std::abs(f.values[static_cast<std::size_t>(u)]));
  return best;
}

enum class MaximalKind { centered, uncentered_exact_1d };

/// Applies the discrete maximal operator node by node.
inline SampledField apply_maximal(const SampledField& f, MaximalKind kind,
                                  const std::vector<double>& radii) {
  std::vector<double> out(f.size());
  if (kind == MaximalKind::uncentered_exact_1d) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = uncentered_maximal_1d(f, f.nodes[i][0]);
  } else {
    require(!radii.empty(), "apply_maximal: empty radius set");
    const auto prefix = detail::is_grid_1d(f) ? detail::prefix_1d(f) : std::vector<double>{};
    for (std::size_t i = 0; i < f.size(); ++i) {
      double m = std::abs(f.values[i]);
      for (double r : radii) m = std::max(m, detail::ball_average(f, prefix, f.nodes[i], r));
      out[i] = m;
    }
  }
  return f.with_values(std::move(out));
}

struct RubioDeFranciaResult {
  SampledField field;               // R_K g
  std::vector<double> term_norms;   // l^2 norms of M^k g / (2 M_norm)^k
  bool nonconvergent = false;       // successive terms failed to decay
};

/// R_K g = sum_{k=0}^{K-1} M^k g / (2^k M_norm^k) with M^0 g = |g|.
/// `terms` counts the summands, so terms = 1 returns |g|.
inline RubioDeFranciaResult rubio_de_francia(const SampledField& g, double m_norm, int terms,
                                             MaximalKind kind = MaximalKind::centered,
                                             std::vector<double> radii = {}) {
  require(terms >= 1, "rubio_de_francia: need at least one term");
  require(m_norm > 0.0, "rubio_de_francia: operator-norm surrogate must be positive");
  if (kind == MaximalKind::centered && radii.empty() && g.grid) {
    double h = g.grid->spacing(0);
    radii = geometric_radii(0.5 * h, 2.0 * g.coverage_radius, 1.2);
  }
  auto l2 = [](const SampledField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.cell_measures[i] * f.values[i] * f.values[i];
    return std::sqrt(s);
  };
  RubioDeFranciaResult res;
  SampledField power = g.map([](double v) { return std::abs(v); });
  res.field = power;
  res.term_norms.push_back(l2(power));
  double factor = 1.0;
  for (int k = 1; k < terms; ++k) {
    power = apply_maximal(power, kind, radii);
    factor /= 2.0 * m_norm;
    for (std::size_t i = 0; i < power.size(); ++i) res.field.values[i] += factor * power.values[i];
    res.term_norms.push_back(factor * l2(power));
    const double prev = res.term_norms[res.term_norms.size() - 2];
    if (prev > 0.0 && res.term_norms.back() > prev) res.nonconvergent = true;
  }
  return res;
}

struct DualityCheck {
  double pairing = 0.0;  // int |g h|
  double bound = 0.0;    // ||g||_{L^p_w} ||h||_{L^{p'}_{w^{1-p'}}}
  bool pass = false;
};

/// Hoelder pairing between L^p_w and L^{p'}_mu with mu = w^{1-p'}.
inline DualityCheck weighted_duality_check(const Weight& w, double p, const SampledField& g,
                                           const SampledField& h) {
  require(p > 1.0, "weighted_duality_check: p must lie in (1, inf)");
  require(g.size() == h.size(), "weighted_duality_check: fields must share a grid");
  const double pp = p / (p - 1.0);
  double pair = 0.0, ng = 0.0, nh = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double wi = w(g.nodes[i]);
    const double mu = g.cell_measures[i];
    pair += mu * std::abs(g.values[i] * h.values[i]);
    ng += mu * std::pow(std::abs(g.values[i]), p) * wi;
    nh += mu * std::pow(std::abs(h.values[i]), pp) * std::pow(wi, 1.0 - pp);
  }
  DualityCheck c;
  c.pairing = pair;
  c.bound = std::pow(ng, 1.0 / p) * std::pow(nh, 1.0 / pp);
  c.pass = c.pairing <= c.bound * (1.0 + 1e-8);
  return c;
}

}  // namespace bvy

#endif  // BVY_WEIGHTS_HPP
