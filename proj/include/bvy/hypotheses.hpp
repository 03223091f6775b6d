#ifndef BVY_HYPOTHESES_HPP
#define BVY_HYPOTHESES_HPP

// Decision tables telling whether a (space, n, gamma, q) configuration is
// covered by the two-sided equivalence, the limiting identities, or the GN
// inequalities. Runs outside the tables may still be executed but are
// labelled exploratory.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "bvy/registry.hpp"
#include "bvy/spaces.hpp"

namespace bvy {

struct Verdict {
  bool holds = false;
  std::string rule;  // which case applies, or why none does
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Largest t0 such that w is in A_t for every t > t0 (and for t = t0 when
/// `closed` is set). t0 = 1 with closed = true means A_1.
struct WeightClass {
  double t0 = 1.0;
  bool closed = true;
  bool in(double t) const { return closed ? t >= t0 : t > t0; }
};

inline WeightClass weight_class(const Weight& w, int n) {
  switch (w.kind) {
    case Weight::Kind::constant: return {1.0, true};
    case Weight::Kind::power:
      // |x|^a: A_1 iff -n < a <= 0; A_t (t > 1) iff -n < a < n (t - 1).
      if (w.param <= -n) return {std::numeric_limits<double>::infinity(), false};
      if (w.param <= 0.0) return {1.0, true};
      return {1.0 + w.param / n, false};
    case Weight::Kind::log:
      // (log(e + |x|))^b: non-increasing for b <= 0, slowly growing otherwise.
      return w.param <= 0.0 ? WeightClass{1.0, true} : WeightClass{1.0, false};
  }
  return {1.0, true};
}

inline double orlicz_lower(const OrliczFunction& phi) { return phi.lower_type(); }

/// Cases (a)-(d) shared by the Morrey, mixed-norm, variable, Lorentz and
/// Orlicz tables, in terms of a characteristic exponent r.
inline Verdict generic_cases(double r, int n, double gamma, double q, bool has_case_d,
                             bool b_needs_r_above_one) {
  if (r > n) return {true, "case (a): exponent above n"};
  if (gamma > 0.0 && r >= (b_needs_r_above_one ? std::nextafter(1.0, 2.0) : 1.0) &&
      n * (1.0 / r - 1.0 / q) < 1.0)
    return {true, "case (b): gamma > 0 and n(1/r - 1/q) < 1"};
  if (gamma < 0.0 && r > 1.0 && q < r) return {true, "case (c): gamma < 0 and q < r"};
  if (has_case_d && r == 1.0 && n == 1 && q == 1.0 && gamma < -1.0)
    return {true, "case (d): r = n = q = 1 and gamma < -1"};
  return {false, "no case applies"};
}

}  // namespace detail

/// The exponent that plays the role of p in the gamma < 0 limit constraint.
inline double characteristic_exponent(const SpaceSpec& spec) {
  return std::visit(
      detail::overloaded{
          [](const Lebesgue& s) { return s.p; },
          [](const WeightedLebesgue& s) { return s.p; },
          [](const Lorentz& s) { return std::min(s.r, s.tau); },
          [](const Orlicz& s) { return s.phi.lower_type(); },
          [](const MixedNorm& s) { return *std::min_element(s.r.begin(), s.r.end()); },
          [](const VariableLebesgue& s) { return s.r.lower(); },
          [](const Morrey& s) { return s.r; },
          [](const OrliczSlice& s) { return std::min(s.phi.lower_type(), s.r); },
      },
      spec);
}

namespace detail {

// Weighted L^r_w: search p in [1, r] with w in A_{r/p}; returns the largest
// admissible p (0 if none) together with the case label.
inline std::pair<double, Verdict> weighted_cases(const WeightedLebesgue& s, int n, double gamma,
                                                 double q) {
  const double r = s.p;
  const WeightClass wc = weight_class(s.weight, n);
  // A grid on [1, r] plus the breakpoints of the case conditions, so a thin
  // window such as [n, r) with r just above n is not stepped over.
  const int steps = 2000;
  std::vector<double> candidates{r, static_cast<double>(n), q};
  for (int k = 0; k < steps; ++k) candidates.push_back(1.0 + (r - 1.0) * k / steps);
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  for (double p : candidates) {
    if (p < 1.0 || p > r || !wc.in(r / p)) continue;
    if (r > n && p >= n && p < r) return {p, {true, "case (a): r > n, p in [n, r)"}};
    if (gamma > 0.0 && n * (1.0 / p - 1.0 / q) < 1.0)
      return {p, {true, "case (b): gamma > 0 and n(1/p - 1/q) < 1"}};
    if (r > 1.0 && gamma < 0.0 && q <= p) return {p, {true, "case (c): gamma < 0 and q <= p"}};
    if (r == 1.0 && n == 1 && p == 1.0 && q == 1.0 && gamma < -1.0)
      return {p, {true, "case (d): r = n = p = q = 1 and gamma < -1"}};
  }
  return {0.0, {false, "no p in [1, r] with w in A_{r/p} satisfies a case"}};
}

}  // namespace detail

/// Two-sided equivalence sup_lambda F(lambda) ~ || |grad f| ||_X.
inline Verdict equivalence_hypotheses(const SpaceSpec& spec, int n, double gamma, double q) {
  if (gamma == 0.0) return {false, "gamma = 0 is excluded"};
  if (!(q > 0.0)) return {false, "q must be positive"};
  return std::visit(
      detail::overloaded{
          [&](const Lebesgue& s) -> Verdict {
            const double p = s.p;
            if (p > n) return {true, "case (a): p > n"};
            if (gamma > 0.0 && n * (1.0 / p - 1.0 / q) < 1.0)
              return {true, "case (b): gamma > 0 and n(1/p - 1/q) < 1"};
            if (gamma < 0.0 && p > 1.0 && q <= p) return {true, "case (c): gamma < 0 and q <= p"};
            if (p == 1.0 && q == 1.0 && n == 1 && gamma < -1.0)
              return {true, "case (d): p = q = n = 1 and gamma < -1"};
            return {false, "no case applies"};
          },
          [&](const WeightedLebesgue& s) { return detail::weighted_cases(s, n, gamma, q).second; },
          [&](const Lorentz& s) {
            return detail::generic_cases(std::min(s.r, s.tau), n, gamma, q, false, true);
          },
          [&](const Orlicz& s) {
            return detail::generic_cases(s.phi.lower_type(), n, gamma, q, true, false);
          },
          [&](const MixedNorm& s) {
            return detail::generic_cases(*std::min_element(s.r.begin(), s.r.end()), n, gamma, q,
                                         false, true);
          },
          [&](const VariableLebesgue& s) {
            return detail::generic_cases(s.r.lower(), n, gamma, q, true, false);
          },
          [&](const Morrey& s) { return detail::generic_cases(s.r, n, gamma, q, true, false); },
          [&](const OrliczSlice& s) -> Verdict {
            const double rl = s.phi.lower_type();
            const double m = std::min(rl, s.r);
            if (m > n) return {true, "case (a): min exponent above n"};
            if (gamma > 0.0 && rl >= 1.0 && s.r >= 1.0 && n * (1.0 / m - 1.0 / q) < 1.0)
              return {true, "case (b): gamma > 0 and n(1/m - 1/q) < 1"};
            if (gamma < 0.0 && rl > 1.0 && s.r > 1.0 && q < m)
              return {true, "case (c): gamma < 0 and q < min exponent"};
            if (rl > 1.0 && s.r == 1.0 && n == 1 && q == 1.0 && gamma < -1.0)
              return {true, "case (d): r = n = q = 1 and gamma < -1"};
            if (rl == 1.0 && n == 1 && q == 1.0 && gamma < -1.0)
              return {true, "case (e): lower type = n = q = 1 and gamma < -1"};
            return {false, "no case applies"};
          },
      },
      spec);
}

/// Limiting identity (lambda -> infinity for gamma > 0, lambda -> 0+ for
/// gamma < 0). The gamma < 0 branch adds q < (n - gamma) p / n for n >= 2 and
/// gamma < -1, q < -gamma p for n = 1.
inline Verdict limit_hypotheses(const SpaceSpec& spec, int n, double gamma, double q) {
  Verdict v = equivalence_hypotheses(spec, n, gamma, q);
  if (!v.holds || gamma > 0.0) return v;
  double p = characteristic_exponent(spec);
  if (const auto* w = std::get_if<WeightedLebesgue>(&spec))
    p = detail::weighted_cases(*w, n, gamma, q).first;
  if (n >= 2) {
    if (q < (n - gamma) / n * p) return {true, v.rule + "; q < (n - gamma) p / n"};
    return {false, "q >= (n - gamma) p / n"};
  }
  if (gamma < -1.0 && q < -gamma * p) return {true, v.rule + "; gamma < -1 and q < -gamma p"};
  return {false, "n = 1 requires gamma < -1 and q < -gamma p"};
}

/// Gagliardo-Nirenberg inequalities: X^{1/theta} must stay a ball Banach
/// space for theta close to 1 (characteristic exponent above 1, weights in
/// A_r); for gamma < 0 additionally M bounded on X or n = 1 with gamma < -1.
inline Verdict gn_hypotheses(const SpaceSpec& spec, int n, double gamma) {
  if (gamma == 0.0) return {false, "gamma = 0 is excluded"};
  const double r = characteristic_exponent(spec);
  if (!(r > 1.0)) return {false, "characteristic exponent must exceed 1"};
  if (const auto* w = std::get_if<WeightedLebesgue>(&spec)) {
    if (!detail::weight_class(w->weight, n).in(w->p)) return {false, "weight not in A_r"};
  }
  if (gamma > 0.0) return {true, "gamma > 0"};
  return {true, "gamma < 0 with M bounded on X"};
}

}  // namespace bvy

#endif  // BVY_HYPOTHESES_HPP
