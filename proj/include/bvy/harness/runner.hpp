#ifndef BVY_HARNESS_RUNNER_HPP
#define BVY_HARNESS_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bvy/functional.hpp"
#include "bvy/harness/config.hpp"
#include "bvy/harness/report.hpp"
#include "bvy/hypotheses.hpp"
#include "bvy/inequalities.hpp"

namespace bvy::harness {

namespace detail {

inline ReportRecord make_record(const ExperimentConfig& cfg, std::size_t index, const Experiment& e,
                                Check c) {
  ReportRecord r;
  r.config_hash = cfg.hash;
  r.index = index;
  r.experiment = e.name;
  r.check = to_string(c);
  r.function = e.function.name;
  r.space = to_string(e.space);
  r.gamma = e.params.gamma;
  r.q = e.params.q;
  return r;
}

inline void label(ReportRecord& r, const Verdict& v) {
  r.theorem_labeled = v.holds;
  r.hypothesis = v.rule;
}

/// pass/fail for theorem-labeled runs, exploratory otherwise; any non-finite
/// reported value turns the record into a failure.
inline void settle(ReportRecord& r, bool ok) {
  for (const auto& [k, v] : r.values)
    if (std::isnan(v)) {
      r.status = Status::fail;
      r.message += (r.message.empty() ? "" : "; ") + std::string("NaN in '") + k + "'";
      return;
    }
  if (!r.theorem_labeled) r.status = Status::exploratory;
  else r.status = ok ? Status::pass : Status::fail;
}

inline ScalarField random_nonnegative_field(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> center(-1.0, 1.0), radius(0.2, 0.8), amp(0.1, 2.0);
  ScalarField f = make_bump(1, Point{center(rng), 0, 0}, radius(rng), amp(rng));
  for (int k = 0; k < 2; ++k) f = add(f, make_bump(1, Point{center(rng), 0, 0}, radius(rng), amp(rng)));
  return f;
}

inline void run_check(const ExperimentConfig& cfg, const Experiment& e, Check c, const ScalarField& f,
                      LevelSetEvaluator& ev, ReportRecord& r) {
  const int n = f.dim;
  const double gamma = e.params.gamma, q = e.params.q;
  switch (c) {
    case Check::sup: {
      label(r, equivalence_hypotheses(e.space, n, gamma, q));
      const SupResult s = bvy_sup(ev, e.space, e.params);
      const double grad = gradient_norm(e.space, f, e.quad.grid);
      const double target = limit_target(f, e.space, e.params, e.quad);
      r.set("value", s.value);
      r.set("target", target);
      r.set("ratio", target > 0.0 ? s.value / target : 1.0);
      r.set("argmax_lambda", s.argmax);
      r.set("grad_norm", grad);
      r.set("sup_over_grad", grad > 0.0 ? s.value / grad : 0.0);
      r.flag("endpoint", s.endpoint);
      r.flag("secondary_peak", s.secondary_peak);
      for (std::size_t k = 0; k < s.lambdas.size(); ++k) r.curve.emplace_back(s.lambdas[k], s.values[k]);
      settle(r, std::isfinite(s.value));
      break;
    }
    case Check::lower_bound: {
      label(r, equivalence_hypotheses(e.space, n, gamma, q));
      const LowerBoundCheck lb = lower_bound_check(ev, e.space, e.params, e.tol.lower_bound_slack);
      r.set("value", lb.sup);
      r.set("target", lb.target);
      r.set("ratio", lb.margin);
      r.set("tolerance", e.tol.lower_bound_slack);
      r.flag("endpoint", lb.endpoint);
      settle(r, lb.pass);
      break;
    }
    case Check::limit: {
      label(r, limit_hypotheses(e.space, n, gamma, q));
      LimitOptions opt;
      opt.anchor = e.params.schedule.anchor;
      opt.ratio = e.params.schedule.ratio;
      opt.window = e.tol.limit_window;
      opt.max_steps = e.tol.limit_max_steps;
      opt.tolerance = e.tol.limit_tolerance;
      const LimitEstimate est = bvy_limit(ev, e.space, e.params, opt);
      const double ratio = est.target > 0.0 ? est.value / est.target : (est.value == 0.0 ? 1.0 : kInf);
      r.set("value", est.value);
      r.set("target", est.target);
      r.set("ratio", ratio);
      r.set("tolerance", e.tol.limit_band);
      r.set("spread", est.achieved_relative_spread);
      r.set("window", est.stabilization_window);
      r.flag("stabilized", est.stabilized);
      r.flag("to_zero_plus", est.direction == LimitDirection::to_zero_plus);
      for (std::size_t k = 0; k < est.lambdas.size(); ++k) r.curve.emplace_back(est.lambdas[k], est.values[k]);
      settle(r, std::abs(ratio - 1.0) <= e.tol.limit_band);
      if (!est.stabilized && r.status != Status::exploratory) {
        r.status = Status::inconclusive;
        r.message = "no stabilization within the schedule";
      }
      break;
    }
    case Check::nu_gamma: {
      r.theorem_labeled = true;
      r.hypothesis = "definition identity";
      const double lambda = e.nu_lambda > 0.0 ? e.nu_lambda : characteristic_lambda(f, gamma, q);
      const InnerField& inner = ev.inner(lambda);
      double nu = 0.0;
      for (std::size_t i = 0; i < inner.field.size(); ++i)
        nu += inner.field.cell_measures[i] * inner.field.values[i];
      r.set("value", nu);
      r.set("lambda", lambda);
      bool ok = std::isfinite(nu);
      if (q == 1.0) {
        const double via_l1 = ev.functional(Lebesgue{1.0}, lambda, 1.0) / lambda;
        const double diff = nu > 0.0 ? std::abs(via_l1 - nu) / nu : std::abs(via_l1);
        r.set("target", via_l1);
        r.set("ratio", nu > 0.0 ? via_l1 / nu : 1.0);
        r.set("tolerance", e.tol.identity);
        ok = ok && diff <= e.tol.identity;
      }
      settle(r, ok);
      break;
    }
    case Check::gn_type1: {
      Verdict v = gn_hypotheses(e.space, n, gamma);
      label(r, v);
      const GNResult g = gn_type1(f, e.space, gamma, e.gn.s, e.gn.p, e.quad, e.params.schedule);
      r.q = g.q;
      r.set("value", g.lhs);
      r.set("target", g.rhs_core);
      r.set("ratio", g.ratio);
      r.set("s", e.gn.s);
      r.set("p", e.gn.p);
      if (!std::isinf(e.gn.p)) r.set("g_quantity", g.g);
      r.flag("endpoint", g.endpoint);
      settle(r, std::isfinite(g.ratio));
      break;
    }
    case Check::gn_type2: {
      label(r, gn_hypotheses(e.space, n, gamma));
      const GNType2Params gp{e.gn.s0, e.gn.s, e.gn.q0};
      const GNResult g = gn_type2(f, e.space, gamma, gp, e.quad, e.params.schedule);
      r.q = g.q;
      r.set("value", g.lhs);
      r.set("target", g.rhs_core);
      r.set("ratio", g.ratio);
      r.set("eta", g.eta);
      r.set("g_quantity", g.g);
      r.flag("endpoint", g.endpoint);
      settle(r, std::isfinite(g.ratio));
      break;
    }
    case Check::stopping_time: {
      r.theorem_labeled = n == 1 && gamma < -1.0;
      r.hypothesis = r.theorem_labeled ? "n = 1, gamma < -1" : "needs n = 1 and gamma < -1";
      if (!r.theorem_labeled) {
        r.status = Status::exploratory;
        r.message = "skipped: stopping-time partition needs n = 1 and gamma < -1";
        break;
      }
      const SampledField s = sample(e.quad.grid, [&](const Point& x) { return f.eval(x); });
      if (*std::min_element(s.values.begin(), s.values.end()) < 0.0)
        throw contract_error("stopping-time partition needs a non-negative field");
      const double R = f.grad_support_radius;
      double worst = 0.0;
      std::size_t points = 0;
      StoppingTime st = stopping_time_partition(f, -R, R, gamma);
      for (double v : st.residuals) worst = std::max(worst, v);
      points = st.points.size();
      std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * (r.index + 1)));
      for (int k = 0; k < e.stopping.random_fields; ++k) {
        const ScalarField g = random_nonnegative_field(rng);
        const StoppingTime t = stopping_time_partition(g, -2.0, 2.0, gamma);
        for (double v : t.residuals) worst = std::max(worst, v);
      }
      r.set("value", worst);
      r.set("tolerance", e.tol.residual);
      r.set("points", static_cast<double>(points));
      r.set("a2", st.points.size() > 1 ? st.points[1] : std::nan(""));
      settle(r, worst <= e.tol.residual);
      break;
    }
  }
}

}  // namespace detail

namespace detail {

// Experiments that differ only in the space (or the check) share the level-set
// field; the key collects everything the inner integral depends on.
inline std::string evaluator_key(const Experiment& e) {
  const FunctionDescriptor& f = e.function;
  const RaySolverOptions& r = e.quad.ray;
  std::ostringstream os;
  os.precision(17);
  os << f.name << '|' << f.factory << '|' << f.dim << '|' << f.dilate << '|' << f.scale << '|';
  for (const auto& [k, v] : f.params) {
    os << k << '=';
    for (double x : v) os << x << ',';
  }
  os << '|' << e.params.gamma << '|' << e.params.q << '|' << e.quad.grid.dim << '|' << e.quad.grid.half_width;
  for (int c : e.quad.grid.counts) os << ',' << c;
  os << '|' << e.quad.directions << '|' << r.scan_ratio << ',' << r.start_fraction << ',' << r.tol << ','
     << r.r_max << ',' << r.max_bisection << ',' << r.certified_floor;
  return os.str();
}

}  // namespace detail

/// Runs every experiment. Experiments sharing a level-set field form a group
/// that one worker handles with one evaluator; up to `threads` groups run at a
/// time. Records come back in config order, checks in the order listed.
inline std::vector<ReportRecord> run(const ExperimentConfig& cfg, int threads = 1) {
  const std::size_t m = cfg.experiments.size();
  std::vector<std::vector<std::size_t>> groups;
  {
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < m; ++i) {
      const auto [it, fresh] = slot.emplace(detail::evaluator_key(cfg.experiments[i]), groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  }
  std::vector<std::vector<ReportRecord>> per(m);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t g = next++; g < groups.size(); g = next++) {
      std::optional<ScalarField> f;
      std::optional<LevelSetEvaluator> ev;
      for (std::size_t i : groups[g]) {
        const Experiment& e = cfg.experiments[i];
        for (Check c : e.checks) {
          ReportRecord r = detail::make_record(cfg, i, e, c);
          const auto t0 = std::chrono::steady_clock::now();
          try {
            if (!f) f = e.function.build();
            if (!ev) ev.emplace(bvy_evaluator(*f, e.params, e.quad));
            detail::run_check(cfg, e, c, *f, *ev, r);
          } catch (const std::exception& ex) {
            r.status = Status::fail;
            r.message = ex.what();
          }
          r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          per[i].push_back(std::move(r));
        }
      }
    }
  };
  const int k = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(groups.size(), 1))));
  std::vector<std::thread> pool;
  for (int t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<ReportRecord> out;
  for (auto& v : per)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

/// 1 if any theorem-labeled check failed, else 0.
inline int exit_code(const std::vector<ReportRecord>& records) {
  for (const auto& r : records)
    if (r.counts_for_exit()) return 1;
  return 0;
}

}  // namespace bvy::harness

#endif  // BVY_HARNESS_RUNNER_HPP
