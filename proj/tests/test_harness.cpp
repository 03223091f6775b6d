#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bvy/harness/config.hpp"
#include "bvy/harness/report.hpp"
#include "bvy/harness/runner.hpp"

using namespace bvy;
using namespace bvy::harness;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(seed: 11
defaults:
  quadrature: {grid: {dim: 1, half_width: 1.5, counts: [60]}, directions: 2}
  schedule: {ratio: 2, count: 24, first: -16}
functions:
  bump: {factory: bump, dim: 1, params: {center: 0.1, radius: 1}}
  step: {factory: smooth_step, dim: 1, params: {a: -0.5, b: 0.5}}
spaces:
  L1: {type: lebesgue, p: 1}
  L2: {type: lebesgue, p: 2}
experiments:
  - name: small
    function: [bump, step]
    space: [L1, L2]
    cases: [[1, 1], [-2, 1]]
    checks: [nu_gamma, sup, lower_bound]
  - name: outside
    function: bump
    space: L1
    gamma: -0.5
    q: 1
    tolerances: {lower_bound_slack: -0.5}
    checks: [lower_bound]
)";

std::string json_without_time(const std::vector<ReportRecord>& records) {
  std::ostringstream os;
  write_json_lines(os, records, false);
  return os.str();
}

std::string message_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bvy_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("BVY_CLI");
  REQUIRE(cli != nullptr);
  const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("config expansion and defaults", "[harness]") {
  const ExperimentConfig cfg = parse_config(kSmall);
  CHECK(cfg.seed == 11);
  CHECK(cfg.hash.size() == 16);
  REQUIRE(cfg.experiments.size() == 2 * 2 * 2 + 1);
  CHECK(cfg.experiments[0].name == "small/bump/L1/g1q1");
  CHECK(cfg.experiments[0].quad.grid.counts[0] == 60);
  CHECK(cfg.experiments[0].params.schedule.count == 24);
  CHECK(cfg.experiments.back().name == "outside");
  CHECK(cfg.experiments.back().tol.lower_bound_slack == -0.5);
  CHECK(cfg.experiments.back().tol.limit_window == 4);
  CHECK(parse_config("").experiments.empty());
}

TEST_CASE("config errors carry line and field", "[harness]") {
  const std::string bad_number = "seed: 1\nspaces:\n  L2: {type: lebesgue, p: 2}\nfunctions:\n  b: {factory: bump}\n"
                                 "experiments:\n  - function: b\n    space: L2\n    gamma: abc\n";
  const std::string m1 = message_of(bad_number);
  CHECK(m1.find("line 9") != std::string::npos);
  CHECK(m1.find("gamma") != std::string::npos);
  const std::string zero = "spaces:\n  L2: {type: lebesgue, p: 2}\nfunctions:\n  b: {factory: bump}\n"
                           "experiments:\n  - function: b\n    space: L2\n    gamma: 0\n";
  CHECK(message_of(zero).find("gamma = 0") != std::string::npos);
  CHECK(message_of("seeed: 3\n").find("seeed") != std::string::npos);
  CHECK(message_of("spaces:\n  X: {type: lebesgue}\n").find("line 2") != std::string::npos);
  CHECK(message_of("experiments: [\n").find("line") != std::string::npos);
  const std::string missing = "experiments:\n  - gamma: 1\n    space: L2\n";
  CHECK(message_of(missing).find("function") != std::string::npos);
  const std::string unknown_space = "functions:\n  b: {factory: bump}\nexperiments:\n  - function: b\n    space: nope\n"
                                    "    gamma: 1\n";
  CHECK(message_of(unknown_space).find("unknown space") != std::string::npos);
}

TEST_CASE("empty check list gives an empty report", "[harness]") {
  const ExperimentConfig cfg = parse_config(
      "functions:\n  b: {factory: bump}\nspaces:\n  L2: {type: lebesgue, p: 2}\n"
      "experiments:\n  - function: b\n    space: L2\n    gamma: 1\n    checks: []\n");
  const auto records = run(cfg);
  CHECK(records.empty());
  CHECK(exit_code(records) == 0);
}

TEST_CASE("records, emission and determinism", "[harness]") {
  const ExperimentConfig cfg = parse_config(kSmall);
  const auto records = run(cfg);
  REQUIRE(records.size() == 8 * 3 + 1);
  const std::set<std::string> vocabulary{"pass", "fail", "exploratory", "inconclusive"};
  for (const auto& r : records) {
    INFO(r.experiment << " " << r.check << " " << r.message);
    CHECK(vocabulary.count(to_string(r.status)) == 1);
    CHECK(r.config_hash == cfg.hash);
    CHECK_FALSE(r.hypothesis.empty());
    CHECK(std::isfinite(r.get("value")));
  }
  // theorem-labeled cases pass; L^1 with gamma = -2, q = 1 on the line is case (d)
  for (const auto& r : records)
    if (r.theorem_labeled) CHECK(r.status == Status::pass);
  // the hypothesis-free run fails its (impossible) slack but stays exploratory
  CHECK(records.back().status == Status::exploratory);
  CHECK_FALSE(records.back().theorem_labeled);
  CHECK(exit_code(records) == 0);

  // json-lines round trip to full precision
  std::stringstream js;
  write_json_lines(js, records);
  const auto back = read_json_lines(js);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].experiment == records[i].experiment);
    CHECK(back[i].status == records[i].status);
    CHECK(back[i].gamma == records[i].gamma);
    CHECK(back[i].wall_time == records[i].wall_time);
    REQUIRE(back[i].values.size() == records[i].values.size());
    for (std::size_t k = 0; k < records[i].values.size(); ++k) {
      CHECK(back[i].values[k].first == records[i].values[k].first);
      CHECK(back[i].values[k].second == records[i].values[k].second);
    }
  }

  // csv: header plus one row per check
  std::ostringstream cs;
  write_csv_summary(cs, records);
  std::istringstream lines(cs.str());
  std::string line;
  std::size_t rows = 0;
  std::getline(lines, line);
  CHECK(line == "experiment,check,space,gamma,q,value,target,ratio,status");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == records.size());

  // identical config and seed: identical bytes, whatever the thread count
  CHECK(json_without_time(run(cfg)) == json_without_time(records));
  CHECK(json_without_time(run(cfg, 3)) == json_without_time(records));
}

TEST_CASE("non-finite values are recorded as failures", "[harness]") {
  ReportRecord r;
  r.theorem_labeled = false;
  r.set("value", std::nan(""));
  harness::detail::settle(r, true);
  CHECK(r.status == Status::fail);
  CHECK(r.message.find("NaN") != std::string::npos);
  // exploratory runs never reach the exit code, labeled ones do
  CHECK_FALSE(r.counts_for_exit());
  ReportRecord labeled = r;
  labeled.theorem_labeled = true;
  labeled.message.clear();
  harness::detail::settle(labeled, true);
  CHECK(labeled.counts_for_exit());
  std::stringstream js;
  write_json_lines(js, {r});
  const auto back = read_json_lines(js);
  CHECK(std::isnan(back.at(0).get("value")));
  ReportRecord inf;
  inf.set("value", std::numeric_limits<double>::infinity());
  std::stringstream js2;
  write_json_lines(js2, {inf});
  CHECK(std::isinf(read_json_lines(js2).at(0).get("value")));
}

TEST_CASE("stopping-time check through the runner", "[harness]") {
  const ExperimentConfig cfg = parse_config(
      "seed: 5\ndefaults:\n  quadrature: {grid: {dim: 1, half_width: 1.5, counts: [40]}, directions: 2}\n"
      "functions:\n  b: {factory: bump, params: {radius: 1}}\nspaces:\n  L1: {type: lebesgue, p: 1}\n"
      "experiments:\n  - function: b\n    space: L1\n    gamma: -2\n    stopping: {random_fields: 10}\n"
      "    checks: [stopping_time]\n");
  const auto records = run(cfg);
  REQUIRE(records.size() == 1);
  CHECK(records[0].status == Status::pass);
  CHECK(records[0].get("value") <= 1e-8);
}

TEST_CASE("command line exit codes and outputs", "[harness][cli]") {
  const fs::path dir = temp_dir("cli");
  {
    std::ofstream(dir / "small.yaml") << kSmall;
    std::ofstream(dir / "bad.yaml") << "experiments: [\n";
    std::string failing = kSmall;
    // a theorem-labeled lower bound with an unreachable slack
    failing += "  - name: strict\n    function: bump\n    space: L2\n    gamma: 1\n    q: 1\n"
               "    tolerances: {lower_bound_slack: -0.5}\n    checks: [lower_bound]\n";
    std::ofstream(dir / "failing.yaml") << failing;
  }
  CHECK(run_cli("run --config " + (dir / "small.yaml").string() + " --out " + (dir / "out").string() +
                " --emit-curves") == 0);
  CHECK(fs::exists(dir / "out" / "report.jsonl"));
  CHECK(fs::exists(dir / "out" / "curves.csv"));
  {
    std::ifstream in(dir / "out" / "report.jsonl");
    CHECK(read_json_lines(in).size() == 25);
  }
  CHECK(run_cli("run --config " + (dir / "small.yaml").string() + " --out " + (dir / "csv").string() +
                " --format csv --seed 3 --threads 2") == 0);
  CHECK(fs::exists(dir / "csv" / "summary.csv"));
  CHECK(run_cli("run --config " + (dir / "bad.yaml").string() + " --out " + (dir / "bad").string()) == 2);
  CHECK(run_cli("run --config " + (dir / "missing.yaml").string()) == 2);
  CHECK(run_cli("run --config " + (dir / "failing.yaml").string() + " --out " + (dir / "f").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("shipped default suite parses", "[harness]") {
  const char* src = std::getenv("BVY_SOURCE_DIR");
  REQUIRE(src != nullptr);
  const ExperimentConfig cfg = load_config((fs::path(src) / "configs" / "default_suite.yaml").string());
  CHECK_FALSE(cfg.experiments.empty());
}
