#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "cate/lp_oracle.hpp"
#include "cate/scenario.hpp"
#include "fixtures.hpp"

using namespace cate;
namespace fs = std::filesystem;

namespace {

std::string two_bottleneck_config(const std::string& extra = "") {
  const fs::path dir = cate::testing::data_dir() / "two_bottleneck";
  return "{\"topology\": \"" + (dir / "topology.json").string() + "\", \"demands\": {\"file\": \"" +
         (dir / "demands.json").string() + "\"}" + extra + "}";
}

std::vector<ConfigViolation> violations_of(const std::string& doc) {
  try {
    validate_config(doc);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool has_violation(const std::vector<ConfigViolation>& v, const std::string& field, const std::string& constraint) {
  for (const ConfigViolation& x : v) {
    if (x.field == field && x.constraint == constraint) return true;
  }
  return false;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cate_test_" + name + "_" + std::to_string(std::random_device{}()));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ScenarioConfig abilene(std::size_t bins, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> overrides{"demands.generator.bins=" + std::to_string(bins)};
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  return load_config_file(cate::testing::data_dir() / "abilene" / "scenario.json", overrides);
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const ScenarioConfig c = validate_config(two_bottleneck_config());
  CHECK(c.quantum_count == 100);
  CHECK(c.max_iterations == 10);
  CHECK(c.engine == EngineKind::kOffline);
  CHECK(c.objectives == std::vector<ObjectiveKind>{ObjectiveKind::kMaxLinkUtilization});
  CHECK(c.baseline.policy == BaselinePolicy::kNearest);
  CHECK_FALSE(c.top_k.has_value());
  CHECK(c.workers == 1);
}

TEST_CASE("config violations are collected") {
  CHECK(has_violation(violations_of(two_bottleneck_config(", \"what_if\": [{\"provider\": 1, \"factor\": -1}]")),
                      "what_if[0].factor", "factor ≥ 0"));
  CHECK(has_violation(violations_of(two_bottleneck_config(", \"sweep\": {\"provider\": 1, \"factors\": [1, -2]}")),
                      "sweep.factors[1]", "factor ≥ 0"));
  CHECK(has_violation(violations_of(two_bottleneck_config(", \"participation\": {\"top_k\": -1}")), "participation.top_k",
                      "K ≥ 0"));
  CHECK(has_violation(violations_of("{\"topology\": \"t.json\"}"), "demands", "exactly one demand source"));
  const auto many = violations_of(two_bottleneck_config(", \"engine\": {\"quantum_count\": 0, \"speed\": 1}, \"colour\": 1"));
  CHECK(many.size() == 3);
  CHECK(has_violation(many, "engine.quantum_count", "Q ≥ 1"));
  CHECK(violations_of("[1]").size() == 1);
}

TEST_CASE("overrides edit nested fields") {
  const std::vector<std::string> o{"engine.kind=online", "name=renamed", "participation.top_k=1"};
  const ScenarioConfig c = validate_config(apply_overrides(two_bottleneck_config(), o));
  CHECK(c.engine == EngineKind::kOnline);
  CHECK(c.name == "renamed");
  CHECK(c.top_k == std::size_t{1});
  const std::vector<std::string> bad{"novalue"};
  CHECK_THROWS_AS(apply_overrides(two_bottleneck_config(), bad), ConfigError);
}

TEST_CASE("relative paths resolve against the config directory") {
  const ScenarioConfig c = load_config_file(cate::testing::data_dir() / "two_bottleneck" / "scenario.json");
  CHECK(c.topology == (cate::testing::data_dir() / "two_bottleneck" / "topology.json").lexically_normal());
  CHECK(fs::exists(c.topology));
}

TEST_CASE("worker count from the environment") {
  ScenarioConfig c;
  c.workers = 3;
  unsetenv(kWorkersEnv);
  CHECK(effective_workers(c) == 3);
  setenv(kWorkersEnv, "5", 1);
  CHECK(effective_workers(c) == 5);
  setenv(kWorkersEnv, "zero", 1);
  CHECK_THROWS_AS(effective_workers(c), Error);
  unsetenv(kWorkersEnv);
}

TEST_CASE("K = 0 leaves the baseline untouched") {
  ScenarioConfig c = abilene(6, {"participation.top_k=0"});
  const ScenarioResult r = evaluate_scenario(c);
  for (const ObjectiveRun& o : r.variants[0].objectives) {
    for (std::size_t t = 0; t < 6; ++t) {
      const ReductionReport red = compare_reports(r.variants[0].baseline[t], o.cate[t]);
      CHECK(red.max_link_utilization == 0.0);
      CHECK(red.total_traffic == 0.0);
      CHECK(red.accumulated_delay == 0.0);
    }
  }
}

TEST_CASE("two-bottleneck scenario reaches the LP optimum") {
  ScenarioConfig c = load_config_file(cate::testing::data_dir() / "two_bottleneck" / "scenario.json");
  const ScenarioResult r = evaluate_scenario(c);
  const VariantRun& v = r.variants.at(0);
  CHECK(v.baseline[0].max_link_utilization == 1.0);
  const ObjectiveRun& mlu = v.objectives.at(0);
  REQUIRE(mlu.objective == ObjectiveKind::kMaxLinkUtilization);
  REQUIRE(mlu.lp_optimum.size() == 1);
  CHECK(mlu.lp_optimum[0] == doctest::Approx(0.5));
  CHECK(mlu.cate[0].max_link_utilization == doctest::Approx(mlu.lp_optimum[0]).epsilon(1e-12));
  CHECK(compare_reports(v.baseline[0], mlu.cate[0]).max_link_utilization == doctest::Approx(0.5));
}

TEST_CASE("online engine on the two-bottleneck instance") {
  ScenarioConfig c = validate_config(two_bottleneck_config(", \"engine\": {\"kind\": \"online\", \"quantum_count\": 1}"));
  const ScenarioResult r = evaluate_scenario(c);
  CHECK(r.variants[0].objectives[0].cate[0].max_link_utilization == doctest::Approx(0.5));
  CHECK(r.variants[0].objectives[0].iterations.empty());
}

TEST_CASE("unknown participant is reported") {
  ScenarioConfig c = validate_config(two_bottleneck_config(", \"participation\": {\"providers\": [1, 42]}"));
  try {
    evaluate_scenario(c);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnknownId);
  }
}

TEST_CASE("what-if at 20x still reduces max utilization") {
  const ScenarioConfig c = abilene(12, {"objectives=max-link-utilization", "what_if=[{\"provider\": 4, \"factor\": 20}]"});
  const ScenarioResult r = evaluate_scenario(c);
  const PeakSummary s = summarize_peak(r.variants[0].baseline, r.variants[0].objectives[0].cate);
  CHECK(s.cate_peak < s.baseline_peak);
  CHECK(s.bins_improved == 12);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
  ScenarioConfig c = abilene(8);
  c.output.formats = {ReportFormat::kCsv, ReportFormat::kJson};
  c.output.assignments = true;
  c.output.directory = fresh_dir("det_a");
  const ScenarioResult a = run_scenario(c);
  c.output.directory = fresh_dir("det_b");
  c.workers = 4;
  const ScenarioResult b = run_scenario(c);
  REQUIRE(a.files.size() == b.files.size());
  REQUIRE(!a.files.empty());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CAPTURE(a.files[i].string());
    CHECK(a.files[i].filename() == b.files[i].filename());
    CHECK(slurp(a.files[i]) == slurp(b.files[i]));
  }
  fs::remove_all(a.files[0].parent_path());
  fs::remove_all(b.files[0].parent_path());
}

TEST_CASE("more participants never raise the peak on the shipped instance") {
  double previous = 1e9;
  for (int k : {0, 1, 2, 5, 10, 20}) {
    CAPTURE(k);
    const ScenarioConfig c = abilene(6, {"objectives=max-link-utilization", "participation.top_k=" + std::to_string(k)});
    const ScenarioResult r = evaluate_scenario(c);
    const PeakSummary s = summarize_peak(r.variants[0].baseline, r.variants[0].objectives[0].cate);
    CHECK(s.cate_peak <= previous * (1.0 + 1e-9));
    previous = s.cate_peak;
  }
}

TEST_CASE("sweep writes one row per factor") {
  ScenarioConfig c = abilene(4, {"objectives=max-link-utilization", "sweep={\"provider\": 4, \"factors\": [1, 20]}"});
  c.output.directory = fresh_dir("sweep");
  const ScenarioResult r = run_scenario(c);
  CHECK(r.variants.size() == 2);
  CHECK(r.variants[1].label == "x20");
  const std::string sweep = slurp(c.output.directory / "abilene_sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 3);
  fs::remove_all(c.output.directory);
}
