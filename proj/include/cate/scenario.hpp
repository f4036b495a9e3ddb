#ifndef CATE_SCENARIO_HPP_
#define CATE_SCENARIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cate/assignment.hpp"
#include "cate/demand.hpp"
#include "cate/error.hpp"
#include "cate/metrics.hpp"
#include "cate/topology.hpp"

namespace cate {

enum class EngineKind { kOffline, kOnline };

std::string_view to_string(EngineKind kind);

struct DiurnalConfig {
  double min = 1.0;
  double max = 1.0;
  double period_bins = 144.0;
  double phase_bins = 0.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  double total_volume = 1.0;
  std::size_t providers = 100;
  int max_locations = 8;
  std::size_t bins = 1;
  double bin_minutes = 10.0;
  double noise = 0.0;
  /// Per node id; empty means every node has mass 1.
  std::vector<double> masses;
  std::optional<DiurnalConfig> diurnal;
};

struct WhatIf {
  ProviderId provider = 0;
  double factor = 1.0;
};

struct SweepConfig {
  ProviderId provider = 0;
  std::vector<double> factors;
};

struct OutputConfig {
  std::filesystem::path directory = "out";
  std::vector<ReportFormat> formats{ReportFormat::kCsv};
  bool assignments = false;
  bool normalize = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::filesystem::path topology;
  std::optional<std::filesystem::path> demand_file;
  std::optional<GeneratorConfig> generator;
  std::vector<ObjectiveKind> objectives{ObjectiveKind::kMaxLinkUtilization};
  /// Participation: top-K by volume, or an explicit list; neither means all.
  std::optional<std::size_t> top_k;
  std::optional<std::vector<ProviderId>> providers;
  BaselineOptions baseline;
  EngineKind engine = EngineKind::kOffline;
  std::size_t quantum_count = 100;
  std::optional<std::uint64_t> shuffle_seed;
  int max_iterations = 10;
  bool warm_start = false;
  /// Solve the LP oracle per bin for the max-link-utilization objective.
  bool lp_check = false;
  std::vector<WhatIf> what_if;
  std::optional<SweepConfig> sweep;
  OutputConfig output;
  std::size_t workers = 1;
};

struct ConfigViolation {
  std::string field;
  std::string constraint;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> violations);
  const std::vector<ConfigViolation>& violations() const { return violations_; }

 private:
  std::vector<ConfigViolation> violations_;
};

/// Parses and validates a JSON config. Relative paths resolve against
/// `base_dir`. Throws ConfigError listing every violation.
ScenarioConfig validate_config(std::string_view document,
                               const std::filesystem::path& base_dir = {});

/// Applies "path.to.field=value" overrides to a JSON config document.
/// Values parse as JSON when possible and as strings otherwise.
std::string apply_overrides(std::string_view document, std::span<const std::string> overrides);

ScenarioConfig load_config_file(const std::filesystem::path& path,
                                std::span<const std::string> overrides = {});

/// Name of the environment variable that overrides `workers`.
inline constexpr const char* kWorkersEnv = "CATE_WORKERS";

/// config.workers, overridden by CATE_WORKERS when set.
std::size_t effective_workers(const ScenarioConfig& config);

/// Demand matrix from the configured source, with what-if factors applied.
ContentDemandMatrix load_demands(const ScenarioConfig& config, const NetworkTopology& topo);

/// Providers taking part in CaTE: the explicit list (validated against the
/// matrix), else the top K, else all.
std::set<ProviderId> participating_providers(const ScenarioConfig& config,
                                             const ContentDemandMatrix& matrix);

struct ObjectiveRun {
  ObjectiveKind objective = ObjectiveKind::kMaxLinkUtilization;
  std::vector<MetricsReport> cate;
  std::vector<int> iterations;      // offline engine only
  std::vector<bool> converged;      // offline engine only
  /// Per bin: objective before the first pass and after each pass.
  std::vector<std::vector<double>> objective_history;  // offline engine only
  std::vector<double> lp_optimum;   // lp_check and max-util only
  std::vector<FlowAssignment> assignments;  // output.assignments only
};

struct VariantRun {
  std::string label;
  double factor = 1.0;
  std::vector<MetricsReport> baseline;
  std::vector<FlowAssignment> baseline_assignments;  // output.assignments only
  std::vector<ObjectiveRun> objectives;
};

struct ScenarioResult {
  std::vector<VariantRun> variants;
  std::vector<std::filesystem::path> files;
};

/// Peak-over-bins max utilization of baseline and CaTE and its reduction.
/// A bin counts as improved when CaTE is lower by more than 1e-12 relative.
struct PeakSummary {
  double baseline_peak = 0.0;
  double cate_peak = 0.0;
  double peak_reduction = 0.0;
  double mean_reduction = 0.0;
  std::size_t bins_improved = 0;
};

PeakSummary summarize_peak(std::span<const MetricsReport> baseline,
                           std::span<const MetricsReport> cate);

/// Runs every variant, bin and objective without touching the filesystem.
ScenarioResult evaluate_scenario(const ScenarioConfig& config);

/// Writes report files for `result` (atomically, one file at a time) and
/// records their paths in result.files.
void write_reports(const ScenarioConfig& config, ScenarioResult& result);

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace cate

#endif  // CATE_SCENARIO_HPP_
