#ifndef CATE_METRICS_HPP_
#define CATE_METRICS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cate/assignment.hpp"
#include "cate/topology.hpp"

namespace cate {

struct MetricsReport {
  std::size_t bin = 0;
  double max_link_utilization = 0.0;
  std::vector<double> link_utilizations;  // by link id
  std::vector<double> link_volumes;       // by link id
  /// Sum of carried volume over all links.
  double total_traffic = 0.0;
  /// The same quantity computed per flow as volume * hops.
  double flow_traffic = 0.0;
  /// Volume per hop-count bucket; bucket 0 is co-located traffic.
  std::vector<double> path_length_distribution;
  /// Sum of volume * backbone path delay.
  double accumulated_delay = 0.0;
  double total_volume = 0.0;

  double mean_hops() const { return total_volume > 0.0 ? flow_traffic / total_volume : 0.0; }
};

/// Relative tolerance of the total-traffic identity check.
inline constexpr double kTrafficIdentityTolerance = 1e-9;

/// Throws kInvalidInput when `state` disagrees with the loads implied by
/// `assignment` or the two total-traffic computations disagree.
MetricsReport compute_metrics(const FlowAssignment& assignment, const LinkLoadState& state,
                              const RoutingMatrix& routing, const NetworkTopology& topo,
                              std::size_t bin = 0);

struct CdfPoint {
  double utilization = 0.0;
  double fraction = 0.0;
};

/// Link utilizations sorted ascending with the cumulative fraction of links
/// (link-count weighting) or of carried volume (volume weighting).
std::vector<CdfPoint> utilization_cdf(const MetricsReport& report, bool volume_weighted);

struct ReductionReport {
  std::size_t bin = 0;
  double max_link_utilization = 0.0;
  double total_traffic = 0.0;
  double accumulated_delay = 0.0;
  double mean_hops = 0.0;
  /// Baseline-volume-weighted fraction of links whose utilization dropped.
  double cdf_shift = 0.0;
};

/// (baseline - treated) / baseline per metric. 0/0 is 0; a zero baseline
/// with a positive treated value is -1.
double relative_reduction(double baseline, double treated);

ReductionReport compare_reports(const MetricsReport& baseline, const MetricsReport& treated);

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_report_format(std::string_view name);
std::string_view to_string(ReportFormat format);

struct TimeseriesOptions {
  ReportFormat format = ReportFormat::kCsv;
  /// Adds max_link_utilization_norm: utilization divided by the largest
  /// value in the series.
  bool normalize = false;
};

/// One row (or object) per report.
///
/// CSV columns: bin, max_link_utilization, [max_link_utilization_norm,]
/// total_traffic, flow_traffic, accumulated_delay, total_volume, mean_hops,
/// hops_0 .. hops_H, where H is the largest bucket in the series.
/// JSON holds the same fields plus link_utilizations and
/// path_length_distribution arrays.
std::string timeseries_report(std::span<const MetricsReport> reports,
                              const TimeseriesOptions& options = {});

/// Baseline, treated and reduction columns side by side, one row per bin:
/// bin, baseline_max_link_utilization, cate_max_link_utilization, ...,
/// reduction_max_link_utilization, ..., cdf_shift.
std::string comparison_report(std::span<const MetricsReport> baseline,
                              std::span<const MetricsReport> treated,
                              const TimeseriesOptions& options = {});

}  // namespace cate

#endif  // CATE_METRICS_HPP_
