#include "cate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "cate/error.hpp"

namespace cate {

namespace {

struct FlowTally {
  long double traffic = 0.0L;
  long double delay = 0.0L;
  long double volume = 0.0L;
  std::vector<long double> buckets;

  void add(const RoutingMatrix& routing, const NetworkTopology& topo, NodeId origin,
           NodeId destination, double volume_in) {
    if (!(volume_in > 0.0)) return;
    const PathProperties p = path_properties(routing, topo, origin, destination);
    const auto v = static_cast<long double>(volume_in);
    traffic += v * p.hop_count;
    delay += v * p.delay_ms;
    volume += v;
    const auto bucket = static_cast<std::size_t>(p.hop_count);
    if (buckets.size() <= bucket) buckets.resize(bucket + 1, 0.0L);
    buckets[bucket] += v;
  }
};

std::string csv_number(double v) { return fmt::format("{}", v); }

std::size_t bucket_count(std::span<const MetricsReport> reports) {
  std::size_t n = 0;
  for (const MetricsReport& r : reports) n = std::max(n, r.path_length_distribution.size());
  return n;
}

double peak_utilization(std::span<const MetricsReport> a, std::span<const MetricsReport> b) {
  double peak = 0.0;
  for (const MetricsReport& r : a) peak = std::max(peak, r.max_link_utilization);
  for (const MetricsReport& r : b) peak = std::max(peak, r.max_link_utilization);
  return peak;
}

double normalized(double value, double peak) { return peak > 0.0 ? value / peak : 0.0; }

double bucket(const MetricsReport& r, std::size_t h) {
  return h < r.path_length_distribution.size() ? r.path_length_distribution[h] : 0.0;
}

nlohmann::ordered_json report_json(const MetricsReport& r, bool normalize, double peak) {
  nlohmann::ordered_json j;
  j["bin"] = r.bin;
  j["max_link_utilization"] = r.max_link_utilization;
  if (normalize) j["max_link_utilization_norm"] = normalized(r.max_link_utilization, peak);
  j["total_traffic"] = r.total_traffic;
  j["flow_traffic"] = r.flow_traffic;
  j["accumulated_delay"] = r.accumulated_delay;
  j["total_volume"] = r.total_volume;
  j["mean_hops"] = r.mean_hops();
  j["path_length_distribution"] = r.path_length_distribution;
  j["link_utilizations"] = r.link_utilizations;
  return j;
}

}  // namespace

MetricsReport compute_metrics(const FlowAssignment& assignment, const LinkLoadState& state,
                              const RoutingMatrix& routing, const NetworkTopology& topo,
                              std::size_t bin) {
  if (state.link_count() != topo.link_count()) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("bin {}: state has {} links, topology {}",
                                                      bin, state.link_count(), topo.link_count()));
  }
  const LinkLoadState expected = recompute_state(assignment, topo, routing);
  if (!expected.matches(state)) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("bin {}: link loads inconsistent with the assignment", bin));
  }

  MetricsReport report;
  report.bin = bin;
  const std::size_t links = topo.link_count();
  report.link_utilizations.resize(links);
  report.link_volumes.resize(links);
  long double link_sum = 0.0L;
  for (std::size_t l = 0; l < links; ++l) {
    const auto id = static_cast<LinkId>(l);
    report.link_volumes[l] = state.volume(id);
    report.link_utilizations[l] = state.utilization(id);
    link_sum += state.volume(id);
  }
  report.max_link_utilization = links > 0 ? state.max_utilization() : 0.0;

  FlowTally tally;
  for (const SubFlowAssignment& flow : assignment.flows()) {
    for (const Placement& p : flow.placements) tally.add(routing, topo, p.location, flow.consumer, p.volume);
  }
  for (const BackgroundDemand& b : assignment.background()) {
    tally.add(routing, topo, b.origin, b.destination, b.volume);
  }
  report.total_traffic = static_cast<double>(link_sum);
  report.flow_traffic = static_cast<double>(tally.traffic);
  report.accumulated_delay = static_cast<double>(tally.delay);
  report.total_volume = static_cast<double>(tally.volume);
  report.path_length_distribution.reserve(tally.buckets.size());
  for (long double v : tally.buckets) report.path_length_distribution.push_back(static_cast<double>(v));

  const double gap = std::abs(report.total_traffic - report.flow_traffic);
  if (gap > kTrafficIdentityTolerance * std::max(1.0, std::abs(report.flow_traffic))) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("bin {}: total-traffic identity violated (links {} vs flows {})", bin,
                            report.total_traffic, report.flow_traffic));
  }
  return report;
}

std::vector<CdfPoint> utilization_cdf(const MetricsReport& report, bool volume_weighted) {
  const std::size_t n = report.link_utilizations.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.link_utilizations[a] < report.link_utilizations[b];
  });
  double total = 0.0;
  if (volume_weighted) {
    for (double v : report.link_volumes) total += v;
  }
  std::vector<CdfPoint> cdf;
  cdf.reserve(n);
  double running = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t l = order[k];
    double fraction = 0.0;
    if (volume_weighted) {
      running += report.link_volumes[l];
      fraction = total > 0.0 ? running / total : 0.0;
    } else {
      fraction = static_cast<double>(k + 1) / static_cast<double>(n);
    }
    cdf.push_back({report.link_utilizations[l], fraction});
  }
  if (volume_weighted && total > 0.0 && !cdf.empty()) cdf.back().fraction = 1.0;
  return cdf;
}

double relative_reduction(double baseline, double treated) {
  if (baseline > 0.0) return (baseline - treated) / baseline;
  return treated > 0.0 ? -1.0 : 0.0;
}

ReductionReport compare_reports(const MetricsReport& baseline, const MetricsReport& treated) {
  if (baseline.bin != treated.bin) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("cannot compare bin {} with bin {}", baseline.bin, treated.bin));
  }
  if (baseline.link_utilizations.size() != treated.link_utilizations.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("bin {}: reports cover {} and {} links", baseline.bin,
                            baseline.link_utilizations.size(), treated.link_utilizations.size()));
  }
  ReductionReport out;
  out.bin = baseline.bin;
  out.max_link_utilization =
      relative_reduction(baseline.max_link_utilization, treated.max_link_utilization);
  out.total_traffic = relative_reduction(baseline.total_traffic, treated.total_traffic);
  out.accumulated_delay = relative_reduction(baseline.accumulated_delay, treated.accumulated_delay);
  out.mean_hops = relative_reduction(baseline.mean_hops(), treated.mean_hops());
  long double decreased = 0.0L;
  long double total = 0.0L;
  for (std::size_t l = 0; l < baseline.link_utilizations.size(); ++l) {
    total += baseline.link_volumes[l];
    if (treated.link_utilizations[l] < baseline.link_utilizations[l]) decreased += baseline.link_volumes[l];
  }
  out.cdf_shift = total > 0.0L ? static_cast<double>(decreased / total) : 0.0;
  return out;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw Error(ErrorKind::kConfig, fmt::format("unknown report format '{}'", name));
}

std::string_view to_string(ReportFormat format) {
  return format == ReportFormat::kCsv ? "csv" : "json";
}

std::string timeseries_report(std::span<const MetricsReport> reports, const TimeseriesOptions& options) {
  const double peak = peak_utilization(reports, {});
  if (options.format == ReportFormat::kJson) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const MetricsReport& r : reports) doc.push_back(report_json(r, options.normalize, peak));
    return doc.dump(1) + "\n";
  }
  const std::size_t buckets = bucket_count(reports);
  std::string out = "bin,max_link_utilization";
  if (options.normalize) out += ",max_link_utilization_norm";
  out += ",total_traffic,flow_traffic,accumulated_delay,total_volume,mean_hops";
  for (std::size_t h = 0; h < buckets; ++h) out += fmt::format(",hops_{}", h);
  out += "\n";
  for (const MetricsReport& r : reports) {
    out += fmt::format("{},{}", r.bin, csv_number(r.max_link_utilization));
    if (options.normalize) out += "," + csv_number(normalized(r.max_link_utilization, peak));
    out += fmt::format(",{},{},{},{},{}", csv_number(r.total_traffic), csv_number(r.flow_traffic),
                       csv_number(r.accumulated_delay), csv_number(r.total_volume),
                       csv_number(r.mean_hops()));
    for (std::size_t h = 0; h < buckets; ++h) out += "," + csv_number(bucket(r, h));
    out += "\n";
  }
  return out;
}

std::string comparison_report(std::span<const MetricsReport> baseline,
                              std::span<const MetricsReport> treated,
                              const TimeseriesOptions& options) {
  if (baseline.size() != treated.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("comparison needs equal series ({} vs {} bins)", baseline.size(),
                            treated.size()));
  }
  std::vector<ReductionReport> reductions;
  reductions.reserve(baseline.size());
  for (std::size_t t = 0; t < baseline.size(); ++t) {
    reductions.push_back(compare_reports(baseline[t], treated[t]));
  }
  const double peak = peak_utilization(baseline, treated);

  if (options.format == ReportFormat::kJson) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < baseline.size(); ++t) {
      const ReductionReport& red = reductions[t];
      nlohmann::ordered_json j;
      j["bin"] = baseline[t].bin;
      j["baseline"] = report_json(baseline[t], options.normalize, peak);
      j["cate"] = report_json(treated[t], options.normalize, peak);
      j["reduction"] = {{"max_link_utilization", red.max_link_utilization},
                        {"total_traffic", red.total_traffic},
                        {"accumulated_delay", red.accumulated_delay},
                        {"mean_hops", red.mean_hops},
                        {"cdf_shift", red.cdf_shift}};
      doc.push_back(std::move(j));
    }
    return doc.dump(1) + "\n";
  }

  std::vector<std::string> columns{"max_link_utilization"};
  if (options.normalize) columns.emplace_back("max_link_utilization_norm");
  for (const char* c : {"total_traffic", "accumulated_delay", "total_volume", "mean_hops"}) {
    columns.emplace_back(c);
  }
  std::string out = "bin";
  for (const char* side : {"baseline", "cate"}) {
    for (const std::string& c : columns) out += fmt::format(",{}_{}", side, c);
  }
  out += ",reduction_max_link_utilization,reduction_total_traffic,reduction_accumulated_delay,"
         "reduction_mean_hops,cdf_shift\n";
  auto values = [&](const MetricsReport& r) {
    std::string s = "," + csv_number(r.max_link_utilization);
    if (options.normalize) s += "," + csv_number(normalized(r.max_link_utilization, peak));
    s += fmt::format(",{},{},{},{}", csv_number(r.total_traffic), csv_number(r.accumulated_delay),
                     csv_number(r.total_volume), csv_number(r.mean_hops()));
    return s;
  };
  for (std::size_t t = 0; t < baseline.size(); ++t) {
    const ReductionReport& red = reductions[t];
    out += fmt::format("{}", baseline[t].bin);
    out += values(baseline[t]);
    out += values(treated[t]);
    out += fmt::format(",{},{},{},{},{}\n", csv_number(red.max_link_utilization),
                       csv_number(red.total_traffic), csv_number(red.accumulated_delay),
                       csv_number(red.mean_hops), csv_number(red.cdf_shift));
  }
  return out;
}

}  // namespace cate
