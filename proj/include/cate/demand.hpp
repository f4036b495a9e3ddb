#ifndef CATE_DEMAND_HPP_
#define CATE_DEMAND_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cate/topology.hpp"

namespace cate {

using ProviderId = int;

struct ContentProvider {
  ProviderId id = 0;
  std::string name;
  /// Eligible ingress nodes per bin, sorted ascending.
  std::vector<std::vector<NodeId>> locations_by_bin;

  const std::vector<NodeId>& locations(std::size_t bin) const { return locations_by_bin.at(bin); }
};

/// d_jk: demand of consumer node j for content of provider k.
struct ContentDemand {
  NodeId consumer = 0;
  ProviderId provider = 0;
  double volume = 0.0;
};

/// OD-level demand that no server selection can move.
struct BackgroundDemand {
  NodeId origin = 0;
  NodeId destination = 0;
  double volume = 0.0;
};

struct DemandBin {
  std::vector<ContentDemand> demands;        // sorted by (provider, consumer)
  std::vector<BackgroundDemand> background;  // sorted by (origin, destination)
};

/// Per-provider, per-bin view of how demand may be sourced: every consumer's
/// d_jk together with the ingress nodes that may serve it.
struct PotentialVector {
  ProviderId provider = 0;
  std::size_t bin = 0;
  std::vector<NodeId> ingress;
  std::vector<ContentDemand> consumers;

  /// Splits each consumer's demand over `ingress` proportionally to
  /// `weights` (one row per consumer). Each row sums to d_jk exactly.
  std::vector<std::vector<double>> realize(std::span<const double> weights) const;
};

/// Time-binned content demands. Immutable: transformations return new
/// matrices. Construction validates and canonicalizes (sorts, merges
/// duplicate entries, drops zero volumes).
class ContentDemandMatrix {
 public:
  ContentDemandMatrix(std::size_t node_count, double bin_minutes,
                      std::vector<ContentProvider> providers, std::vector<DemandBin> bins);

  std::size_t node_count() const { return node_count_; }
  std::size_t bin_count() const { return bins_.size(); }
  double bin_minutes() const { return bin_minutes_; }
  const std::vector<ContentProvider>& providers() const { return providers_; }
  const ContentProvider& provider(ProviderId id) const;
  bool has_provider(ProviderId id) const;
  const DemandBin& bin(std::size_t t) const { return bins_.at(t); }
  const std::vector<DemandBin>& bins() const { return bins_; }

  double content_volume(std::size_t t) const;
  double background_volume(std::size_t t) const;
  double total_volume(std::size_t t) const { return content_volume(t) + background_volume(t); }
  /// Summed over all bins.
  double provider_volume(ProviderId id) const;

  PotentialVector potential(ProviderId id, std::size_t t) const;

  friend bool operator==(const ContentDemandMatrix& a, const ContentDemandMatrix& b);

 private:
  std::size_t node_count_;
  double bin_minutes_;
  std::vector<ContentProvider> providers_;  // sorted by id
  std::vector<DemandBin> bins_;
};

/// Parses the JSON demand document against `topo`.
ContentDemandMatrix ingest_demands(std::string_view document, const NetworkTopology& topo);
ContentDemandMatrix ingest_demands_file(const std::filesystem::path& path,
                                        const NetworkTopology& topo);
/// Inverse of ingest_demands; stable key order.
std::string serialize_demands(const ContentDemandMatrix& matrix);

struct CpProfile {
  double share = 0.0;     // fraction of total volume
  int location_count = 1;
};

/// Default provider mix: cumulative share is quadratic in log10(rank) through
/// top-1 = 15%, top-10 = 40%, top-100 = 70% (capped at 95%), so shares
/// decrease strictly with rank; providers covering the first
/// half of the volume get 8 locations, up to 60% get 4, up to 70% get 2,
/// the rest 1. Location counts are capped at `max_locations`.
std::vector<CpProfile> default_cp_profiles(std::size_t provider_count, int max_locations);

/// Cumulative volume share of the top `rank` providers under the default mix.
double default_cumulative_share(std::size_t rank);

struct GravityOptions {
  std::size_t bins = 1;
  double bin_minutes = 10.0;
  /// Per-entry multiplicative jitter, uniform in [1 - noise, 1 + noise].
  double noise = 0.0;
};

/// Gravity-model synthesis: consumer j's demand for provider k is
/// total * share_k * mass_j / sum(mass). Locations are drawn without
/// replacement from peering points. Unallocated share becomes background
/// OD demand proportional to mass_o * mass_d (o != d).
ContentDemandMatrix generate_gravity_demands(const NetworkTopology& topo,
                                             std::span<const double> node_masses,
                                             double total_volume,
                                             std::span<const CpProfile> cp_profiles,
                                             std::uint64_t seed, const GravityOptions& options = {});

ContentDemandMatrix scale_diurnal(const ContentDemandMatrix& matrix, std::span<const double> profile);

/// Raised-cosine day curve between `min` and `max`, peaking half a period
/// after `phase_bins`.
std::vector<double> sinusoidal_profile(std::size_t bins, double min, double max,
                                       double period_bins, double phase_bins = 0.0);

ContentDemandMatrix apply_scenario_multiplier(const ContentDemandMatrix& matrix,
                                              ProviderId provider, double factor);

/// One (consumer, provider) demand with its eligible set M_jk.
struct SubFlowDemand {
  NodeId consumer = 0;
  ProviderId provider = 0;
  double volume = 0.0;
  std::vector<NodeId> locations;
};

/// x = x_r + x_s for one bin. `fixed_content` holds content demands that
/// cannot be moved (non-participants, single-location providers).
struct BinSplit {
  std::size_t bin = 0;
  std::vector<SubFlowDemand> adjustable;
  std::vector<SubFlowDemand> fixed_content;
  std::vector<BackgroundDemand> background;

  double adjustable_volume() const;
  double fixed_volume() const;
};

BinSplit split_adjustable(const ContentDemandMatrix& matrix, std::size_t bin,
                          const std::set<ProviderId>& participating);

/// Providers by decreasing summed volume, ties by lower id.
std::vector<ProviderId> rank_providers(const ContentDemandMatrix& matrix);
std::set<ProviderId> select_top_k(const ContentDemandMatrix& matrix, std::size_t k);

}  // namespace cate

#endif  // CATE_DEMAND_HPP_
