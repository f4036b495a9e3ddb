#include "cate/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <json.hpp>

#include "cate/error.hpp"

namespace cate {

namespace {

using nlohmann::json;

void check_volume(double volume, const std::string& where) {
  if (!std::isfinite(volume) || volume < 0.0) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("{}: negative volume {}", where, volume));
  }
}

// Sorts, merges duplicates and drops zero volumes.
void canonicalize(DemandBin& bin) {
  std::map<std::pair<ProviderId, NodeId>, double> content;
  for (const ContentDemand& d : bin.demands) content[{d.provider, d.consumer}] += d.volume;
  bin.demands.clear();
  for (const auto& [key, volume] : content) {
    if (volume > 0.0) bin.demands.push_back({key.second, key.first, volume});
  }
  std::map<std::pair<NodeId, NodeId>, double> background;
  for (const BackgroundDemand& b : bin.background) background[{b.origin, b.destination}] += b.volume;
  bin.background.clear();
  for (const auto& [key, volume] : background) {
    if (volume > 0.0) bin.background.push_back({key.first, key.second, volume});
  }
}

const json& require(const json& record, const char* key, const std::string& where) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw Error(ErrorKind::kMalformed, fmt::format("{}: missing field \"{}\"", where, key));
  }
  return *it;
}

int require_int(const json& record, const char* key, const std::string& where) {
  const json& v = require(record, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::kMalformed, fmt::format("{}: field \"{}\" must be an integer", where, key));
  }
  return v.get<int>();
}

double require_number(const json& record, const char* key, const std::string& where) {
  const json& v = require(record, key, where);
  if (!v.is_number()) {
    throw Error(ErrorKind::kMalformed, fmt::format("{}: field \"{}\" must be a number", where, key));
  }
  return v.get<double>();
}

std::vector<NodeId> parse_location_list(const json& list, const NetworkTopology& topo,
                                        const std::string& where) {
  if (!list.is_array()) throw Error(ErrorKind::kMalformed, where + ": locations must be an array");
  std::vector<NodeId> out;
  for (const json& v : list) {
    if (!v.is_number_integer()) {
      throw Error(ErrorKind::kMalformed, where + ": location ids must be integers");
    }
    NodeId id = v.get<int>();
    if (!topo.has_node(id)) {
      throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown node id {}", where, id));
    }
    out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Cumulative share through 0.15, 0.40, 0.70 at ranks 1, 10, 100: quadratic in
// log10(rank), so per-rank shares decrease strictly. Capped at 0.95.
double cumulative_curve(double rank) {
  if (rank <= 0.0) return 0.0;
  const double u = std::log10(rank);
  return std::min(0.95, 0.15 + 0.225 * u + 0.025 * u * u);
}

}  // namespace

std::vector<std::vector<double>> PotentialVector::realize(std::span<const double> weights) const {
  if (weights.size() != ingress.size()) {
    throw Error(ErrorKind::kInvalidInput, "potential vector: one weight per ingress node required");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::kInvalidInput, "potential vector: negative weight");
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::kInvalidInput, "potential vector: all weights zero");
  std::vector<std::vector<double>> out;
  for (const ContentDemand& d : consumers) {
    std::vector<double> row(ingress.size(), 0.0);
    double assigned = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < ingress.size(); ++i) {
      if (weights[i] > 0.0) last = i;
    }
    for (std::size_t i = 0; i < ingress.size(); ++i) {
      if (i == last) continue;
      row[i] = d.volume * weights[i] / sum;
      assigned += row[i];
    }
    row[last] = d.volume - assigned;
    out.push_back(std::move(row));
  }
  return out;
}

ContentDemandMatrix::ContentDemandMatrix(std::size_t node_count, double bin_minutes,
                                         std::vector<ContentProvider> providers,
                                         std::vector<DemandBin> bins)
    : node_count_(node_count),
      bin_minutes_(bin_minutes),
      providers_(std::move(providers)),
      bins_(std::move(bins)) {
  if (!(bin_minutes_ > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "bin duration must be positive");
  }
  std::sort(providers_.begin(), providers_.end(),
            [](const ContentProvider& a, const ContentProvider& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < providers_.size(); ++i) {
    ContentProvider& p = providers_[i];
    if (i > 0 && providers_[i - 1].id == p.id) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("duplicate provider id {}", p.id));
    }
    if (p.locations_by_bin.size() != bins_.size()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("provider {}: {} location sets for {} bins", p.id,
                              p.locations_by_bin.size(), bins_.size()));
    }
    for (auto& locations : p.locations_by_bin) {
      std::sort(locations.begin(), locations.end());
      locations.erase(std::unique(locations.begin(), locations.end()), locations.end());
      for (NodeId l : locations) {
        if (l < 0 || static_cast<std::size_t>(l) >= node_count_) {
          throw Error(ErrorKind::kUnknownId,
                      fmt::format("provider {}: unknown node id {}", p.id, l));
        }
      }
    }
  }
  for (std::size_t t = 0; t < bins_.size(); ++t) {
    DemandBin& bin = bins_[t];
    for (const ContentDemand& d : bin.demands) {
      const std::string where =
          fmt::format("bin {} demand (consumer {}, provider {})", t, d.consumer, d.provider);
      check_volume(d.volume, where);
      if (d.consumer < 0 || static_cast<std::size_t>(d.consumer) >= node_count_) {
        throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown node id {}", where, d.consumer));
      }
      if (!has_provider(d.provider)) {
        throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown provider", where));
      }
      if (d.volume > 0.0 && provider(d.provider).locations(t).empty()) {
        throw Error(ErrorKind::kInvalidInput, fmt::format("{}: empty eligible set", where));
      }
    }
    for (const BackgroundDemand& b : bin.background) {
      const std::string where =
          fmt::format("bin {} background ({} -> {})", t, b.origin, b.destination);
      check_volume(b.volume, where);
      for (NodeId n : {b.origin, b.destination}) {
        if (n < 0 || static_cast<std::size_t>(n) >= node_count_) {
          throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown node id {}", where, n));
        }
      }
    }
    canonicalize(bin);
  }
}

bool ContentDemandMatrix::has_provider(ProviderId id) const {
  auto it = std::lower_bound(providers_.begin(), providers_.end(), id,
                             [](const ContentProvider& p, ProviderId v) { return p.id < v; });
  return it != providers_.end() && it->id == id;
}

const ContentProvider& ContentDemandMatrix::provider(ProviderId id) const {
  auto it = std::lower_bound(providers_.begin(), providers_.end(), id,
                             [](const ContentProvider& p, ProviderId v) { return p.id < v; });
  if (it == providers_.end() || it->id != id) {
    throw Error(ErrorKind::kUnknownId, fmt::format("unknown provider {}", id));
  }
  return *it;
}

double ContentDemandMatrix::content_volume(std::size_t t) const {
  double sum = 0.0;
  for (const ContentDemand& d : bin(t).demands) sum += d.volume;
  return sum;
}

double ContentDemandMatrix::background_volume(std::size_t t) const {
  double sum = 0.0;
  for (const BackgroundDemand& b : bin(t).background) sum += b.volume;
  return sum;
}

double ContentDemandMatrix::provider_volume(ProviderId id) const {
  double sum = 0.0;
  for (const DemandBin& bin : bins_) {
    for (const ContentDemand& d : bin.demands) {
      if (d.provider == id) sum += d.volume;
    }
  }
  return sum;
}

PotentialVector ContentDemandMatrix::potential(ProviderId id, std::size_t t) const {
  PotentialVector out;
  out.provider = id;
  out.bin = t;
  out.ingress = provider(id).locations(t);
  for (const ContentDemand& d : bin(t).demands) {
    if (d.provider == id) out.consumers.push_back(d);
  }
  return out;
}

bool operator==(const ContentDemandMatrix& a, const ContentDemandMatrix& b) {
  if (a.node_count_ != b.node_count_ || a.bin_minutes_ != b.bin_minutes_ ||
      a.providers_.size() != b.providers_.size() || a.bins_.size() != b.bins_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.providers_.size(); ++i) {
    const auto& x = a.providers_[i];
    const auto& y = b.providers_[i];
    if (x.id != y.id || x.name != y.name || x.locations_by_bin != y.locations_by_bin) return false;
  }
  for (std::size_t t = 0; t < a.bins_.size(); ++t) {
    const auto& x = a.bins_[t];
    const auto& y = b.bins_[t];
    if (x.demands.size() != y.demands.size() || x.background.size() != y.background.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.demands.size(); ++i) {
      if (x.demands[i].consumer != y.demands[i].consumer ||
          x.demands[i].provider != y.demands[i].provider ||
          x.demands[i].volume != y.demands[i].volume) {
        return false;
      }
    }
    for (std::size_t i = 0; i < x.background.size(); ++i) {
      if (x.background[i].origin != y.background[i].origin ||
          x.background[i].destination != y.background[i].destination ||
          x.background[i].volume != y.background[i].volume) {
        return false;
      }
    }
  }
  return true;
}

ContentDemandMatrix ingest_demands(std::string_view document, const NetworkTopology& topo) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kMalformed, fmt::format("demand document: {}", e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorKind::kMalformed, "demand document: expected an object");
  const json& bins_spec = require(doc, "bins", "demand document");
  const int bin_count = require_int(bins_spec, "count", "bins");
  if (bin_count < 1) throw Error(ErrorKind::kInvalidInput, "bins: count must be >= 1");
  const double minutes = bins_spec.contains("duration_minutes")
                             ? require_number(bins_spec, "duration_minutes", "bins")
                             : 10.0;
  const auto bins = static_cast<std::size_t>(bin_count);

  std::vector<ContentProvider> providers;
  const json& provider_list = require(doc, "providers", "demand document");
  if (!provider_list.is_array()) throw Error(ErrorKind::kMalformed, "providers must be an array");
  for (std::size_t i = 0; i < provider_list.size(); ++i) {
    const json& record = provider_list[i];
    const std::string where = fmt::format("provider record {}", i);
    ContentProvider p;
    p.id = require_int(record, "id", where);
    p.name = record.value("name", fmt::format("cp{}", p.id));
    const json& locations = require(record, "locations", where);
    if (!locations.is_array()) throw Error(ErrorKind::kMalformed, where + ": locations must be an array");
    // A flat list applies to every bin; a list of lists is per bin.
    if (!locations.empty() && locations.front().is_array()) {
      if (locations.size() != bins) {
        throw Error(ErrorKind::kMalformed,
                    fmt::format("{}: {} per-bin location lists for {} bins", where,
                                locations.size(), bins));
      }
      for (const json& per_bin : locations) {
        p.locations_by_bin.push_back(parse_location_list(per_bin, topo, where));
      }
    } else {
      p.locations_by_bin.assign(bins, parse_location_list(locations, topo, where));
    }
    providers.push_back(std::move(p));
  }

  std::vector<DemandBin> demand_bins(bins);
  auto bin_of = [&](const json& record, const std::string& where) {
    int b = require_int(record, "bin", where);
    if (b < 0 || b >= bin_count) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("{}: bin {} out of range", where, b));
    }
    return static_cast<std::size_t>(b);
  };
  if (doc.contains("demands")) {
    const json& list = doc["demands"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = fmt::format("demand record {}", i);
      std::size_t b = bin_of(list[i], where);
      ContentDemand d;
      d.consumer = require_int(list[i], "consumer", where);
      d.provider = require_int(list[i], "provider", where);
      d.volume = require_number(list[i], "volume", where);
      check_volume(d.volume, where);
      if (!topo.has_node(d.consumer)) {
        throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown node id {}", where, d.consumer));
      }
      demand_bins[b].demands.push_back(d);
    }
  }
  if (doc.contains("background")) {
    const json& list = doc["background"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = fmt::format("background record {}", i);
      std::size_t b = bin_of(list[i], where);
      BackgroundDemand d;
      d.origin = require_int(list[i], "origin", where);
      d.destination = require_int(list[i], "destination", where);
      d.volume = require_number(list[i], "volume", where);
      check_volume(d.volume, where);
      for (NodeId n : {d.origin, d.destination}) {
        if (!topo.has_node(n)) {
          throw Error(ErrorKind::kUnknownId, fmt::format("{}: unknown node id {}", where, n));
        }
      }
      demand_bins[b].background.push_back(d);
    }
  }
  return ContentDemandMatrix(topo.node_count(), minutes, std::move(providers),
                             std::move(demand_bins));
}

ContentDemandMatrix ingest_demands_file(const std::filesystem::path& path,
                                        const NetworkTopology& topo) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot read demand file {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ingest_demands(buffer.str(), topo);
}

std::string serialize_demands(const ContentDemandMatrix& matrix) {
  json doc;
  doc["bins"] = {{"count", matrix.bin_count()}, {"duration_minutes", matrix.bin_minutes()}};
  json providers = json::array();
  for (const ContentProvider& p : matrix.providers()) {
    json locations = json::array();
    for (const auto& per_bin : p.locations_by_bin) locations.push_back(per_bin);
    providers.push_back({{"id", p.id}, {"name", p.name}, {"locations", locations}});
  }
  doc["providers"] = providers;
  json demands = json::array();
  json background = json::array();
  for (std::size_t t = 0; t < matrix.bin_count(); ++t) {
    for (const ContentDemand& d : matrix.bin(t).demands) {
      demands.push_back(
          {{"bin", t}, {"consumer", d.consumer}, {"provider", d.provider}, {"volume", d.volume}});
    }
    for (const BackgroundDemand& b : matrix.bin(t).background) {
      background.push_back({{"bin", t},
                            {"origin", b.origin},
                            {"destination", b.destination},
                            {"volume", b.volume}});
    }
  }
  doc["demands"] = demands;
  doc["background"] = background;
  return doc.dump(1) + "\n";
}

double default_cumulative_share(std::size_t rank) {
  return cumulative_curve(static_cast<double>(rank));
}

std::vector<CpProfile> default_cp_profiles(std::size_t provider_count, int max_locations) {
  std::vector<CpProfile> out;
  for (std::size_t r = 1; r <= provider_count; ++r) {
    const double before = default_cumulative_share(r - 1);
    CpProfile profile;
    profile.share = default_cumulative_share(r) - before;
    if (before < 0.5) {
      profile.location_count = 8;
    } else if (before < 0.6) {
      profile.location_count = 4;
    } else if (before < 0.7) {
      profile.location_count = 2;
    } else {
      profile.location_count = 1;
    }
    profile.location_count = std::max(1, std::min(profile.location_count, max_locations));
    out.push_back(profile);
  }
  return out;
}

ContentDemandMatrix generate_gravity_demands(const NetworkTopology& topo,
                                             std::span<const double> node_masses,
                                             double total_volume,
                                             std::span<const CpProfile> cp_profiles,
                                             std::uint64_t seed, const GravityOptions& options) {
  const std::size_t n = topo.node_count();
  if (node_masses.size() != n) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("gravity: {} masses for {} nodes", node_masses.size(), n));
  }
  double mass_total = 0.0;
  for (double m : node_masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorKind::kInvalidInput, "gravity: masses must be nonnegative");
    }
    mass_total += m;
  }
  if (!(mass_total > 0.0)) throw Error(ErrorKind::kInvalidInput, "gravity: all masses are zero");
  if (!(total_volume >= 0.0)) throw Error(ErrorKind::kInvalidInput, "gravity: negative total volume");
  if (options.bins < 1) throw Error(ErrorKind::kInvalidInput, "gravity: bins must be >= 1");
  if (!(options.noise >= 0.0 && options.noise < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "gravity: noise must be in [0, 1)");
  }
  double share_total = 0.0;
  for (const CpProfile& p : cp_profiles) {
    if (!(p.share >= 0.0)) throw Error(ErrorKind::kInvalidInput, "gravity: negative CP share");
    if (p.location_count < 1) {
      throw Error(ErrorKind::kInvalidInput, "gravity: location count must be >= 1");
    }
    share_total += p.share;
  }
  if (share_total > 1.0 + 1e-12) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("gravity: CP shares sum to {} > 1", share_total));
  }

  const std::vector<NodeId> peering = topo.peering_points();
  std::mt19937_64 location_rng(seed);
  std::vector<ContentProvider> providers;
  for (std::size_t k = 0; k < cp_profiles.size(); ++k) {
    const int count = cp_profiles[k].location_count;
    if (static_cast<std::size_t>(count) > peering.size()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("gravity: provider {} wants {} locations but only {} peering nodes",
                              k, count, peering.size()));
    }
    std::vector<NodeId> pool = peering;
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), pool.size() - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[pick(location_rng)]);
    }
    std::vector<NodeId> locations(pool.begin(), pool.begin() + count);
    std::sort(locations.begin(), locations.end());
    ContentProvider p;
    p.id = static_cast<ProviderId>(k);
    p.name = fmt::format("cp{}", k);
    p.locations_by_bin.assign(options.bins, locations);
    providers.push_back(std::move(p));
  }

  double pair_mass = 0.0;
  for (std::size_t o = 0; o < n; ++o) {
    for (std::size_t d = 0; d < n; ++d) {
      if (o != d) pair_mass += node_masses[o] * node_masses[d];
    }
  }
  const double background_total = total_volume * std::max(0.0, 1.0 - share_total);
  if (background_total > 0.0 && !(pair_mass > 0.0)) {
    throw Error(ErrorKind::kInvalidInput,
                "gravity: background volume needs at least two nodes with positive mass");
  }

  std::mt19937_64 noise_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  auto noisy = [&](double v) {
    return options.noise > 0.0 ? v * (1.0 + options.noise * jitter(noise_rng)) : v;
  };

  std::vector<DemandBin> bins(options.bins);
  for (DemandBin& bin : bins) {
    for (std::size_t k = 0; k < cp_profiles.size(); ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (node_masses[j] <= 0.0 || cp_profiles[k].share <= 0.0) continue;
        const double v = total_volume * cp_profiles[k].share * node_masses[j] / mass_total;
        bin.demands.push_back({static_cast<NodeId>(j), static_cast<ProviderId>(k), noisy(v)});
      }
    }
    if (background_total > 0.0) {
      for (std::size_t o = 0; o < n; ++o) {
        for (std::size_t d = 0; d < n; ++d) {
          if (o == d || node_masses[o] * node_masses[d] <= 0.0) continue;
          const double v = background_total * node_masses[o] * node_masses[d] / pair_mass;
          bin.background.push_back({static_cast<NodeId>(o), static_cast<NodeId>(d), noisy(v)});
        }
      }
    }
  }
  return ContentDemandMatrix(n, options.bin_minutes, std::move(providers), std::move(bins));
}

ContentDemandMatrix scale_diurnal(const ContentDemandMatrix& matrix,
                                  std::span<const double> profile) {
  if (profile.size() != matrix.bin_count()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("diurnal profile length {} does not match {} bins", profile.size(),
                            matrix.bin_count()));
  }
  std::vector<DemandBin> bins = matrix.bins();
  for (std::size_t t = 0; t < bins.size(); ++t) {
    if (!(profile[t] >= 0.0) || !std::isfinite(profile[t])) {
      throw Error(ErrorKind::kInvalidInput, fmt::format("diurnal multiplier {} is negative", t));
    }
    for (ContentDemand& d : bins[t].demands) d.volume *= profile[t];
    for (BackgroundDemand& b : bins[t].background) b.volume *= profile[t];
  }
  return ContentDemandMatrix(matrix.node_count(), matrix.bin_minutes(), matrix.providers(),
                             std::move(bins));
}

std::vector<double> sinusoidal_profile(std::size_t bins, double min, double max,
                                       double period_bins, double phase_bins) {
  if (!(period_bins > 0.0) || min < 0.0 || max < min) {
    throw Error(ErrorKind::kInvalidInput, "diurnal profile: need 0 <= min <= max and period > 0");
  }
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  std::vector<double> out(bins);
  for (std::size_t t = 0; t < bins; ++t) {
    const double phase = (static_cast<double>(t) - phase_bins) / period_bins;
    out[t] = min + (max - min) * 0.5 * (1.0 - std::cos(kTwoPi * phase));
  }
  return out;
}

ContentDemandMatrix apply_scenario_multiplier(const ContentDemandMatrix& matrix,
                                              ProviderId provider, double factor) {
  if (!matrix.has_provider(provider)) {
    throw Error(ErrorKind::kUnknownId, fmt::format("unknown provider {}", provider));
  }
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorKind::kInvalidInput, "scenario multiplier must be a finite factor >= 0");
  }
  std::vector<DemandBin> bins = matrix.bins();
  for (DemandBin& bin : bins) {
    for (ContentDemand& d : bin.demands) {
      if (d.provider == provider) d.volume *= factor;
    }
  }
  return ContentDemandMatrix(matrix.node_count(), matrix.bin_minutes(), matrix.providers(),
                             std::move(bins));
}

double BinSplit::adjustable_volume() const {
  double sum = 0.0;
  for (const SubFlowDemand& d : adjustable) sum += d.volume;
  return sum;
}

double BinSplit::fixed_volume() const {
  double sum = 0.0;
  for (const SubFlowDemand& d : fixed_content) sum += d.volume;
  for (const BackgroundDemand& b : background) sum += b.volume;
  return sum;
}

BinSplit split_adjustable(const ContentDemandMatrix& matrix, std::size_t bin,
                          const std::set<ProviderId>& participating) {
  if (bin >= matrix.bin_count()) {
    throw Error(ErrorKind::kInvalidInput, fmt::format("bin {} out of range", bin));
  }
  BinSplit split;
  split.bin = bin;
  for (const ContentDemand& d : matrix.bin(bin).demands) {
    const std::vector<NodeId>& locations = matrix.provider(d.provider).locations(bin);
    SubFlowDemand sub{d.consumer, d.provider, d.volume, locations};
    if (participating.contains(d.provider) && locations.size() >= 2) {
      split.adjustable.push_back(std::move(sub));
    } else {
      split.fixed_content.push_back(std::move(sub));
    }
  }
  split.background = matrix.bin(bin).background;
  return split;
}

std::vector<ProviderId> rank_providers(const ContentDemandMatrix& matrix) {
  std::map<ProviderId, double> volume;
  for (const ContentProvider& p : matrix.providers()) volume[p.id] = 0.0;
  for (const DemandBin& bin : matrix.bins()) {
    for (const ContentDemand& d : bin.demands) volume[d.provider] += d.volume;
  }
  std::vector<ProviderId> ids;
  for (const auto& [id, v] : volume) ids.push_back(id);
  std::stable_sort(ids.begin(), ids.end(),
                   [&](ProviderId a, ProviderId b) { return volume[a] > volume[b]; });
  return ids;
}

std::set<ProviderId> select_top_k(const ContentDemandMatrix& matrix, std::size_t k) {
  const std::vector<ProviderId> ranked = rank_providers(matrix);
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size()))};
}

}  // namespace cate
