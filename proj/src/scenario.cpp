#include "cate/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "cate/lp_oracle.hpp"

namespace cate {

namespace {

using nlohmann::json;

ConfigError single_violation(std::string field, std::string constraint) {
  return ConfigError(std::vector<ConfigViolation>{{std::move(field), std::move(constraint)}});
}

std::string join_violations(const std::vector<ConfigViolation>& violations) {
  std::string out;
  for (const ConfigViolation& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.field + ": " + v.constraint;
  }
  return out;
}

// Collects every violation instead of stopping at the first.
class Checker {
 public:
  void fail(std::string field, std::string constraint) {
    violations_.push_back({std::move(field), std::move(constraint)});
  }
  const std::vector<ConfigViolation>& violations() const { return violations_; }

  void allow_only(const json& object, const std::string& prefix,
                  std::initializer_list<std::string_view> keys) {
    for (const auto& [key, value] : object.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(prefix + key, "unknown field");
      }
    }
  }

  const json* object(const json& parent, const std::string& key, const std::string& field) {
    if (!parent.contains(key)) return nullptr;
    const json& v = parent.at(key);
    if (!v.is_object()) {
      fail(field, "must be an object");
      return nullptr;
    }
    return &v;
  }

  std::optional<double> number(const json& parent, const std::string& key, const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_number()) {
      fail(field, "must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::int64_t> integer(const json& parent, const std::string& key,
                                      const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_number_integer()) {
      fail(field, "must be an integer");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<std::uint64_t> seed(const json& parent, const std::string& key,
                                    const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(field, "must be an integer ≥ 0");
      return std::nullopt;
    }
    return v.get<std::uint64_t>();
  }

  std::optional<bool> boolean(const json& parent, const std::string& key, const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_boolean()) {
      fail(field, "must be true or false");
      return std::nullopt;
    }
    return v.get<bool>();
  }

  std::optional<std::string> string(const json& parent, const std::string& key,
                                    const std::string& field) {
    if (!parent.contains(key)) return std::nullopt;
    const json& v = parent.at(key);
    if (!v.is_string()) {
      fail(field, "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

 private:
  std::vector<ConfigViolation> violations_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() || base.empty() ? path : base / path).lexically_normal();
}

template <typename Parse>
auto parse_enum(Checker& check, const std::string& value, const std::string& field, Parse parse)
    -> std::optional<decltype(parse(value))> {
  try {
    return parse(value);
  } catch (const Error&) {
    check.fail(field, fmt::format("unknown value '{}'", value));
    return std::nullopt;
  }
}

EngineKind parse_engine(std::string_view name) {
  if (name == "offline") return EngineKind::kOffline;
  if (name == "online") return EngineKind::kOnline;
  throw Error(ErrorKind::kConfig, fmt::format("unknown engine '{}'", name));
}

void read_generator(Checker& check, const json& g, GeneratorConfig& out) {
  const std::string p = "demands.generator.";
  check.allow_only(g, p, {"seed", "total_volume", "providers", "max_locations", "bins",
                          "bin_minutes", "noise", "masses", "diurnal"});
  if (auto v = check.seed(g, "seed", p + "seed")) out.seed = *v;
  if (auto v = check.number(g, "total_volume", p + "total_volume")) {
    if (*v < 0.0) check.fail(p + "total_volume", "total_volume ≥ 0");
    out.total_volume = *v;
  }
  if (auto v = check.integer(g, "providers", p + "providers")) {
    if (*v < 0) check.fail(p + "providers", "providers ≥ 0");
    else out.providers = static_cast<std::size_t>(*v);
  }
  if (auto v = check.integer(g, "max_locations", p + "max_locations")) {
    if (*v < 1) check.fail(p + "max_locations", "max_locations ≥ 1");
    else out.max_locations = static_cast<int>(*v);
  }
  if (auto v = check.integer(g, "bins", p + "bins")) {
    if (*v < 1) check.fail(p + "bins", "bins ≥ 1");
    else out.bins = static_cast<std::size_t>(*v);
  }
  if (auto v = check.number(g, "bin_minutes", p + "bin_minutes")) {
    if (!(*v > 0.0)) check.fail(p + "bin_minutes", "bin_minutes > 0");
    out.bin_minutes = *v;
  }
  if (auto v = check.number(g, "noise", p + "noise")) {
    if (!(*v >= 0.0 && *v < 1.0)) check.fail(p + "noise", "0 ≤ noise < 1");
    out.noise = *v;
  }
  if (g.contains("masses")) {
    const json& m = g.at("masses");
    if (!m.is_array()) {
      check.fail(p + "masses", "must be an array of numbers");
    } else {
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m[i].is_number() || m[i].get<double>() < 0.0) {
          check.fail(fmt::format("{}masses[{}]", p, i), "mass ≥ 0");
        } else {
          out.masses.push_back(m[i].get<double>());
        }
      }
    }
  }
  if (const json* d = check.object(g, "diurnal", p + "diurnal")) {
    const std::string q = p + "diurnal.";
    check.allow_only(*d, q, {"min", "max", "period_bins", "phase_bins"});
    DiurnalConfig dc;
    if (auto v = check.number(*d, "min", q + "min")) dc.min = *v;
    if (auto v = check.number(*d, "max", q + "max")) dc.max = *v;
    if (auto v = check.number(*d, "period_bins", q + "period_bins")) dc.period_bins = *v;
    if (auto v = check.number(*d, "phase_bins", q + "phase_bins")) dc.phase_bins = *v;
    if (dc.min < 0.0 || dc.max < dc.min) check.fail(q + "min", "0 ≤ min ≤ max");
    if (!(dc.period_bins > 0.0)) check.fail(q + "period_bins", "period_bins > 0");
    out.diurnal = dc;
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, fmt::format("cannot write {}", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, fmt::format("cannot rename {}: {}", tmp.string(), ec.message()));
}

std::string variant_label(double factor) { return fmt::format("x{}", factor); }

// Runs task(i) for i in [0, count) on up to `workers` threads. Rethrows the
// failure of the lowest failing index so errors are deterministic.
template <typename Task>
void parallel_for(std::size_t count, std::size_t workers, Task task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, count));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct VariantInput {
  std::string label;
  double factor = 1.0;
  ContentDemandMatrix matrix;
  std::set<ProviderId> participating;
};

struct BinInputs {
  BinProblem problem;
  AssignmentResult baseline;
};

BinInputs prepare_bin(const VariantInput& v, std::size_t t, const NetworkTopology& topo,
                      const RoutingMatrix& routing, const BaselineOptions& baseline) {
  const BinSplit split = split_adjustable(v.matrix, t, v.participating);
  return {make_bin_problem(split, routing, baseline), baseline_assign(split, topo, routing, baseline)};
}

struct CateBin {
  AssignmentResult result;
  int iterations = 0;
  bool converged = true;
  std::vector<double> objective_history;
};

CateBin solve_cate(const ScenarioConfig& config, const BinInputs& in, std::size_t t,
                   const NetworkTopology& topo, const RoutingMatrix& routing,
                   ObjectiveKind objective, const FlowAssignment* warm) {
  if (config.engine == EngineKind::kOnline) {
    std::optional<std::uint64_t> shuffle;
    if (config.shuffle_seed) shuffle = *config.shuffle_seed ^ (0x9e3779b97f4a7c15ULL * (t + 1));
    const std::vector<Request> requests =
        make_requests(in.problem.adjustable, config.quantum_count, shuffle);
    AssignmentResult online =
        online_greedy_assign(requests, topo, routing, EligibleSets(in.problem.adjustable),
                             recompute_state(in.problem.fixed, topo, routing), objective);
    FlowAssignment full = in.problem.fixed;
    full.append(online.assignment);
    full.canonicalize();
    return {{std::move(full), std::move(online.state)}, 0, true, {}};
  }
  GreedySortFlowOptions options;
  options.max_iterations = config.max_iterations;
  GreedySortFlowResult r = greedy_sort_flow(in.problem, warm ? *warm : in.baseline.assignment,
                                            topo, routing, objective, options);
  return {{std::move(r.assignment), std::move(r.state)}, r.iterations_used, r.converged,
          std::move(r.objective_history)};
}

double solve_oracle(const BinInputs& in, const NetworkTopology& topo, const RoutingMatrix& routing) {
  return solve_lp(build_lp(in.problem, topo, routing)).max_utilization;
}

std::string objective_file_stem(const ScenarioConfig& config, const VariantRun& v,
                                ObjectiveKind objective) {
  return fmt::format("{}_{}_{}", config.name, v.label, to_string(objective));
}

}  // namespace

std::string_view to_string(EngineKind kind) {
  return kind == EngineKind::kOffline ? "offline" : "online";
}

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : Error(ErrorKind::kConfig, join_violations(violations)), violations_(std::move(violations)) {}

ScenarioConfig validate_config(std::string_view document, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw single_violation("<document>", fmt::format("not valid JSON ({})", e.what()));
  }
  if (!doc.is_object()) throw single_violation("<document>", "must be a JSON object");

  Checker check;
  ScenarioConfig config;
  check.allow_only(doc, "", {"name", "topology", "demands", "objectives", "participation",
                             "baseline", "engine", "lp_check", "what_if", "sweep", "output",
                             "workers"});

  if (auto v = check.string(doc, "name", "name")) {
    if (v->empty() || v->find_first_of("/\\") != std::string::npos) {
      check.fail("name", "non-empty, without path separators");
    }
    config.name = *v;
  }
  if (auto v = check.string(doc, "topology", "topology")) {
    config.topology = resolve(base_dir, *v);
  } else if (!doc.contains("topology")) {
    check.fail("topology", "required");
  }

  if (const json* d = check.object(doc, "demands", "demands")) {
    check.allow_only(*d, "demands.", {"file", "generator"});
    const bool has_file = d->contains("file");
    const bool has_generator = d->contains("generator");
    if (has_file == has_generator) check.fail("demands", "exactly one demand source");
    if (auto v = check.string(*d, "file", "demands.file")) config.demand_file = resolve(base_dir, *v);
    if (const json* g = check.object(*d, "generator", "demands.generator")) {
      GeneratorConfig gen;
      read_generator(check, *g, gen);
      config.generator = gen;
    }
  } else if (!doc.contains("demands")) {
    check.fail("demands", "exactly one demand source");
  }

  if (doc.contains("objectives")) {
    const json& o = doc.at("objectives");
    std::vector<json> names;
    if (o.is_string()) {
      names.push_back(o);
    } else if (o.is_array() && !o.empty()) {
      names.assign(o.begin(), o.end());
    } else {
      check.fail("objectives", "a non-empty list of objective names");
    }
    config.objectives.clear();
    for (std::size_t i = 0; i < names.size(); ++i) {
      const std::string field = fmt::format("objectives[{}]", i);
      if (!names[i].is_string()) {
        check.fail(field, "must be a string");
        continue;
      }
      if (auto k = parse_enum(check, names[i].get<std::string>(), field, parse_objective)) {
        if (std::find(config.objectives.begin(), config.objectives.end(), *k) != config.objectives.end()) {
          check.fail(field, "listed twice");
        } else {
          config.objectives.push_back(*k);
        }
      }
    }
  }

  if (const json* p = check.object(doc, "participation", "participation")) {
    check.allow_only(*p, "participation.", {"top_k", "providers"});
    if (p->contains("top_k") && p->contains("providers")) {
      check.fail("participation", "either top_k or providers, not both");
    }
    if (auto k = check.integer(*p, "top_k", "participation.top_k")) {
      if (*k < 0) check.fail("participation.top_k", "K ≥ 0");
      else config.top_k = static_cast<std::size_t>(*k);
    }
    if (p->contains("providers")) {
      const json& ids = p->at("providers");
      if (!ids.is_array()) {
        check.fail("participation.providers", "must be an array of provider ids");
      } else {
        std::vector<ProviderId> list;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          if (!ids[i].is_number_integer()) {
            check.fail(fmt::format("participation.providers[{}]", i), "must be an integer");
          } else {
            list.push_back(ids[i].get<ProviderId>());
          }
        }
        config.providers = list;
      }
    }
  }

  if (const json* b = check.object(doc, "baseline", "baseline")) {
    check.allow_only(*b, "baseline.", {"policy", "seed"});
    if (auto v = check.string(*b, "policy", "baseline.policy")) {
      if (auto k = parse_enum(check, *v, "baseline.policy", parse_baseline)) config.baseline.policy = *k;
    }
    if (auto v = check.seed(*b, "seed", "baseline.seed")) config.baseline.seed = *v;
  }

  if (const json* e = check.object(doc, "engine", "engine")) {
    check.allow_only(*e, "engine.", {"kind", "quantum_count", "shuffle_seed", "max_iterations",
                                     "warm_start"});
    if (auto v = check.string(*e, "kind", "engine.kind")) {
      if (auto k = parse_enum(check, *v, "engine.kind", parse_engine)) config.engine = *k;
    }
    if (auto v = check.integer(*e, "quantum_count", "engine.quantum_count")) {
      if (*v < 1) check.fail("engine.quantum_count", "Q ≥ 1");
      else config.quantum_count = static_cast<std::size_t>(*v);
    }
    if (auto v = check.seed(*e, "shuffle_seed", "engine.shuffle_seed")) config.shuffle_seed = *v;
    if (auto v = check.integer(*e, "max_iterations", "engine.max_iterations")) {
      if (*v < 1) check.fail("engine.max_iterations", "max_iterations ≥ 1");
      else config.max_iterations = static_cast<int>(std::min<std::int64_t>(*v, 1000000));
    }
    if (auto v = check.boolean(*e, "warm_start", "engine.warm_start")) config.warm_start = *v;
  }

  if (auto v = check.boolean(doc, "lp_check", "lp_check")) config.lp_check = *v;

  auto read_factor = [&](const json& entry, const std::string& field) -> std::optional<double> {
    auto f = check.number(entry, "factor", field + ".factor");
    if (!entry.contains("factor")) check.fail(field + ".factor", "required");
    if (f && (!(*f >= 0.0) || !std::isfinite(*f))) {
      check.fail(field + ".factor", "factor ≥ 0");
      return std::nullopt;
    }
    return f;
  };
  if (doc.contains("what_if")) {
    const json& w = doc.at("what_if");
    if (!w.is_array()) {
      check.fail("what_if", "must be an array of {provider, factor}");
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string field = fmt::format("what_if[{}]", i);
        if (!w[i].is_object()) {
          check.fail(field, "must be an object");
          continue;
        }
        check.allow_only(w[i], field + ".", {"provider", "factor"});
        auto id = check.integer(w[i], "provider", field + ".provider");
        if (!w[i].contains("provider")) check.fail(field + ".provider", "required");
        auto f = read_factor(w[i], field);
        if (id && f) config.what_if.push_back({static_cast<ProviderId>(*id), *f});
      }
    }
  }

  if (const json* s = check.object(doc, "sweep", "sweep")) {
    check.allow_only(*s, "sweep.", {"provider", "factors"});
    SweepConfig sweep;
    if (auto id = check.integer(*s, "provider", "sweep.provider")) sweep.provider = static_cast<ProviderId>(*id);
    else if (!s->contains("provider")) check.fail("sweep.provider", "required");
    const json* factors = s->contains("factors") ? &s->at("factors") : nullptr;
    if (factors == nullptr || !factors->is_array() || factors->empty()) {
      check.fail("sweep.factors", "a non-empty list of factors");
    } else {
      for (std::size_t i = 0; i < factors->size(); ++i) {
        const json& f = (*factors)[i];
        const std::string field = fmt::format("sweep.factors[{}]", i);
        if (!f.is_number() || !(f.get<double>() >= 0.0) || !std::isfinite(f.get<double>())) {
          check.fail(field, "factor ≥ 0");
        } else {
          const double value = f.get<double>();
          if (std::find(sweep.factors.begin(), sweep.factors.end(), value) != sweep.factors.end()) {
            check.fail(field, "listed twice");
          } else {
            sweep.factors.push_back(value);
          }
        }
      }
    }
    config.sweep = sweep;
  }

  if (const json* o = check.object(doc, "output", "output")) {
    check.allow_only(*o, "output.", {"directory", "formats", "assignments", "normalize"});
    if (auto v = check.string(*o, "directory", "output.directory")) {
      config.output.directory = resolve(base_dir, *v);
    }
    if (o->contains("formats")) {
      const json& f = o->at("formats");
      if (!f.is_array() || f.empty()) {
        check.fail("output.formats", "a non-empty list of \"csv\" or \"json\"");
      } else {
        config.output.formats.clear();
        for (std::size_t i = 0; i < f.size(); ++i) {
          const std::string field = fmt::format("output.formats[{}]", i);
          if (!f[i].is_string()) {
            check.fail(field, "must be a string");
          } else if (auto k = parse_enum(check, f[i].get<std::string>(), field, parse_report_format)) {
            if (std::find(config.output.formats.begin(), config.output.formats.end(), *k) ==
                config.output.formats.end()) {
              config.output.formats.push_back(*k);
            }
          }
        }
      }
    }
    if (auto v = check.boolean(*o, "assignments", "output.assignments")) config.output.assignments = *v;
    if (auto v = check.boolean(*o, "normalize", "output.normalize")) config.output.normalize = *v;
  } else if (!base_dir.empty()) {
    config.output.directory = (base_dir / config.output.directory).lexically_normal();
  }

  if (auto v = check.integer(doc, "workers", "workers")) {
    if (*v < 1) check.fail("workers", "workers ≥ 1");
    else config.workers = static_cast<std::size_t>(*v);
  }

  if (!check.violations().empty()) throw ConfigError(check.violations());
  return config;
}

std::string apply_overrides(std::string_view document, std::span<const std::string> overrides) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw single_violation("<document>", fmt::format("not valid JSON ({})", e.what()));
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw single_violation(o, "override must look like path.to.field=value");
    }
    const std::string path = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (key.empty()) throw single_violation(path, "empty path segment");
      if (!node->is_object()) throw single_violation(path, "parent is not an object");
      if (dot == std::string::npos) {
        (*node)[key] = value;
        break;
      }
      node = &(*node)[key];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
  return doc.dump(1);
}

ScenarioConfig load_config_file(const std::filesystem::path& path,
                                std::span<const std::string> overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot read config {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  const std::string document = overrides.empty() ? text.str() : apply_overrides(text.str(), overrides);
  return validate_config(document, path.parent_path());
}

std::size_t effective_workers(const ScenarioConfig& config) {
  const char* env = std::getenv(kWorkersEnv);
  if (env == nullptr || *env == '\0') return config.workers;
  char* end = nullptr;
  const long long v = std::strtoll(env, &end, 10);
  if (*end != '\0' || v < 1) {
    throw Error(ErrorKind::kConfig, fmt::format("{}: workers ≥ 1 (got '{}')", kWorkersEnv, env));
  }
  return static_cast<std::size_t>(v);
}

ContentDemandMatrix load_demands(const ScenarioConfig& config, const NetworkTopology& topo) {
  std::optional<ContentDemandMatrix> matrix;
  if (config.demand_file) {
    matrix = ingest_demands_file(*config.demand_file, topo);
  } else if (config.generator) {
    const GeneratorConfig& g = *config.generator;
    std::vector<double> masses = g.masses;
    if (masses.empty()) masses.assign(topo.node_count(), 1.0);
    if (masses.size() != topo.node_count()) {
      throw Error(ErrorKind::kInvalidInput,
                  fmt::format("demands.generator.masses has {} entries for {} nodes",
                              masses.size(), topo.node_count()));
    }
    GravityOptions options;
    options.bins = g.bins;
    options.bin_minutes = g.bin_minutes;
    options.noise = g.noise;
    const std::vector<CpProfile> profiles = default_cp_profiles(g.providers, g.max_locations);
    matrix = generate_gravity_demands(topo, masses, g.total_volume, profiles, g.seed, options);
    if (g.diurnal) {
      const DiurnalConfig& d = *g.diurnal;
      matrix = scale_diurnal(*matrix, sinusoidal_profile(g.bins, d.min, d.max, d.period_bins,
                                                         d.phase_bins));
    }
  } else {
    throw single_violation("demands", "exactly one demand source");
  }
  for (const WhatIf& w : config.what_if) {
    matrix = apply_scenario_multiplier(*matrix, w.provider, w.factor);
  }
  return std::move(*matrix);
}

std::set<ProviderId> participating_providers(const ScenarioConfig& config,
                                             const ContentDemandMatrix& matrix) {
  if (config.providers) {
    for (ProviderId id : *config.providers) {
      if (!matrix.has_provider(id)) {
        throw Error(ErrorKind::kUnknownId, fmt::format("participation: unknown provider {}", id));
      }
    }
    return {config.providers->begin(), config.providers->end()};
  }
  return select_top_k(matrix, config.top_k.value_or(matrix.providers().size()));
}

PeakSummary summarize_peak(std::span<const MetricsReport> baseline,
                           std::span<const MetricsReport> cate) {
  PeakSummary s;
  double sum = 0.0;
  for (std::size_t t = 0; t < baseline.size() && t < cate.size(); ++t) {
    s.baseline_peak = std::max(s.baseline_peak, baseline[t].max_link_utilization);
    s.cate_peak = std::max(s.cate_peak, cate[t].max_link_utilization);
    sum += relative_reduction(baseline[t].max_link_utilization, cate[t].max_link_utilization);
    const double b = baseline[t].max_link_utilization;
    if (cate[t].max_link_utilization < b - 1e-12 * std::max(1.0, b)) ++s.bins_improved;
  }
  s.peak_reduction = relative_reduction(s.baseline_peak, s.cate_peak);
  s.mean_reduction = baseline.empty() ? 0.0 : sum / static_cast<double>(baseline.size());
  return s;
}

ScenarioResult evaluate_scenario(const ScenarioConfig& config) {
  const NetworkTopology topo = load_topology_file(config.topology);
  const RoutingMatrix routing = compute_routing(topo);
  const ContentDemandMatrix base = load_demands(config, topo);
  const std::size_t workers = effective_workers(config);

  std::vector<VariantInput> inputs;
  auto participating = [&](const ContentDemandMatrix& m) { return participating_providers(config, m); };
  if (config.sweep) {
    for (double f : config.sweep->factors) {
      ContentDemandMatrix m = apply_scenario_multiplier(base, config.sweep->provider, f);
      std::set<ProviderId> p = participating(m);
      inputs.push_back({variant_label(f), f, std::move(m), std::move(p)});
    }
  } else {
    inputs.push_back({"base", 1.0, base, participating(base)});
  }

  const std::size_t bins = base.bin_count();
  const std::size_t objectives = config.objectives.size();
  ScenarioResult result;
  for (const VariantInput& in : inputs) {
    VariantRun v;
    v.label = in.label;
    v.factor = in.factor;
    v.baseline.resize(bins);
    if (config.output.assignments) v.baseline_assignments.resize(bins);
    for (ObjectiveKind k : config.objectives) {
      ObjectiveRun run;
      run.objective = k;
      run.cate.resize(bins);
      if (config.engine == EngineKind::kOffline) {
        run.iterations.resize(bins);
        run.converged.resize(bins);
        run.objective_history.resize(bins);
      }
      if (config.lp_check && k == ObjectiveKind::kMaxLinkUtilization) run.lp_optimum.resize(bins);
      if (config.output.assignments) run.assignments.resize(bins);
      v.objectives.push_back(std::move(run));
    }
    result.variants.push_back(std::move(v));
  }

  auto with_context = [&](const VariantInput& in, std::size_t t, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("variant {} bin {}: {}", in.label, t, e.what()));
    }
  };

  auto record = [&](VariantRun& v, std::size_t o, std::size_t t, const CateBin& c) {
    ObjectiveRun& run = v.objectives[o];
    run.cate[t] = compute_metrics(c.result.assignment, c.result.state, routing, topo, t);
    if (config.engine == EngineKind::kOffline) {
      run.iterations[t] = c.iterations;
      run.converged[t] = c.converged;
      run.objective_history[t] = c.objective_history;
    }
    if (config.output.assignments) run.assignments[t] = c.result.assignment;
  };

  auto baseline_bin = [&](VariantRun& v, const BinInputs& in, std::size_t t) {
    v.baseline[t] = compute_metrics(in.baseline.assignment, in.baseline.state, routing, topo, t);
    if (config.output.assignments) v.baseline_assignments[t] = in.baseline.assignment;
  };

  if (config.warm_start && config.engine == EngineKind::kOffline) {
    // Each (variant, objective) chain is sequential over bins.
    parallel_for(inputs.size() * objectives, workers, [&](std::size_t task) {
      const std::size_t vi = task / objectives;
      const std::size_t o = task % objectives;
      const VariantInput& in = inputs[vi];
      VariantRun& v = result.variants[vi];
      std::optional<FlowAssignment> previous;
      for (std::size_t t = 0; t < bins; ++t) {
        with_context(in, t, [&]() {
          const BinInputs bin = prepare_bin(in, t, topo, routing, config.baseline);
          if (o == 0) baseline_bin(v, bin, t);
          CateBin c = solve_cate(config, bin, t, topo, routing, config.objectives[o],
                                 previous ? &*previous : nullptr);
          if (!v.objectives[o].lp_optimum.empty()) {
            v.objectives[o].lp_optimum[t] = solve_oracle(bin, topo, routing);
          }
          record(v, o, t, c);
          previous = std::move(c.result.assignment);
        });
      }
    });
  } else {
    parallel_for(inputs.size() * bins, workers, [&](std::size_t task) {
      const std::size_t vi = task / bins;
      const std::size_t t = task % bins;
      const VariantInput& in = inputs[vi];
      VariantRun& v = result.variants[vi];
      with_context(in, t, [&]() {
        const BinInputs bin = prepare_bin(in, t, topo, routing, config.baseline);
        baseline_bin(v, bin, t);
        for (std::size_t o = 0; o < objectives; ++o) {
          record(v, o, t, solve_cate(config, bin, t, topo, routing, config.objectives[o], nullptr));
          if (!v.objectives[o].lp_optimum.empty()) {
            v.objectives[o].lp_optimum[t] = solve_oracle(bin, topo, routing);
          }
        }
      });
    });
  }
  return result;
}

void write_reports(const ScenarioConfig& config, ScenarioResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.output.directory, ec);
  if (ec) {
    throw Error(ErrorKind::kIo, fmt::format("cannot create {}: {}",
                                            config.output.directory.string(), ec.message()));
  }
  auto emit = [&](const std::string& file, const std::string& content) {
    const std::filesystem::path path = config.output.directory / file;
    write_atomic(path, content);
    result.files.push_back(path);
  };

  nlohmann::ordered_json summary;
  summary["name"] = config.name;
  summary["engine"] = to_string(config.engine);
  summary["baseline"] = to_string(config.baseline.policy);
  summary["variants"] = nlohmann::ordered_json::array();
  std::string sweep_csv =
      "factor,objective,baseline_peak_max_link_utilization,cate_peak_max_link_utilization,"
      "peak_reduction,mean_reduction,bins_improved\n";

  for (const VariantRun& v : result.variants) {
    nlohmann::ordered_json vj;
    vj["variant"] = v.label;
    vj["factor"] = v.factor;
    vj["objectives"] = nlohmann::ordered_json::array();
    if (config.output.assignments) {
      std::vector<std::pair<std::size_t, FlowAssignment>> rows;
      for (std::size_t t = 0; t < v.baseline_assignments.size(); ++t) rows.emplace_back(t, v.baseline_assignments[t]);
      std::ostringstream out;
      write_assignment_csv(out, rows);
      emit(fmt::format("{}_{}_baseline_assignments.csv", config.name, v.label), out.str());
    }
    for (const ObjectiveRun& run : v.objectives) {
      const std::string stem = objective_file_stem(config, v, run.objective);
      for (ReportFormat f : config.output.formats) {
        TimeseriesOptions options{f, config.output.normalize};
        emit(fmt::format("{}.{}", stem, to_string(f)), comparison_report(v.baseline, run.cate, options));
      }
      if (config.output.assignments) {
        std::vector<std::pair<std::size_t, FlowAssignment>> rows;
        for (std::size_t t = 0; t < run.assignments.size(); ++t) rows.emplace_back(t, run.assignments[t]);
        std::ostringstream out;
        write_assignment_csv(out, rows);
        emit(stem + "_assignments.csv", out.str());
      }
      const PeakSummary peak = summarize_peak(v.baseline, run.cate);
      nlohmann::ordered_json oj;
      oj["objective"] = to_string(run.objective);
      oj["bins"] = run.cate.size();
      oj["baseline_peak_max_link_utilization"] = peak.baseline_peak;
      oj["cate_peak_max_link_utilization"] = peak.cate_peak;
      oj["peak_reduction"] = peak.peak_reduction;
      oj["mean_max_link_utilization_reduction"] = peak.mean_reduction;
      oj["bins_improved"] = peak.bins_improved;
      double traffic = 0.0;
      for (std::size_t t = 0; t < run.cate.size(); ++t) {
        traffic += relative_reduction(v.baseline[t].total_traffic, run.cate[t].total_traffic);
      }
      oj["mean_total_traffic_reduction"] = run.cate.empty() ? 0.0 : traffic / static_cast<double>(run.cate.size());
      if (!run.iterations.empty()) {
        oj["max_iterations_used"] = *std::max_element(run.iterations.begin(), run.iterations.end());
        oj["non_converged_bins"] = std::count(run.converged.begin(), run.converged.end(), false);
      }
      if (!run.lp_optimum.empty()) {
        std::string lp_csv = "bin,lp_max_link_utilization,cate_max_link_utilization,gap\n";
        double worst = 0.0;
        for (std::size_t t = 0; t < run.lp_optimum.size(); ++t) {
          const double gap = run.cate[t].max_link_utilization - run.lp_optimum[t];
          worst = std::max(worst, gap);
          lp_csv += fmt::format("{},{},{},{}\n", t, run.lp_optimum[t], run.cate[t].max_link_utilization, gap);
        }
        emit(stem + "_lp.csv", lp_csv);
        oj["max_lp_gap"] = worst;
      }
      vj["objectives"].push_back(oj);
      sweep_csv += fmt::format("{},{},{},{},{},{},{}\n", v.factor, to_string(run.objective),
                               peak.baseline_peak, peak.cate_peak, peak.peak_reduction,
                               peak.mean_reduction, peak.bins_improved);
    }
    summary["variants"].push_back(vj);
  }
  if (config.sweep) emit(config.name + "_sweep.csv", sweep_csv);
  emit(config.name + "_summary.json", summary.dump(1) + "\n");
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  ScenarioResult result = evaluate_scenario(config);
  write_reports(config, result);
  return result;
}

}  // namespace cate
