// cate: content-aware traffic engineering simulator.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cate/demand.hpp"
#include "cate/lp_oracle.hpp"
#include "cate/scenario.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int report_error(std::string_view category, std::string_view message) {
  std::string flat(message);
  for (char& c : flat) {
    if (c == '\n' || c == '\t') c = ' ';
  }
  fmt::print(std::cerr, "error\t{}\t{}\n", category, flat);
  return category == "config" || category == "usage" ? kExitConfig : kExitFailure;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cate::Error(cate::ErrorKind::kIo, fmt::format("cannot write {}", path));
  out << text;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw cate::Error(cate::ErrorKind::kConfig, fmt::format("'{}' is not a number", item));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Content-aware traffic engineering simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::size_t> workers;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Scenario config (JSON)")->required();
    sub->add_option("--set", overrides, "Override a config field: path.to.field=value");
  };

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write reports");
  add_config(run);
  run->add_option("--workers", workers, "Worker threads (overrides CATE_WORKERS and the config)")
      ->check(CLI::PositiveNumber);

  CLI::App* validate = app.add_subcommand("validate", "Validate a scenario config");
  add_config(validate);

  CLI::App* gen = app.add_subcommand("gen-demands", "Synthesize a gravity-model demand matrix");
  std::string topology_path;
  std::string out_path;
  cate::GeneratorConfig g;
  std::string masses;
  std::optional<double> diurnal_min;
  double diurnal_max = 1.0;
  double diurnal_period = 144.0;
  double diurnal_phase = 0.0;
  gen->add_option("--topology", topology_path, "Topology JSON")->required();
  gen->add_option("--seed", g.seed, "RNG seed");
  gen->add_option("--total-volume", g.total_volume, "Volume per bin before the diurnal profile");
  gen->add_option("--providers", g.providers, "Number of content providers");
  gen->add_option("--max-locations", g.max_locations, "Location cap per provider");
  gen->add_option("--bins", g.bins, "Number of bins")->check(CLI::PositiveNumber);
  gen->add_option("--bin-minutes", g.bin_minutes, "Bin duration");
  gen->add_option("--noise", g.noise, "Multiplicative jitter in [0, 1)");
  gen->add_option("--masses", masses, "Comma-separated node masses (default all 1)");
  gen->add_option("--diurnal-min", diurnal_min, "Enable the diurnal profile with this trough");
  gen->add_option("--diurnal-max", diurnal_max, "Diurnal peak");
  gen->add_option("--diurnal-period", diurnal_period, "Diurnal period in bins");
  gen->add_option("--diurnal-phase", diurnal_phase, "Diurnal phase in bins");
  gen->add_option("-o,--out", out_path, "Output file (default stdout)");

  CLI::App* export_lp = app.add_subcommand("export-lp", "Write one bin's LP oracle instance as MPS");
  add_config(export_lp);
  std::size_t bin = 0;
  export_lp->add_option("--bin", bin, "Bin index");
  export_lp->add_option("-o,--out", out_path, "Output file (default stdout)");

  CLI::App* top_k = app.add_subcommand("top-k", "Rank providers and select the top K");
  add_config(top_k);
  std::size_t k = 10;
  top_k->add_option("-k", k, "Number of providers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    if (*run) {
      if (workers) setenv(cate::kWorkersEnv, std::to_string(*workers).c_str(), 1);
      const cate::ScenarioConfig config = cate::load_config_file(config_path, overrides);
      const cate::ScenarioResult result = cate::run_scenario(config);
      for (const auto& file : result.files) std::cout << file.string() << "\n";
      return 0;
    }
    if (*validate) {
      try {
        const cate::ScenarioConfig config = cate::load_config_file(config_path, overrides);
        fmt::print("ok\t{}\n", config.name);
        return 0;
      } catch (const cate::ConfigError& e) {
        for (const cate::ConfigViolation& v : e.violations()) {
          fmt::print("violation\t{}\t{}\n", v.field, v.constraint);
        }
        throw;
      }
    }
    if (*gen) {
      cate::ScenarioConfig config;
      config.topology = topology_path;
      if (!masses.empty()) g.masses = parse_list(masses);
      if (diurnal_min) g.diurnal = cate::DiurnalConfig{*diurnal_min, diurnal_max, diurnal_period, diurnal_phase};
      config.generator = g;
      const cate::NetworkTopology topo = cate::load_topology_file(topology_path);
      write_text(out_path, cate::serialize_demands(cate::load_demands(config, topo)));
      return 0;
    }
    if (*export_lp) {
      const cate::ScenarioConfig config = cate::load_config_file(config_path, overrides);
      const cate::NetworkTopology topo = cate::load_topology_file(config.topology);
      const cate::RoutingMatrix routing = cate::compute_routing(topo);
      const cate::ContentDemandMatrix matrix = cate::load_demands(config, topo);
      const cate::BinSplit split =
          cate::split_adjustable(matrix, bin, cate::participating_providers(config, matrix));
      const cate::BinProblem problem = cate::make_bin_problem(split, routing, config.baseline);
      std::ostringstream mps;
      cate::write_mps(mps, cate::build_lp(problem, topo, routing), config.name);
      write_text(out_path, mps.str());
      return 0;
    }
    if (*top_k) {
      const cate::ScenarioConfig config = cate::load_config_file(config_path, overrides);
      const cate::NetworkTopology topo = cate::load_topology_file(config.topology);
      const cate::ContentDemandMatrix matrix = cate::load_demands(config, topo);
      const std::vector<cate::ProviderId> ranked = cate::rank_providers(matrix);
      double total = 0.0;
      for (cate::ProviderId id : ranked) total += matrix.provider_volume(id);
      std::cout << "rank,provider,volume,share,locations\n";
      for (std::size_t r = 0; r < ranked.size() && r < k; ++r) {
        const cate::ContentProvider& p = matrix.provider(ranked[r]);
        const double v = matrix.provider_volume(p.id);
        fmt::print("{},{},{},{},{}\n", r + 1, p.id, v, total > 0.0 ? v / total : 0.0,
                   p.locations_by_bin.empty() ? 0 : p.locations(0).size());
      }
      return 0;
    }
  } catch (const cate::Error& e) {
    return report_error(cate::to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
