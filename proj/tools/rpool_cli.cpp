#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rpool/engine.hpp"
#include "rpool/network.hpp"
#include "rpool/reporting.hpp"

namespace {

rpool::Scenario load_with_overrides(const std::string& config, const std::vector<std::string>& sets) {
  auto sc = rpool::load_scenario(config);
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw rpool::ConfigError("--set expects key=value, got '" + s + "'");
    rpool::set_scenario_value(sc, s.substr(0, eq), s.substr(eq + 1));
  }
  return sc;
}

int cmd_simulate(const std::string& config, const std::vector<std::string>& sets, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  auto sc = load_with_overrides(config, sets);
  if (seed) sc.seed = *seed;
  auto res = rpool::run(sc);
  rpool::write_run_outputs(res, out);
  const auto& k = res.kpis;
  std::cout << "requests " << k.requests << ", served " << k.served << ", rejected " << k.rejected
            << ", unresolved " << res.unresolved << ", avg VRH " << k.avg_vehicle_revenue_hours << " h, empty VKM "
            << k.empty_vkm << "\noutputs written to " << out << "\n";
  for (const auto& v : res.violations) std::cerr << "invariant violated: " << v << "\n";
  return res.violations.empty() ? 0 : 3;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& sets, const std::vector<std::string>& sweeps,
              const std::vector<std::uint64_t>& seeds, unsigned jobs, const std::string& out) {
  auto sc = load_with_overrides(config, sets);
  std::vector<rpool::SweepAxis> axes;
  for (const auto& s : sweeps) axes.push_back(rpool::parse_sweep(s));
  auto rows = rpool::run_experiment_matrix(sc, axes, seeds, jobs, out);
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.kpis || !r.error.empty()) {
      ++failed;
      std::cerr << "run " << r.run << " failed: " << r.error << "\n";
    }
  std::cout << rows.size() << " runs, " << failed << " failed; table at "
            << (std::filesystem::path(out) / "kpis.csv").string() << "\n";
  return failed ? 3 : 0;
}

int cmd_zones(const std::string& network, double reach, const std::string& out, double scale, double time_limit) {
  auto net = rpool::load_network(network);
  if (scale != 1.0) net = rpool::scale_edge_times(net, scale);
  auto shared = std::make_shared<const rpool::Network>(std::move(net));
  rpool::Router router(shared);
  auto zoning = rpool::assign_nodes_to_zones(router, rpool::select_zone_centroids(router, reach, time_limit));
  rpool::save_zoning(zoning, *shared, out);
  std::cout << zoning.size() << " zones written to " << out << "\n";
  return 0;
}

int cmd_validate(const std::string& config) {
  auto sc = rpool::load_scenario(config);
  sc.validate();
  auto world = rpool::build_world(sc);
  std::cout << "ok: " << world.network->num_nodes() << " nodes, " << world.zoning.size() << " zones, "
            << world.requests.size() << " requests\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ride-pooling fleet simulator with sampling-based rebalancing"};
  app.require_subcommand(1);

  std::string config, out = "out";
  std::vector<std::string> sets, sweeps;
  std::optional<std::uint64_t> seed;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 1;

  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  sim->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--set", sets, "Override key=value")->take_all();
  sim->add_option("--seed", seed, "Master seed");
  sim->add_option("--out", out, "Output directory");

  auto* sw = app.add_subcommand("sweep", "Run a parameter sweep");
  sw->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  sw->add_option("--set", sets, "Override key=value")->take_all();
  sw->add_option("--sweep", sweeps, "key=v1,v2,...")->take_all();
  sw->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  sw->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sw->add_option("--out", out, "Output directory")->required();

  std::string network, zones_out;
  double reach = 0, scale = 1.0, time_limit = 60.0;
  auto* zn = app.add_subcommand("zones", "Compute a zoning for a network");
  zn->add_option("--network", network, "Directory with nodes.csv and edges.csv")->required()->check(CLI::ExistingDirectory);
  zn->add_option("--reach-limit", reach, "Reach limit in seconds")->required()->check(CLI::PositiveNumber);
  zn->add_option("--out", zones_out, "Zones CSV")->required();
  zn->add_option("--travel-time-scale", scale, "Edge time multiplier")->check(CLI::PositiveNumber);
  zn->add_option("--time-limit", time_limit, "Solver time limit in seconds")->check(CLI::PositiveNumber);

  auto* va = app.add_subcommand("validate", "Check a scenario file");
  va->add_option("--config", config, "Scenario file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(config, sets, seed, out);
    if (sw->parsed()) return cmd_sweep(config, sets, sweeps, seeds, jobs, out);
    if (zn->parsed()) return cmd_zones(network, reach, zones_out, scale, time_limit);
    if (va->parsed()) return cmd_validate(config);
  } catch (const rpool::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
