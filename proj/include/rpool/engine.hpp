#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpool/assignment.hpp"
#include "rpool/kpi.hpp"
#include "rpool/rebalancing.hpp"

namespace rpool {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  // Network: a directory with nodes.csv/edges.csv, or a synthetic grid.
  std::string network_dir;
  int grid_rows = 0;
  int grid_cols = 0;
  double grid_edge_time = 60.0;
  double grid_edge_length = 600.0;
  double travel_time_scale = 1.62;
  std::string zones_file;
  double zone_reach = 0.0;  // 0 = max_wait

  // Demand: a requests file, or synthetic directional demand.
  std::string requests_file;
  double demand_rate = 60.0;  // requests per hour
  double directional_share = 0.9;

  int fleet_size = 12;
  std::string placement = "uniform";  // uniform | forecast
  ServiceConstraints cons;
  double pi = kDefaultReward;

  double assign_interval = 60.0;
  double rebalance_interval = 900.0;
  std::string rebalancer = "none";  // none | react | qt | hor | sampling
  std::string forecast = "perfect";  // perfect | myopic | file
  std::string forecast_file;

  double horizon = 2700.0;
  int num_samples = 3;
  double gamma = 0.5;
  bool strict_linkage = false;
  double sample_step = 60.0;

  double qt_mu = 0.7;
  double qt_horizon = 2700.0;
  double hor_mu = 0.1;
  double hor_horizon = 1800.0;
  bool hor_maximize = true;

  std::string rejection = "deadline";  // deadline | first_batch
  double sim_duration = 7200.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double solver_time_limit = 30.0;
  int max_grade = 0;
  int max_bundles = 0;
  std::string dump_models;  // directory for rebalancing model dumps

  /// Throws ConfigError describing the first violated rule.
  void validate() const;
};

/// Sets one key; throws ConfigError for unknown keys or malformed values.
void set_scenario_value(Scenario& sc, const std::string& key, const std::string& value);
/// Every key with its current value, in declaration order.
std::vector<std::pair<std::string, std::string>> scenario_values(const Scenario& sc);
/// Parses "key = value" lines; '#' starts a comment.
void apply_config_text(Scenario& sc, const std::string& text, const std::string& source = "<config>");
Scenario load_scenario(const std::string& path);

/// Deterministic seed for an independent random stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

/// Immutable inputs of a run.
struct World {
  std::shared_ptr<const Network> network;
  std::unique_ptr<Router> router;
  Zoning zoning;
  ZoneCosts costs;
  std::vector<Request> requests;  // sorted by time, within [0, sim_duration)
  ForecastMatrix forecast;        // perfect or file forecast; empty for myopic
};

World build_world(const Scenario& sc);

/// Vehicles on access nodes: uniform draws, or proportional to first-hour
/// forecast origins when placement = forecast.
std::vector<VehicleState> place_initial_fleet(const Scenario& sc, const World& world, std::mt19937_64& rng);
/// The fleet a run starts with, drawn from the scenario's placement stream.
std::vector<VehicleState> initial_fleet(const Scenario& sc, const World& world);

struct FleetStateRow {
  double time = 0.0;
  int idle = 0;
  int en_route = 0;
  int rebalancing = 0;
  int on_board = 0;
  int pending = 0;
};

struct ZoneRow {
  int zone = 0;
  int rejected = 0;
  double idle_vehicle_hours = 0.0;
};

struct RebalanceCall {
  double time = 0.0;
  std::size_t commands = 0;
  RebalanceStats stats;
};

struct RunResult {
  Scenario scenario;
  std::shared_ptr<const Network> network;
  std::vector<Request> requests;  // admitted
  std::vector<Event> events;      // time-ordered, ends with SimEnd
  KpiReport kpis;                 // online counters
  std::vector<FleetStateRow> fleet_states;
  std::vector<ZoneRow> zonal;
  std::vector<RebalanceCall> rebalance_calls;
  std::size_t unresolved = 0;  // pending at horizon
  std::size_t max_occupancy = 0;
  double wall_seconds = 0.0;
  /// Empty when every run invariant holds.
  std::vector<std::string> violations;
};

RunResult run(const Scenario& sc);
RunResult run(const Scenario& sc, const World& world);

std::unique_ptr<Rebalancer> make_rebalancer(const Scenario& sc);

/// Pending requests that no vehicle can reach before their pickup deadline.
std::vector<RequestId> expire_requests(const std::vector<Request>& pending, const std::vector<VehicleState>& vehicles,
                                       const ServiceConstraints& cons, double now, const Router& router);

}  // namespace rpool
