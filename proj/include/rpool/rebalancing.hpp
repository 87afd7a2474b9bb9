#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rpool/demand.hpp"
#include "rpool/milp.hpp"
#include "rpool/scheduling.hpp"

namespace rpool {

struct SampledTour {
  int sample = 0;
  int tour = 0;      // hypothetical vehicle index within the sample
  int sub_tour = 0;  // entry point index within the tour
  int start_zone = 0;
  double start_time = 0.0;  // latest departure from the start zone centroid
  double objective = 0.0;   // rho of the suffix starting at this sub-tour
  NodeId first_pickup_node = kNoNode;
  int end_zone = 0;
  double end_time = 0.0;
};

/// Zone-level travel costs between centroids: cost[o][d].
using ZoneCosts = std::vector<std::vector<double>>;
ZoneCosts zone_costs(const Zoning& zoning, const Router& router);

struct SamplingParams {
  double horizon = 2700.0;
  double step = 60.0;
  double decision_interval = 900.0;
  int num_samples = 3;
  double pi = kDefaultReward;
  bool create_hypothetical = true;
  unsigned threads = 1;
};

struct SamplingOutput {
  std::vector<SampledTour> tours;
  /// idle_increments[s][tau][zone]: en-route vehicles that end the horizon
  /// idle and became idle in zone during decision interval tau.
  std::vector<std::vector<std::vector<double>>> idle_increments;
};

/// Seed of sample s derived from a master seed.
std::uint64_t sample_seed(std::uint64_t master, int s);

/// Runs one sample with its own generator.
SamplingOutput simulate_sample(int s, const std::vector<VehicleState>& en_route, const ForecastMatrix& fc, double now,
                               const SamplingParams& params, const ServiceConstraints& cons, const Zoning& zoning,
                               const Router& router, std::mt19937_64& rng);

/// All samples; sample s uses a generator seeded with sample_seed(master, s).
SamplingOutput simulate_future_states(const std::vector<VehicleState>& en_route, const ForecastMatrix& fc, double now,
                                      const SamplingParams& params, const ServiceConstraints& cons,
                                      const Zoning& zoning, const Router& router, std::uint64_t master_seed);

struct RebalancingProblem {
  std::size_t num_zones = 0;
  ZoneCosts cost;
  std::vector<int> idle;  // V_o
  std::vector<std::vector<std::vector<double>>> idle_increments;  // [s][tau][o]
  std::vector<SampledTour> tours;
  int num_samples = 1;
  int t_max = 3;  // decision steps 0..t_max
  double step = 900.0;
  double now = 0.0;
  double gamma = 0.5;
  bool strict_linkage = false;

  /// (zone, step) pairs from which tour k can be reached in time.
  std::vector<std::pair<int, int>> reachable(std::size_t k) const;
};

struct Coverage {
  std::size_t tour;  // index into problem.tours
  int from_zone;
  int step;
};

struct RebalancingSolution {
  milp::Status status = milp::Status::Optimal;
  double objective = 0.0;
  std::vector<std::vector<int>> immediate;  // theta0[o][d]
  std::vector<Coverage> covered;
  std::size_t variables = 0;
  std::size_t constraints = 0;
};

/// Builds the rebalancing ILP. var_info receives, per variable, a tag used to
/// decode the solution.
milp::LinearModel rebalancing_model(const RebalancingProblem& p);

/// Solves the ILP and decodes immediate trips and tour coverage. When
/// dump_path is set the model is written there; it is also written on solver
/// failure if fail_dump_path is set.
RebalancingSolution solve_rebalancing(const RebalancingProblem& p, const milp::Limits& limits = {},
                                      const std::string& dump_path = {});

struct RebalanceCommand {
  int vehicle_id = 0;
  NodeId target_node = kNoNode;
  int target_zone = 0;
  double issued_at = 0.0;
};

/// Picks, per origin zone, the idle vehicle with the smallest travel time to
/// the target (ties by id); each vehicle is used at most once.
class VehiclePicker {
 public:
  VehiclePicker(const std::vector<VehicleState>& vehicles, const Zoning& zoning, const Router& router, double now);
  std::optional<int> take(int zone, NodeId target);
  int available(int zone) const;

 private:
  const std::vector<VehicleState>& vehicles_;
  const Router& router_;
  double now_;
  std::vector<std::vector<std::size_t>> by_zone_;
};

std::vector<RebalanceCommand> dispatch_rebalancing(const RebalancingSolution& sol, const RebalancingProblem& p,
                                                   const std::vector<VehicleState>& vehicles, const Zoning& zoning,
                                                   const Router& router);

/// Idle vehicles per zone (excluding vehicles executing a rebalance command).
std::vector<int> idle_counts(const std::vector<VehicleState>& vehicles, const Zoning& zoning, const Router& router,
                             double now);

struct RebalanceContext {
  double now = 0.0;
  const std::vector<VehicleState>* vehicles = nullptr;
  const Zoning* zoning = nullptr;
  const Router* router = nullptr;
  const ForecastMatrix* forecast = nullptr;
  const ServiceConstraints* cons = nullptr;
  const ZoneCosts* costs = nullptr;
  std::uint64_t seed = 0;
};

struct RebalanceStats {
  double seconds = 0.0;
  std::size_t variables = 0;
  std::size_t constraints = 0;
  std::size_t tours = 0;
  std::string status;
};

class Rebalancer {
 public:
  virtual ~Rebalancer() = default;
  virtual std::string name() const = 0;
  virtual std::vector<RebalanceCommand> rebalance(const RebalanceContext& ctx) = 0;
  /// Called for every rejected request.
  virtual void on_reject(NodeId /*origin*/, double /*time*/) {}
  const RebalanceStats& last_stats() const { return stats_; }

 protected:
  RebalanceStats stats_;
};

struct SamplingRebalancerParams {
  SamplingParams sampling;
  double gamma = 0.5;
  bool strict_linkage = false;
  milp::Limits limits;
  std::string dump_dir;  // write each model here when not empty
};

class SamplingRebalancer : public Rebalancer {
 public:
  explicit SamplingRebalancer(SamplingRebalancerParams params) : params_(std::move(params)) {}
  std::string name() const override { return "sampling"; }
  std::vector<RebalanceCommand> rebalance(const RebalanceContext& ctx) override;

 private:
  SamplingRebalancerParams params_;
  int calls_ = 0;
};

struct TrackedLocation {
  NodeId node;
  double time;
  int age;
};

/// Reactive strategy: idle vehicles go to recent rejected-request origins,
/// maximizing matches and then minimizing total travel time.
class ReactRebalancer : public Rebalancer {
 public:
  std::string name() const override { return "react"; }
  std::vector<RebalanceCommand> rebalance(const RebalanceContext& ctx) override;
  void on_reject(NodeId origin, double time) override { tracked_.push_back({origin, time, 0}); }
  const std::vector<TrackedLocation>& tracked() const { return tracked_; }

 private:
  std::vector<TrackedLocation> tracked_;
};

/// Matching of vehicles to locations: maximizes the number of pairs, then
/// minimizes the summed cost. cost[v][l] = +inf marks a forbidden pair.
std::vector<std::optional<std::size_t>> min_cost_matching(const std::vector<std::vector<double>>& cost);

struct QtParams {
  double mu = 0.7;
  double horizon = 2700.0;
};

/// Continuous flows beta[o][d] of the flow-balancing LP; nullopt when infeasible.
std::optional<std::vector<std::vector<double>>> qt_flows(const std::vector<std::vector<double>>& lambda,
                                                         const std::vector<int>& idle, const ZoneCosts& tau,
                                                         double mu);

class QtRebalancer : public Rebalancer {
 public:
  explicit QtRebalancer(QtParams p) : p_(p) {}
  std::string name() const override { return "qt"; }
  std::vector<RebalanceCommand> rebalance(const RebalanceContext& ctx) override;

 private:
  QtParams p_;
};

struct HorParams {
  double mu = 0.1;
  double horizon = 1800.0;
  bool maximize = true;
};

/// Integer flows beta[o][d] of the horizon model.
std::vector<std::vector<int>> hor_flows(const std::vector<std::vector<double>>& lambda, const std::vector<int>& idle,
                                        const ZoneCosts& tau, const HorParams& p);

class HorRebalancer : public Rebalancer {
 public:
  explicit HorRebalancer(HorParams p) : p_(p) {}
  std::string name() const override { return "hor"; }
  std::vector<RebalanceCommand> rebalance(const RebalanceContext& ctx) override;

 private:
  HorParams p_;
};

/// Expected trips per zone pair over [t0, t1).
std::vector<std::vector<double>> demand_totals(const ForecastMatrix& fc, double t0, double t1);

}  // namespace rpool
