#include "rpool/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "rpool/csv.hpp"

namespace rpool {

namespace {

struct Field {
  std::string key;
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

double parse_double(const std::string& key, const std::string& v) {
  try {
    return csv::to_double(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  try {
    return csv::to_int(v);
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

template <class Acc>
Field num(std::string key, Acc acc) {
  return {key, [acc, key](Scenario& s, const std::string& v) { acc(s) = parse_double(key, v); },
          [acc](const Scenario& s) { return csv::format_double(acc(const_cast<Scenario&>(s))); }};
}

template <class Acc>
Field integer(std::string key, Acc acc) {
  return {key,
          [acc, key](Scenario& s, const std::string& v) {
            auto& ref = acc(s);
            using T = std::remove_reference_t<decltype(ref)>;
            auto x = parse_int(key, v);
            if (std::is_unsigned_v<T> && x < 0) throw ConfigError(key + " must be non-negative");
            ref = static_cast<T>(x);
          },
          [acc](const Scenario& s) { return std::to_string(acc(const_cast<Scenario&>(s))); }};
}

template <class Acc>
Field text(std::string key, Acc acc) {
  return {key, [acc](Scenario& s, const std::string& v) { acc(s) = v; },
          [acc](const Scenario& s) { return acc(const_cast<Scenario&>(s)); }};
}

template <class Acc>
Field flag(std::string key, Acc acc) {
  return {key, [acc, key](Scenario& s, const std::string& v) { acc(s) = parse_bool(key, v); },
          [acc](const Scenario& s) { return std::string(acc(const_cast<Scenario&>(s)) ? "true" : "false"); }};
}

#define RPOOL_FIELD(kind, key, member) kind(key, [](Scenario& s) -> auto& { return s.member; })

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      RPOOL_FIELD(text, "network_dir", network_dir),
      RPOOL_FIELD(integer, "grid_rows", grid_rows),
      RPOOL_FIELD(integer, "grid_cols", grid_cols),
      RPOOL_FIELD(num, "grid_edge_time", grid_edge_time),
      RPOOL_FIELD(num, "grid_edge_length", grid_edge_length),
      RPOOL_FIELD(num, "travel_time_scale", travel_time_scale),
      RPOOL_FIELD(text, "zones_file", zones_file),
      RPOOL_FIELD(num, "zone_reach", zone_reach),
      RPOOL_FIELD(text, "requests_file", requests_file),
      RPOOL_FIELD(num, "demand_rate", demand_rate),
      RPOOL_FIELD(num, "directional_share", directional_share),
      RPOOL_FIELD(integer, "fleet_size", fleet_size),
      RPOOL_FIELD(text, "placement", placement),
      RPOOL_FIELD(num, "max_wait", cons.t_max_wait),
      RPOOL_FIELD(num, "max_detour", cons.max_rel_detour),
      RPOOL_FIELD(integer, "capacity", cons.capacity),
      RPOOL_FIELD(num, "boarding_duration", cons.boarding_duration),
      RPOOL_FIELD(num, "pi", pi),
      RPOOL_FIELD(num, "assign_interval", assign_interval),
      RPOOL_FIELD(num, "rebalance_interval", rebalance_interval),
      RPOOL_FIELD(text, "rebalancer", rebalancer),
      RPOOL_FIELD(text, "forecast", forecast),
      RPOOL_FIELD(text, "forecast_file", forecast_file),
      RPOOL_FIELD(num, "horizon", horizon),
      RPOOL_FIELD(integer, "num_samples", num_samples),
      RPOOL_FIELD(num, "gamma", gamma),
      RPOOL_FIELD(flag, "strict_linkage", strict_linkage),
      RPOOL_FIELD(num, "sample_step", sample_step),
      RPOOL_FIELD(num, "qt_mu", qt_mu),
      RPOOL_FIELD(num, "qt_horizon", qt_horizon),
      RPOOL_FIELD(num, "hor_mu", hor_mu),
      RPOOL_FIELD(num, "hor_horizon", hor_horizon),
      RPOOL_FIELD(flag, "hor_maximize", hor_maximize),
      RPOOL_FIELD(text, "rejection", rejection),
      RPOOL_FIELD(num, "sim_duration", sim_duration),
      RPOOL_FIELD(integer, "seed", seed),
      RPOOL_FIELD(integer, "threads", threads),
      RPOOL_FIELD(num, "solver_time_limit", solver_time_limit),
      RPOOL_FIELD(integer, "max_grade", max_grade),
      RPOOL_FIELD(integer, "max_bundles", max_bundles),
      RPOOL_FIELD(text, "dump_models", dump_models),
  };
  return f;
}

#undef RPOOL_FIELD

bool is_multiple(double a, double b) {
  if (b <= 0) return false;
  const double q = a / b;
  return std::abs(q - std::round(q)) < 1e-9;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void Scenario::validate() const {
  require(fleet_size >= 1, "fleet_size must be at least 1");
  require(assign_interval > 0, "assign_interval must be positive");
  require(is_multiple(rebalance_interval, assign_interval), "rebalance_interval must be a multiple of assign_interval");
  require(is_multiple(horizon, rebalance_interval), "horizon must be a multiple of rebalance_interval");
  require(is_multiple(sim_duration, assign_interval), "sim_duration must be a multiple of assign_interval");
  require(sample_step > 0, "sample_step must be positive");
  require(num_samples >= 1, "num_samples must be at least 1");
  require(gamma >= 0 && gamma <= 1, "gamma must lie in [0, 1]");
  require(qt_mu >= 0, "qt_mu must be non-negative");
  require(hor_horizon > 0, "hor_horizon must be positive");
  require(qt_horizon > 0, "qt_horizon must be positive");
  require(travel_time_scale > 0, "travel_time_scale must be positive");
  require(zone_reach >= 0, "zone_reach must be non-negative");
  require(demand_rate >= 0, "demand_rate must be non-negative");
  require(directional_share >= 0 && directional_share <= 1, "directional_share must lie in [0, 1]");
  require(solver_time_limit > 0, "solver_time_limit must be positive");
  require(max_grade >= 0 && max_bundles >= 0, "max_grade and max_bundles must be non-negative");
  require(network_dir.empty() != (grid_rows <= 0 || grid_cols <= 0),
          "set exactly one of network_dir or grid_rows/grid_cols");
  require(rebalancer == "none" || rebalancer == "react" || rebalancer == "qt" || rebalancer == "hor" ||
              rebalancer == "sampling",
          "rebalancer must be one of none, react, qt, hor, sampling");
  require(forecast == "perfect" || forecast == "myopic" || forecast == "file",
          "forecast must be one of perfect, myopic, file");
  require(forecast != "file" || !forecast_file.empty(), "forecast = file needs forecast_file");
  require(placement == "uniform" || placement == "forecast", "placement must be uniform or forecast");
  require(rejection == "deadline" || rejection == "first_batch", "rejection must be deadline or first_batch");
  try {
    cons.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void set_scenario_value(Scenario& sc, const std::string& key, const std::string& value) {
  for (const auto& f : fields())
    if (f.key == key) {
      f.set(sc, csv::trim(value));
      return;
    }
  throw ConfigError("unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> scenario_values(const Scenario& sc) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : fields()) out.emplace_back(f.key, f.get(sc));
  return out;
}

void apply_config_text(Scenario& sc, const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = csv::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source + ":" + std::to_string(no) + ": expected key = value");
    try {
      set_scenario_value(sc, csv::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(no) + ": " + e.what());
    }
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  Scenario sc;
  apply_config_text(sc, ss.str(), path);
  // Relative paths are resolved against the config file's directory.
  const auto base = std::filesystem::path(path).parent_path();
  for (auto* p : {&sc.network_dir, &sc.zones_file, &sc.requests_file, &sc.forecast_file})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  return sc;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

namespace {

enum Stream : std::uint64_t { kDemandStream = 1, kPlacementStream = 2, kRebalanceStream = 3 };

}  // namespace

World build_world(const Scenario& sc) {
  sc.validate();
  World w;
  Network base = sc.network_dir.empty()
                     ? make_grid_network(sc.grid_rows, sc.grid_cols, sc.grid_edge_time, sc.grid_edge_length)
                     : load_network(sc.network_dir);
  if (sc.travel_time_scale != 1.0) base = scale_edge_times(base, sc.travel_time_scale);
  w.network = std::make_shared<const Network>(std::move(base));
  w.router = std::make_unique<Router>(w.network);
  if (!sc.zones_file.empty()) {
    w.zoning = load_zoning(sc.zones_file, *w.router);
  } else {
    const double reach = sc.zone_reach > 0 ? sc.zone_reach : sc.cons.t_max_wait;
    w.zoning = assign_nodes_to_zones(*w.router, select_zone_centroids(*w.router, reach, sc.solver_time_limit));
  }
  w.costs = zone_costs(w.zoning, *w.router);
  if (!sc.requests_file.empty()) {
    for (auto& r : load_requests(sc.requests_file, *w.router))
      if (r.request_time >= 0 && r.request_time < sc.sim_duration) w.requests.push_back(r);
    std::stable_sort(w.requests.begin(), w.requests.end(),
                     [](const Request& a, const Request& b) { return a.request_time < b.request_time; });
  } else {
    std::mt19937_64 rng(derive_seed(sc.seed, kDemandStream));
    SyntheticDemand spec;
    spec.requests_per_hour = sc.demand_rate;
    spec.duration_s = sc.sim_duration;
    spec.directional_share = sc.directional_share;
    w.requests = generate_synthetic_requests(spec, *w.router, rng);
  }
  if (sc.forecast == "perfect")
    w.forecast = perfect_forecast(w.requests, w.zoning, sc.rebalance_interval);
  else if (sc.forecast == "file")
    w.forecast = load_forecast(sc.forecast_file, w.zoning.size(), sc.rebalance_interval);
  else
    w.forecast = ForecastMatrix(w.zoning.size(), sc.rebalance_interval);
  return w;
}

std::vector<VehicleState> place_initial_fleet(const Scenario& sc, const World& world, std::mt19937_64& rng) {
  const auto& access = world.network->access_nodes();
  if (access.empty()) throw ConfigError("network has no access nodes");
  std::vector<VehicleState> fleet(static_cast<std::size_t>(sc.fleet_size));
  std::vector<double> weight;
  if (sc.placement == "forecast") {
    weight.assign(world.zoning.size(), 0.0);
    for (const auto& [key, rate] : world.forecast.cells()) {
      const double start = world.forecast.bin_start(std::get<0>(key));
      if (start >= 0 && start < 3600) weight[static_cast<std::size_t>(std::get<1>(key))] += rate;
    }
    double total = 0;
    for (double x : weight) total += x;
    if (total <= 0) weight.clear();
  }
  for (std::size_t k = 0; k < fleet.size(); ++k) {
    auto& v = fleet[k];
    v.id = static_cast<int>(k);
    if (weight.empty()) {
      v.node = access[std::uniform_int_distribution<std::size_t>(0, access.size() - 1)(rng)];
    } else {
      std::discrete_distribution<std::size_t> zone(weight.begin(), weight.end());
      const auto& members = world.zoning.zone(static_cast<int>(zone(rng))).members;
      v.node = members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)];
    }
  }
  return fleet;
}

std::vector<VehicleState> initial_fleet(const Scenario& sc, const World& world) {
  std::mt19937_64 rng(derive_seed(sc.seed, kPlacementStream));
  return place_initial_fleet(sc, world, rng);
}

std::unique_ptr<Rebalancer> make_rebalancer(const Scenario& sc) {
  if (sc.rebalancer == "react") return std::make_unique<ReactRebalancer>();
  if (sc.rebalancer == "qt") return std::make_unique<QtRebalancer>(QtParams{sc.qt_mu, sc.qt_horizon});
  if (sc.rebalancer == "hor")
    return std::make_unique<HorRebalancer>(HorParams{sc.hor_mu, sc.hor_horizon, sc.hor_maximize});
  if (sc.rebalancer == "sampling") {
    SamplingRebalancerParams p;
    p.sampling.horizon = sc.horizon;
    p.sampling.step = sc.sample_step;
    p.sampling.decision_interval = sc.rebalance_interval;
    p.sampling.num_samples = sc.num_samples;
    p.sampling.pi = sc.pi;
    p.sampling.threads = sc.threads;
    p.gamma = sc.gamma;
    p.strict_linkage = sc.strict_linkage;
    p.limits.time_seconds = sc.solver_time_limit;
    p.dump_dir = sc.dump_models;
    return std::make_unique<SamplingRebalancer>(p);
  }
  return nullptr;
}

std::vector<RequestId> expire_requests(const std::vector<Request>& pending, const std::vector<VehicleState>& vehicles,
                                       const ServiceConstraints& cons, double now, const Router& router) {
  std::vector<RequestId> out;
  for (const auto& r : pending) {
    bool reachable = false;
    for (const auto& v : vehicles) {
      auto a = available_at(v, now);
      if (a.time + router.time(a.node, r.origin) <= cons.pickup_deadline(r) + kTimeTol) {
        reachable = true;
        break;
      }
    }
    if (!reachable) out.push_back(r.id);
  }
  return out;
}

namespace {

enum class RequestState { Pending, Assigned, OnBoard, Served, Rejected };

struct RequestRecord {
  RequestState state = RequestState::Pending;
  double board = 0.0;
  double alight = 0.0;
};

class Simulation {
 public:
  Simulation(const Scenario& sc, const World& w)
      : sc_(sc), w_(w), router_(*w.router), acc_(*w.network, static_cast<std::size_t>(sc.fleet_size), book_) {}

  RunResult run();

 private:
  void emit(const Event& e) {
    log_.push_back(e);
    acc_.add(e);
  }
  void admit(double clock);
  void expire(double clock, const std::vector<RequestId>& ids);
  void assign(double clock);
  void rebalance(double clock);
  void advance(double from, double to);
  void record_state(double clock);
  void check_invariants(RunResult& out) const;

  const Scenario& sc_;
  const World& w_;
  const Router& router_;
  RequestMap book_;
  KpiAccumulator acc_;
  std::vector<VehicleState> fleet_;
  std::vector<Event> log_;
  std::vector<Request> admitted_;
  std::vector<Request> pending_;
  std::unordered_map<RequestId, RequestRecord> records_;
  std::size_t next_request_ = 0;
  std::unique_ptr<Rebalancer> rebalancer_;
  std::vector<FleetStateRow> states_;
  std::vector<ZoneRow> zonal_;
  std::vector<RebalanceCall> calls_;
  std::size_t max_occupancy_ = 0;
};

void Simulation::admit(double clock) {
  const auto& reqs = w_.requests;
  for (; next_request_ < reqs.size() && reqs[next_request_].request_time <= clock + kTimeTol; ++next_request_) {
    const auto& r = reqs[next_request_];
    if (book_.count(r.id)) throw std::logic_error("duplicate request id " + std::to_string(r.id));
    book_[r.id] = r;
    admitted_.push_back(r);
    pending_.push_back(r);
    records_[r.id] = {};
    emit({r.request_time, EventType::Request, -1, r.id, r.origin, 0});
  }
}

void Simulation::expire(double clock, const std::vector<RequestId>& ids) {
  if (ids.empty()) return;
  for (auto id : ids) {
    const auto& r = book_.at(id);
    records_[id].state = RequestState::Rejected;
    emit({clock, EventType::Reject, -1, id, r.origin, 0});
    ++zonal_[static_cast<std::size_t>(w_.zoning.zone_of(r.origin))].rejected;
    if (rebalancer_) rebalancer_->on_reject(r.origin, clock);
  }
  std::erase_if(pending_, [&](const Request& r) { return records_[r.id].state == RequestState::Rejected; });
}

void Simulation::assign(double clock) {
  BatchProblem p;
  p.vehicles = fleet_;
  p.unassigned = pending_;
  p.requests = &book_;
  EnumerationLimits lim;
  lim.max_grade = static_cast<std::size_t>(sc_.max_grade);
  lim.max_bundles_per_vehicle = static_cast<std::size_t>(sc_.max_bundles);
  lim.threads = sc_.threads;
  bool any_work = !pending_.empty();
  for (const auto& v : fleet_)
    if (!v.schedule.empty()) any_work = true;
  std::vector<RequestId> uncovered;
  if (any_work) {
    auto v2rbs = build_v2rbs(p, sc_.cons, sc_.pi, clock, router_, lim);
    milp::Limits ml;
    ml.time_seconds = sc_.solver_time_limit;
    auto res = solve_assignment(p, v2rbs, ml);
    for (std::size_t k = 0; k < fleet_.size(); ++k) {
      if (!res.chosen[k]) continue;
      const auto& b = v2rbs[k][*res.chosen[k]];
      auto& v = fleet_[k];
      v.schedule = b.best_schedule();
      if (!v.schedule.empty()) {
        v.status = VehicleStatus::EnRoute;
        v.rebalance_target = kNoNode;
      }
      for (auto id : b.requests) {
        records_[id].state = RequestState::Assigned;
        emit({clock, EventType::Assign, v.id, id, book_.at(id).origin, v.occupancy()});
      }
    }
    uncovered = res.uncovered;
  }
  std::erase_if(pending_, [&](const Request& r) { return records_[r.id].state != RequestState::Pending; });
  if (sc_.rejection == "first_batch") expire(clock, uncovered);
}

void Simulation::rebalance(double clock) {
  if (!rebalancer_) return;
  ForecastMatrix myopic;
  const ForecastMatrix* fc = &w_.forecast;
  if (sc_.forecast == "myopic") {
    const double h = std::max({sc_.horizon, sc_.qt_horizon, sc_.hor_horizon});
    myopic = myopic_forecast(admitted_, w_.zoning, clock, sc_.rebalance_interval,
                             std::ceil(h / sc_.rebalance_interval) * sc_.rebalance_interval);
    fc = &myopic;
  }
  RebalanceContext ctx;
  ctx.now = clock;
  ctx.vehicles = &fleet_;
  ctx.zoning = &w_.zoning;
  ctx.router = &router_;
  ctx.forecast = fc;
  ctx.cons = &sc_.cons;
  ctx.costs = &w_.costs;
  ctx.seed = derive_seed(sc_.seed, kRebalanceStream, calls_.size());
  auto cmds = rebalancer_->rebalance(ctx);
  std::vector<bool> used(fleet_.size(), false);
  for (const auto& c : cmds) {
    auto& v = fleet_.at(static_cast<std::size_t>(c.vehicle_id));
    if (!v.idle() || used[static_cast<std::size_t>(c.vehicle_id)])
      throw std::logic_error("rebalancing command for a vehicle that is not idle");
    used[static_cast<std::size_t>(c.vehicle_id)] = true;
    v.status = VehicleStatus::Rebalancing;
    v.rebalance_target = c.target_node;
    emit({clock, EventType::Rebalance, v.id, -1, c.target_node, v.occupancy()});
  }
  calls_.push_back({clock, cmds.size(), rebalancer_->last_stats()});
}

void Simulation::advance(double from, double to) {
  std::vector<Event> ev;
  for (auto& v : fleet_) {
    ev.clear();
    advance_vehicle(v, from, to, router_, sc_.cons, &ev);
    for (const auto& e : ev) {
      emit(e);
      if (e.type == EventType::Board) {
        auto& rec = records_.at(e.request);
        rec.state = RequestState::OnBoard;
        rec.board = e.time;
      } else if (e.type == EventType::Alight) {
        auto& rec = records_.at(e.request);
        rec.state = RequestState::Served;
        rec.alight = e.time;
      }
    }
    max_occupancy_ = std::max<std::size_t>(max_occupancy_, v.on_board.size());
    if (v.occupancy() > sc_.cons.capacity) throw std::logic_error("capacity exceeded by vehicle " + std::to_string(v.id));
  }
}

void Simulation::record_state(double clock) {
  FleetStateRow row;
  row.time = clock;
  for (const auto& v : fleet_) {
    switch (v.status) {
      case VehicleStatus::Idle:
        ++row.idle;
        zonal_[static_cast<std::size_t>(w_.zoning.zone_of(available_at(v, clock).node))].idle_vehicle_hours +=
            sc_.assign_interval / 3600.0;
        break;
      case VehicleStatus::EnRoute:
        ++row.en_route;
        break;
      case VehicleStatus::Rebalancing:
        ++row.rebalancing;
        break;
    }
    row.on_board += v.occupancy();
  }
  row.pending = static_cast<int>(pending_.size());
  states_.push_back(row);
}

RunResult Simulation::run() {
  const auto wall0 = std::chrono::steady_clock::now();
  fleet_ = initial_fleet(sc_, w_);
  rebalancer_ = make_rebalancer(sc_);
  zonal_.resize(w_.zoning.size());
  for (std::size_t z = 0; z < zonal_.size(); ++z) zonal_[z].zone = static_cast<int>(z);

  const auto steps = static_cast<std::int64_t>(std::llround(sc_.sim_duration / sc_.assign_interval));
  const auto rebalance_every = static_cast<std::int64_t>(std::llround(sc_.rebalance_interval / sc_.assign_interval));
  for (std::int64_t k = 0; k <= steps; ++k) {
    const double clock = static_cast<double>(k) * sc_.assign_interval;
    admit(clock);
    if (sc_.rejection == "deadline") expire(clock, expire_requests(pending_, fleet_, sc_.cons, clock, router_));
    assign(clock);
    if (k == steps) break;
    if (k % rebalance_every == 0) rebalance(clock);
    record_state(clock);
    advance(clock, clock + sc_.assign_interval);
  }

  // Flush: finish assigned schedules; rebalancing vehicles stop after the current edge.
  double clock = sc_.sim_duration;
  for (auto& v : fleet_)
    if (v.status == VehicleStatus::Rebalancing) v.rebalance_target = available_at(v, clock).node;
  auto busy = [&] {
    for (const auto& v : fleet_)
      if (!v.idle() || v.on_edge() || v.in_stop || !v.schedule.empty()) return true;
    return false;
  };
  const double flush_limit = sc_.sim_duration + 24 * 3600.0;
  while (busy()) {
    if (clock > flush_limit) throw std::logic_error("flush phase does not terminate");
    advance(clock, clock + sc_.assign_interval);
    clock += sc_.assign_interval;
  }
  emit({clock, EventType::SimEnd, -1, -1, kNoNode, 0});

  RunResult out;
  out.scenario = sc_;
  out.network = w_.network;
  out.requests = admitted_;
  out.kpis = acc_.finish(clock);
  out.unresolved = pending_.size();
  std::stable_sort(log_.begin(), log_.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  out.events = std::move(log_);
  out.fleet_states = std::move(states_);
  out.zonal = std::move(zonal_);
  out.rebalance_calls = std::move(calls_);
  out.max_occupancy = max_occupancy_;
  check_invariants(out);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return out;
}

void Simulation::check_invariants(RunResult& out) const {
  auto& bad = out.violations;
  std::size_t served = 0, rejected = 0, pending = 0, other = 0;
  for (const auto& [id, rec] : records_) {
    switch (rec.state) {
      case RequestState::Served: {
        ++served;
        const auto& r = book_.at(id);
        if (rec.board - r.request_time > sc_.cons.t_max_wait + kTimeTol)
          bad.push_back("request " + std::to_string(id) + " waited longer than allowed");
        if (rec.alight > sc_.cons.dropoff_deadline(r) + kTimeTol)
          bad.push_back("request " + std::to_string(id) + " arrived after its drop-off deadline");
        break;
      }
      case RequestState::Rejected:
        ++rejected;
        break;
      case RequestState::Pending:
        ++pending;
        break;
      default:
        ++other;
    }
  }
  const auto& k = out.kpis;
  if (admitted_.size() != served + rejected + pending || other != 0)
    bad.push_back("request conservation violated");
  if (k.requests != admitted_.size() || k.served != served || k.rejected != rejected)
    bad.push_back("request counters disagree with records");
  for (const auto& v : fleet_)
    if (!v.on_board.empty()) bad.push_back("passengers left on board of vehicle " + std::to_string(v.id));
  std::size_t boards = 0, alights = 0;
  for (const auto& e : out.events) {
    boards += e.type == EventType::Board;
    alights += e.type == EventType::Alight;
  }
  if (boards != alights) bad.push_back("passenger conservation violated");
  if (out.max_occupancy > static_cast<std::size_t>(sc_.cons.capacity)) bad.push_back("capacity exceeded");
  const double budget = k.revenue_time + k.empty_drive_time + k.dwell_time + k.idle_time;
  const double expect = static_cast<double>(sc_.fleet_size) * k.sim_end;
  if (std::abs(budget - expect) > 1e-6 * std::max(1.0, expect)) bad.push_back("vehicle time budget violated");
}

}  // namespace

RunResult run(const Scenario& sc, const World& world) {
  sc.validate();
  Simulation sim(sc, world);
  return sim.run();
}

RunResult run(const Scenario& sc) {
  auto world = build_world(sc);
  return run(sc, world);
}

}  // namespace rpool
