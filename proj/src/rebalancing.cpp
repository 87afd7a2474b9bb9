#include "rpool/rebalancing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "rpool/parallel.hpp"

namespace rpool {

namespace {

constexpr RequestId kSampledIdBase = RequestId{1} << 40;

VehicleState hypothetical_vehicle(int id, const Request& r, const Zoning& zoning, const Router& router,
                                  const ServiceConstraints& cons) {
  VehicleState h;
  h.id = id;
  h.node = zoning.centroid(zoning.zone_of(r.origin));
  h.status = VehicleStatus::EnRoute;
  h.schedule.stops = {make_stop(r.origin, {r.id}, {}, cons.pickup_deadline(r)),
                      make_stop(r.destination, {}, {r.id}, cons.dropoff_deadline(r))};
  retime(h.schedule, h.node, r.request_time, r.request_time, router, cons);
  return h;
}

double current_objective(const VehicleState& v, double now, double pi, const Router& router,
                         const ServiceConstraints& cons) {
  if (v.schedule.empty()) return 0.0;
  Schedule s = v.schedule;
  auto a = available_at(v, now);
  retime(s, a.node, a.time, now, router, cons);
  return objective(s, pi);
}

}  // namespace

ZoneCosts zone_costs(const Zoning& zoning, const Router& router) {
  const auto n = zoning.size();
  ZoneCosts c(n, std::vector<double>(n, 0.0));
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t d = 0; d < n; ++d)
      c[o][d] = router.time(zoning.centroid(static_cast<int>(o)), zoning.centroid(static_cast<int>(d)));
  return c;
}

std::uint64_t sample_seed(std::uint64_t master, int s) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(s), 0x5eedu};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

SamplingOutput simulate_sample(int s, const std::vector<VehicleState>& en_route, const ForecastMatrix& fc, double now,
                               const SamplingParams& params, const ServiceConstraints& cons, const Zoning& zoning,
                               const Router& router, std::mt19937_64& rng) {
  const auto intervals = static_cast<std::size_t>(std::llround(params.horizon / params.decision_interval));
  SamplingOutput out;
  out.idle_increments.assign(1, std::vector<std::vector<double>>(intervals, std::vector<double>(zoning.size(), 0.0)));

  auto reqs = sample_requests(fc, now, params.horizon, zoning, router, rng, kSampledIdBase);
  std::vector<VehicleState> fleet = en_route;
  const std::size_t real = fleet.size();
  std::vector<std::vector<Stop>> history;  // per hypothetical vehicle
  std::vector<std::optional<std::pair<double, NodeId>>> idle_since(real);

  const double end = now + params.horizon;
  std::size_t next = 0;
  for (double clock = now;; clock += params.step) {
    for (; next < reqs.size() && reqs[next].request_time <= clock + kTimeTol; ++next) {
      const auto& r = reqs[next];
      std::optional<Schedule> best;
      std::size_t best_v = 0;
      double best_delta = 0.0;
      for (std::size_t k = 0; k < fleet.size(); ++k) {
        auto cand = insert_request(fleet[k].schedule, fleet[k], r, cons, params.pi, clock, router);
        if (!cand) continue;
        double delta = objective(*cand, params.pi) - current_objective(fleet[k], clock, params.pi, router, cons);
        if (!best || delta < best_delta - kTimeTol) {
          best = std::move(cand);
          best_v = k;
          best_delta = delta;
        }
      }
      if (best) {
        auto& v = fleet[best_v];
        v.schedule = std::move(*best);
        v.status = VehicleStatus::EnRoute;
        v.rebalance_target = kNoNode;
        if (best_v < real) idle_since[best_v].reset();
      } else if (params.create_hypothetical) {
        auto h = hypothetical_vehicle(-static_cast<int>(history.size()) - 1, r, zoning, router, cons);
        history.emplace_back();
        advance_vehicle(h, r.request_time, clock, router, cons, nullptr, &history.back());
        fleet.push_back(std::move(h));
      }
    }
    if (clock >= end - kTimeTol) break;
    const double step_end = std::min(clock + params.step, end);
    std::vector<Event> ev;
    for (std::size_t k = 0; k < fleet.size(); ++k) {
      auto& v = fleet[k];
      const bool was_idle = v.idle();
      ev.clear();
      advance_vehicle(v, clock, step_end, router, cons, k < real ? &ev : nullptr,
                      k < real ? nullptr : &history[k - real]);
      if (k < real && v.idle() && !was_idle) {
        double t = step_end;
        for (auto it = ev.rbegin(); it != ev.rend(); ++it)
          if (it->type == EventType::StopEnd || it->type == EventType::RebalanceEnd) {
            t = it->time;
            break;
          }
        idle_since[k] = std::pair{t, v.node};
      }
    }
  }

  for (std::size_t k = 0; k < real; ++k) {
    if (!idle_since[k] || !fleet[k].idle()) continue;
    const auto [t, node] = *idle_since[k];
    auto tau = static_cast<std::int64_t>(std::floor((t - now) / params.decision_interval + kTimeTol));
    if (tau < 0 || tau >= static_cast<std::int64_t>(intervals)) continue;
    out.idle_increments[0][static_cast<std::size_t>(tau)][static_cast<std::size_t>(zoning.zone_of(node))] += 1.0;
  }

  for (std::size_t u = 0; u < history.size(); ++u) {
    auto& v = fleet[real + u];
    Schedule full;
    full.stops = history[u];
    if (!v.schedule.empty()) {
      auto a = available_at(v, end);
      retime(v.schedule, a.node, a.time, end, router, cons);
      full.stops.insert(full.stops.end(), v.schedule.stops.begin(), v.schedule.stops.end());
    }
    auto pieces = split_idle_subschedules(full, 0);
    const double tour_end = full.stops.back().planned_departure;
    const int end_zone = zoning.zone_of(full.stops.back().node);
    std::size_t remaining = full.served_count();
    for (std::size_t t = 0; t < pieces.size(); ++t) {
      const auto& first = pieces[t].stops.front();
      SampledTour st;
      st.sample = s;
      st.tour = static_cast<int>(u);
      st.sub_tour = static_cast<int>(t);
      st.start_zone = zoning.zone_of(first.node);
      st.first_pickup_node = first.node;
      st.start_time = first.planned_arrival - router.time(zoning.centroid(st.start_zone), first.node);
      st.objective = (tour_end - st.start_time) - params.pi * static_cast<double>(remaining);
      st.end_zone = end_zone;
      st.end_time = tour_end;
      out.tours.push_back(st);
      remaining -= pieces[t].served_count();
    }
  }
  return out;
}

SamplingOutput simulate_future_states(const std::vector<VehicleState>& en_route, const ForecastMatrix& fc, double now,
                                      const SamplingParams& params, const ServiceConstraints& cons,
                                      const Zoning& zoning, const Router& router, std::uint64_t master_seed) {
  for (const auto& v : en_route)
    if (v.idle()) throw std::invalid_argument("simulate_future_states expects only non-idle vehicles");
  std::vector<SamplingOutput> parts(static_cast<std::size_t>(std::max(params.num_samples, 0)));
  parallel_for(parts.size(), params.threads, [&](std::size_t s) {
    std::mt19937_64 rng(sample_seed(master_seed, static_cast<int>(s)));
    parts[s] = simulate_sample(static_cast<int>(s), en_route, fc, now, params, cons, zoning, router, rng);
  });
  SamplingOutput out;
  for (auto& p : parts) {
    out.tours.insert(out.tours.end(), p.tours.begin(), p.tours.end());
    out.idle_increments.push_back(std::move(p.idle_increments.front()));
  }
  return out;
}

std::vector<std::pair<int, int>> RebalancingProblem::reachable(std::size_t k) const {
  std::vector<std::pair<int, int>> out;
  const auto& t = tours.at(k);
  for (int T = 0; T <= t_max; ++T)
    for (std::size_t d = 0; d < num_zones; ++d)
      if (now + T * step + cost[d][static_cast<std::size_t>(t.start_zone)] <= t.start_time + kTimeTol)
        out.emplace_back(static_cast<int>(d), T);
  return out;
}

namespace {

struct PhiVar {
  std::size_t tour;
  int zone;
  int step;
  milp::VarId var;
};

struct RebalancingIndex {
  std::map<std::pair<int, int>, milp::VarId> theta0;
  std::map<std::tuple<int, int, int, int>, milp::VarId> theta;  // (s, T, o, d)
  std::vector<PhiVar> phi;
};

double increment(const RebalancingProblem& p, int s, int tau, std::size_t o) {
  if (static_cast<std::size_t>(s) >= p.idle_increments.size()) return 0.0;
  const auto& per_s = p.idle_increments[static_cast<std::size_t>(s)];
  if (tau < 0 || static_cast<std::size_t>(tau) >= per_s.size()) return 0.0;
  return per_s[static_cast<std::size_t>(tau)].at(o);
}

int finish_interval(const RebalancingProblem& p, const SampledTour& t) {
  return static_cast<int>(std::floor((t.end_time - p.now) / p.step + kTimeTol));
}

milp::LinearModel build_model(const RebalancingProblem& p, RebalancingIndex& idx) {
  using milp::Relation;
  using milp::Term;
  const auto Z = p.num_zones;
  if (p.cost.size() != Z || p.idle.size() != Z) throw std::invalid_argument("rebalancing problem size mismatch");
  const double inv_ns = 1.0 / std::max(p.num_samples, 1);
  milp::LinearModel m;
  std::vector<Term> obj;

  // Zones that may hold idle vehicles before step T of sample s.
  auto may_supply = [&](int s, int T, std::size_t o) {
    if (p.idle[o] > 0) return true;
    for (int tau = 0; tau < T; ++tau)
      if (increment(p, s, tau, o) > 0) return true;
    for (const auto& t : p.tours)
      if (t.sample == s && static_cast<std::size_t>(t.end_zone) == o && finish_interval(p, t) < T) return true;
    return false;
  };

  for (std::size_t k = 0; k < p.tours.size(); ++k) {
    const auto& t = p.tours[k];
    for (auto [o, T] : p.reachable(k)) {
      if (!may_supply(t.sample, T, static_cast<std::size_t>(o))) continue;
      auto v = m.add_binary("phi_" + std::to_string(t.sample) + "_" + std::to_string(t.tour) + "_" +
                            std::to_string(t.sub_tour) + "_" + std::to_string(o) + "_" + std::to_string(T));
      obj.push_back({v, inv_ns * std::pow(p.gamma, T) * t.objective});
      idx.phi.push_back({k, o, T, v});
      const int d = t.start_zone;
      const double c = p.cost[static_cast<std::size_t>(o)][static_cast<std::size_t>(d)];
      if (T == 0) {
        if (!idx.theta0.count({o, d})) {
          auto th = m.add_variable(0, p.idle[static_cast<std::size_t>(o)], milp::VarType::Integer,
                                   "theta0_" + std::to_string(o) + "_" + std::to_string(d));
          idx.theta0[{o, d}] = th;
          obj.push_back({th, c});
        }
      } else if (!idx.theta.count({t.sample, T, o, d})) {
        auto th = m.add_variable(0, milp::kInf, milp::VarType::Integer,
                                 "theta_" + std::to_string(t.sample) + "_" + std::to_string(T) + "_" +
                                     std::to_string(o) + "_" + std::to_string(d));
        idx.theta[{t.sample, T, o, d}] = th;
        obj.push_back({th, inv_ns * std::pow(p.gamma, T) * c});
      }
    }
  }

  // Immediate supply.
  for (std::size_t o = 0; o < Z; ++o) {
    std::vector<Term> row;
    for (const auto& [key, v] : idx.theta0)
      if (static_cast<std::size_t>(key.first) == o) row.push_back({v, 1.0});
    if (!row.empty())
      m.add_constraint(std::move(row), Relation::LessEqual, p.idle[o], "supply0_" + std::to_string(o));
  }

  // Future supply per sample, step and zone.
  for (int s = 0; s < p.num_samples; ++s)
    for (int T = 1; T <= p.t_max; ++T)
      for (std::size_t o = 0; o < Z; ++o) {
        bool has_out = false;
        for (const auto& [key, v] : idx.theta)
          if (std::get<0>(key) == s && std::get<1>(key) == T && static_cast<std::size_t>(std::get<2>(key)) == o)
            has_out = true;
        if (!has_out) continue;
        std::vector<Term> row;
        double rhs = p.idle[o];
        for (const auto& [key, v] : idx.theta0)
          if (static_cast<std::size_t>(key.first) == o) row.push_back({v, 1.0});
        for (const auto& [key, v] : idx.theta)
          if (std::get<0>(key) == s && std::get<1>(key) <= T && static_cast<std::size_t>(std::get<2>(key)) == o)
            row.push_back({v, 1.0});
        for (int tau = 0; tau < T; ++tau) rhs += increment(p, s, tau, o);
        for (const auto& f : idx.phi) {
          const auto& t = p.tours[f.tour];
          if (t.sample == s && static_cast<std::size_t>(t.end_zone) == o && finish_interval(p, t) < T)
            row.push_back({f.var, -1.0});
        }
        m.add_constraint(std::move(row), Relation::LessEqual, rhs,
                         "supply_" + std::to_string(s) + "_" + std::to_string(T) + "_" + std::to_string(o));
      }

  const auto link_rel = p.strict_linkage ? Relation::Equal : Relation::GreaterEqual;
  // Immediate trips cover tours in every sample.
  for (const auto& [key, th] : idx.theta0)
    for (int s = 0; s < p.num_samples; ++s) {
      std::vector<Term> row{{th, 1.0}};
      for (const auto& f : idx.phi) {
        const auto& t = p.tours[f.tour];
        if (f.step == 0 && t.sample == s && f.zone == key.first && t.start_zone == key.second)
          row.push_back({f.var, -1.0});
      }
      m.add_constraint(std::move(row), link_rel, 0.0,
                       "link0_" + std::to_string(s) + "_" + std::to_string(key.first) + "_" +
                           std::to_string(key.second));
    }
  // Future trips cover tours of their own sample.
  for (const auto& [key, th] : idx.theta) {
    const auto [s, T, o, d] = key;
    std::vector<Term> row{{th, 1.0}};
    for (const auto& f : idx.phi) {
      const auto& t = p.tours[f.tour];
      if (f.step == T && t.sample == s && f.zone == o && t.start_zone == d) row.push_back({f.var, -1.0});
    }
    m.add_constraint(std::move(row), link_rel, 0.0,
                     "link_" + std::to_string(s) + "_" + std::to_string(T) + "_" + std::to_string(o) + "_" +
                         std::to_string(d));
  }

  // Each tour is entered at most once.
  std::map<std::pair<int, int>, std::vector<Term>> groups;
  for (const auto& f : idx.phi) {
    const auto& t = p.tours[f.tour];
    groups[{t.sample, t.tour}].push_back({f.var, 1.0});
  }
  for (auto& [key, row] : groups)
    if (row.size() > 1)
      m.add_constraint(std::move(row), Relation::LessEqual, 1.0,
                       "tour_" + std::to_string(key.first) + "_" + std::to_string(key.second));

  m.set_objective(std::move(obj), milp::Sense::Minimize);
  return m;
}

}  // namespace

milp::LinearModel rebalancing_model(const RebalancingProblem& p) {
  RebalancingIndex idx;
  return build_model(p, idx);
}

RebalancingSolution solve_rebalancing(const RebalancingProblem& p, const milp::Limits& limits,
                                      const std::string& dump_path) {
  RebalancingIndex idx;
  auto m = build_model(p, idx);
  RebalancingSolution out;
  out.variables = m.num_variables();
  out.constraints = m.num_constraints();
  out.immediate.assign(p.num_zones, std::vector<int>(p.num_zones, 0));
  auto dump = [&](const std::string& path) {
    std::ofstream f(path);
    f << milp::export_model(m);
  };
  if (!dump_path.empty()) dump(dump_path);
  if (m.num_variables() == 0) return out;
  auto sol = milp::solve(m, limits);
  out.status = sol.status;
  if (!sol.has_values()) {
    auto path = dump_path.empty() ? (std::filesystem::temp_directory_path() / "rebalancing_failed.lp").string()
                                  : dump_path;
    dump(path);
    throw std::runtime_error(std::string("rebalancing ILP failed (") + milp::to_string(sol.status) +
                             "); model written to " + path);
  }
  out.objective = sol.objective;
  for (const auto& [key, v] : idx.theta0)
    out.immediate[static_cast<std::size_t>(key.first)][static_cast<std::size_t>(key.second)] =
        static_cast<int>(std::llround(sol.value(v)));
  for (const auto& f : idx.phi)
    if (sol.value(f.var) > 0.5) out.covered.push_back({f.tour, f.zone, f.step});
  for (std::size_t o = 0; o < p.num_zones; ++o) {
    int sum = 0;
    for (int x : out.immediate[o]) sum += x;
    if (sum > p.idle[o]) throw std::logic_error("rebalancing plan exceeds idle supply");
  }
  return out;
}

VehiclePicker::VehiclePicker(const std::vector<VehicleState>& vehicles, const Zoning& zoning, const Router& router,
                             double now)
    : vehicles_(vehicles), router_(router), now_(now), by_zone_(zoning.size()) {
  for (std::size_t k = 0; k < vehicles.size(); ++k) {
    const auto& v = vehicles[k];
    if (!v.idle()) continue;
    by_zone_[static_cast<std::size_t>(zoning.zone_of(available_at(v, now).node))].push_back(k);
  }
}

std::optional<int> VehiclePicker::take(int zone, NodeId target) {
  auto& pool = by_zone_.at(static_cast<std::size_t>(zone));
  if (pool.empty()) return std::nullopt;
  auto cost = [&](std::size_t k) {
    auto a = available_at(vehicles_[k], now_);
    return a.time + router_.time(a.node, target);
  };
  auto best = pool.begin();
  for (auto it = pool.begin() + 1; it != pool.end(); ++it) {
    double a = cost(*it), b = cost(*best);
    if (a < b - kTimeTol || (std::abs(a - b) <= kTimeTol && vehicles_[*it].id < vehicles_[*best].id)) best = it;
  }
  int id = static_cast<int>(*best);
  pool.erase(best);
  return id;
}

int VehiclePicker::available(int zone) const {
  return static_cast<int>(by_zone_.at(static_cast<std::size_t>(zone)).size());
}

std::vector<int> idle_counts(const std::vector<VehicleState>& vehicles, const Zoning& zoning, const Router& /*router*/,
                             double now) {
  std::vector<int> out(zoning.size(), 0);
  for (const auto& v : vehicles)
    if (v.idle()) ++out[static_cast<std::size_t>(zoning.zone_of(available_at(v, now).node))];
  return out;
}

std::vector<RebalanceCommand> dispatch_rebalancing(const RebalancingSolution& sol, const RebalancingProblem& p,
                                                   const std::vector<VehicleState>& vehicles, const Zoning& zoning,
                                                   const Router& router) {
  VehiclePicker picker(vehicles, zoning, router, p.now);
  std::vector<RebalanceCommand> out;
  for (std::size_t o = 0; o < p.num_zones; ++o)
    for (std::size_t d = 0; d < p.num_zones; ++d) {
      const int units = sol.immediate[o][d];
      if (units <= 0) continue;
      std::vector<std::vector<NodeId>> per_sample(static_cast<std::size_t>(std::max(p.num_samples, 1)));
      for (const auto& c : sol.covered) {
        const auto& t = p.tours[c.tour];
        if (c.step == 0 && static_cast<std::size_t>(c.from_zone) == o && static_cast<std::size_t>(t.start_zone) == d)
          per_sample.at(static_cast<std::size_t>(t.sample)).push_back(t.first_pickup_node);
      }
      for (int j = 0; j < units; ++j) {
        NodeId target = kNoNode;
        for (const auto& list : per_sample)
          if (static_cast<std::size_t>(j) < list.size()) {
            target = list[static_cast<std::size_t>(j)];
            break;
          }
        const bool covered = target != kNoNode;
        if (!covered) target = zoning.centroid(static_cast<int>(d));
        if (o == d && !covered) continue;
        auto k = picker.take(static_cast<int>(o), target);
        if (!k) break;
        const auto& v = vehicles[static_cast<std::size_t>(*k)];
        if (available_at(v, p.now).node == target) continue;
        out.push_back({v.id, target, static_cast<int>(d), p.now});
      }
    }
  return out;
}

std::vector<RebalanceCommand> SamplingRebalancer::rebalance(const RebalanceContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& vehicles = *ctx.vehicles;
  std::vector<VehicleState> en_route;
  for (const auto& v : vehicles)
    if (!v.idle()) en_route.push_back(v);
  const auto& sp = params_.sampling;
  auto sampled = simulate_future_states(en_route, *ctx.forecast, ctx.now, sp, *ctx.cons, *ctx.zoning, *ctx.router,
                                        ctx.seed);
  RebalancingProblem p;
  p.num_zones = ctx.zoning->size();
  p.cost = *ctx.costs;
  p.idle = idle_counts(vehicles, *ctx.zoning, *ctx.router, ctx.now);
  p.idle_increments = std::move(sampled.idle_increments);
  p.tours = std::move(sampled.tours);
  p.num_samples = sp.num_samples;
  p.t_max = static_cast<int>(std::llround(sp.horizon / sp.decision_interval));
  p.step = sp.decision_interval;
  p.now = ctx.now;
  p.gamma = params_.gamma;
  p.strict_linkage = params_.strict_linkage;
  std::string dump;
  if (!params_.dump_dir.empty()) {
    std::filesystem::create_directories(params_.dump_dir);
    dump = (std::filesystem::path(params_.dump_dir) /
            ("rebalancing_" + std::to_string(static_cast<long long>(ctx.now)) + ".lp"))
               .string();
  }
  auto sol = solve_rebalancing(p, params_.limits, dump);
  auto cmds = dispatch_rebalancing(sol, p, vehicles, *ctx.zoning, *ctx.router);
  ++calls_;
  stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stats_.variables = sol.variables;
  stats_.constraints = sol.constraints;
  stats_.tours = p.tours.size();
  stats_.status = milp::to_string(sol.status);
  return cmds;
}

std::vector<std::optional<std::size_t>> min_cost_matching(const std::vector<std::vector<double>>& cost) {
  std::vector<std::optional<std::size_t>> out(cost.size());
  if (cost.empty()) return out;
  double big = 1.0;
  for (const auto& row : cost)
    for (double c : row)
      if (std::isfinite(c)) big += std::abs(c);
  milp::LinearModel m;
  std::vector<std::tuple<std::size_t, std::size_t, milp::VarId>> x;
  std::vector<milp::Term> obj;
  std::size_t cols = 0;
  for (const auto& row : cost) cols = std::max(cols, row.size());
  std::vector<std::vector<milp::Term>> col_rows(cols);
  for (std::size_t v = 0; v < cost.size(); ++v) {
    std::vector<milp::Term> row;
    for (std::size_t l = 0; l < cost[v].size(); ++l) {
      if (!std::isfinite(cost[v][l])) continue;
      auto id = m.add_binary("x_" + std::to_string(v) + "_" + std::to_string(l));
      x.emplace_back(v, l, id);
      obj.push_back({id, cost[v][l] - big});
      row.push_back({id, 1.0});
      col_rows[l].push_back({id, 1.0});
    }
    if (!row.empty()) m.add_constraint(std::move(row), milp::Relation::LessEqual, 1.0);
  }
  for (auto& row : col_rows)
    if (!row.empty()) m.add_constraint(std::move(row), milp::Relation::LessEqual, 1.0);
  if (x.empty()) return out;
  m.set_objective(std::move(obj), milp::Sense::Minimize);
  auto sol = milp::solve(m);
  if (!sol.has_values()) throw std::runtime_error("matching model failed");
  for (auto [v, l, id] : x)
    if (sol.value(id) > 0.5) out[v] = l;
  return out;
}

std::vector<RebalanceCommand> ReactRebalancer::rebalance(const RebalanceContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& vehicles = *ctx.vehicles;
  std::vector<std::size_t> idle;
  for (std::size_t k = 0; k < vehicles.size(); ++k)
    if (vehicles[k].idle()) idle.push_back(k);
  std::vector<std::vector<double>> cost(idle.size(), std::vector<double>(tracked_.size()));
  for (std::size_t i = 0; i < idle.size(); ++i) {
    auto a = available_at(vehicles[idle[i]], ctx.now);
    for (std::size_t l = 0; l < tracked_.size(); ++l) cost[i][l] = ctx.router->time(a.node, tracked_[l].node);
  }
  auto match = min_cost_matching(cost);
  std::vector<bool> matched(tracked_.size(), false);
  std::vector<RebalanceCommand> out;
  for (std::size_t i = 0; i < idle.size(); ++i) {
    if (!match[i]) continue;
    matched[*match[i]] = true;
    const auto& v = vehicles[idle[i]];
    const NodeId target = tracked_[*match[i]].node;
    if (available_at(v, ctx.now).node == target) continue;
    out.push_back({v.id, target, ctx.zoning->zone_of(target), ctx.now});
  }
  std::vector<TrackedLocation> keep;
  for (std::size_t l = 0; l < tracked_.size(); ++l)
    if (!matched[l] && tracked_[l].age < 1) keep.push_back({tracked_[l].node, tracked_[l].time, tracked_[l].age + 1});
  tracked_ = std::move(keep);
  stats_ = {};
  stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::vector<double>> demand_totals(const ForecastMatrix& fc, double t0, double t1) {
  const auto n = fc.num_zones();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  for (const auto& [key, rate] : fc.cells()) {
    const auto [bin, o, d] = key;
    const double start = fc.bin_start(bin);
    if (start >= t0 - kTimeTol && start < t1 - kTimeTol)
      out[static_cast<std::size_t>(o)][static_cast<std::size_t>(d)] += rate;
  }
  return out;
}

std::optional<std::vector<std::vector<double>>> qt_flows(const std::vector<std::vector<double>>& lambda,
                                                         const std::vector<int>& idle, const ZoneCosts& tau,
                                                         double mu) {
  if (mu < 0) throw std::invalid_argument("mu must be non-negative");
  const auto Z = idle.size();
  double mean = 0.0;
  for (int i : idle) mean += i;
  mean /= static_cast<double>(std::max<std::size_t>(Z, 1));
  milp::LinearModel m;
  std::vector<std::vector<milp::VarId>> beta(Z, std::vector<milp::VarId>(Z, -1));
  std::vector<milp::Term> obj;
  for (std::size_t o = 0; o < Z; ++o)
    for (std::size_t d = 0; d < Z; ++d) {
      if (o == d) continue;
      beta[o][d] = m.add_variable(0, milp::kInf, milp::VarType::Continuous,
                                  "beta_" + std::to_string(o) + "_" + std::to_string(d));
      obj.push_back({beta[o][d], tau[o][d]});
    }
  for (std::size_t d = 0; d < Z; ++d) {
    std::vector<milp::Term> row;
    double rhs = -static_cast<double>(idle[d]) + mean;
    for (std::size_t o = 0; o < Z; ++o) {
      if (o == d) continue;
      row.push_back({beta[o][d], 1.0});
      row.push_back({beta[d][o], -1.0});
      rhs -= mu * (lambda[o][d] - lambda[d][o]);
    }
    if (!row.empty()) m.add_constraint(std::move(row), milp::Relation::Equal, rhs, "balance_" + std::to_string(d));
  }
  std::vector<std::vector<double>> out(Z, std::vector<double>(Z, 0.0));
  if (m.num_variables() == 0) return out;
  m.set_objective(std::move(obj), milp::Sense::Minimize);
  auto sol = milp::solve_relaxation(m);
  if (sol.status != milp::Status::Optimal) return std::nullopt;
  for (std::size_t o = 0; o < Z; ++o)
    for (std::size_t d = 0; d < Z; ++d)
      if (beta[o][d] >= 0) out[o][d] = sol.value(beta[o][d]);
  return out;
}

namespace {

std::vector<RebalanceCommand> send_to_centroids(const std::vector<std::vector<int>>& units, const RebalanceContext& ctx,
                                                std::mt19937_64* rng) {
  VehiclePicker picker(*ctx.vehicles, *ctx.zoning, *ctx.router, ctx.now);
  std::vector<RebalanceCommand> out;
  for (std::size_t o = 0; o < units.size(); ++o) {
    std::vector<int> trips;
    for (std::size_t d = 0; d < units[o].size(); ++d)
      if (d != o)
        for (int k = 0; k < units[o][d]; ++k) trips.push_back(static_cast<int>(d));
    if (rng) std::shuffle(trips.begin(), trips.end(), *rng);
    for (int d : trips) {
      const NodeId target = ctx.zoning->centroid(d);
      auto k = picker.take(static_cast<int>(o), target);
      if (!k) break;
      const auto& v = (*ctx.vehicles)[static_cast<std::size_t>(*k)];
      if (available_at(v, ctx.now).node == target) continue;
      out.push_back({v.id, target, d, ctx.now});
    }
  }
  return out;
}

}  // namespace

std::vector<RebalanceCommand> QtRebalancer::rebalance(const RebalanceContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  auto lambda = demand_totals(*ctx.forecast, ctx.now, ctx.now + p_.horizon);
  auto idle = idle_counts(*ctx.vehicles, *ctx.zoning, *ctx.router, ctx.now);
  auto flows = qt_flows(lambda, idle, *ctx.costs, p_.mu);
  stats_ = {};
  std::vector<RebalanceCommand> out;
  if (!flows) {
    stats_.status = "infeasible";
  } else {
    std::vector<std::vector<int>> units(idle.size(), std::vector<int>(idle.size(), 0));
    for (std::size_t o = 0; o < idle.size(); ++o)
      for (std::size_t d = 0; d < idle.size(); ++d) units[o][d] = static_cast<int>(std::lround((*flows)[o][d]));
    std::mt19937_64 rng(ctx.seed);
    out = send_to_centroids(units, ctx, &rng);
    stats_.status = "optimal";
  }
  stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<std::vector<int>> hor_flows(const std::vector<std::vector<double>>& lambda, const std::vector<int>& idle,
                                        const ZoneCosts& tau, const HorParams& p) {
  if (p.horizon <= 0) throw std::invalid_argument("horizon must be positive");
  const auto Z = idle.size();
  milp::LinearModel m;
  std::vector<std::vector<milp::VarId>> beta(Z, std::vector<milp::VarId>(Z, -1));
  std::vector<milp::Term> obj;
  for (std::size_t o = 0; o < Z; ++o) {
    if (idle[o] <= 0) continue;
    for (std::size_t d = 0; d < Z; ++d) {
      if (tau[o][d] > p.horizon + kTimeTol) continue;
      beta[o][d] = m.add_variable(0, idle[o], milp::VarType::Integer,
                                  "beta_" + std::to_string(o) + "_" + std::to_string(d));
      obj.push_back({beta[o][d], (p.horizon - tau[o][d]) * lambda[o][d]});
    }
  }
  for (std::size_t o = 0; o < Z; ++o) {
    std::vector<milp::Term> row;
    for (std::size_t d = 0; d < Z; ++d)
      if (beta[o][d] >= 0) row.push_back({beta[o][d], 1.0});
    if (!row.empty()) m.add_constraint(std::move(row), milp::Relation::LessEqual, idle[o], "idle_" + std::to_string(o));
  }
  for (std::size_t d = 0; d < Z; ++d) {
    std::vector<milp::Term> row;
    double lambda_d = 0.0;
    for (std::size_t j = 0; j < Z; ++j) lambda_d += lambda[d][j];
    for (std::size_t o = 0; o < Z; ++o)
      if (beta[o][d] >= 0) row.push_back({beta[o][d], 1.0 - tau[o][d] / p.horizon});
    if (!row.empty())
      m.add_constraint(std::move(row), milp::Relation::LessEqual, lambda_d * p.mu, "cap_" + std::to_string(d));
  }
  std::vector<std::vector<int>> out(Z, std::vector<int>(Z, 0));
  if (m.num_variables() == 0) return out;
  m.set_objective(std::move(obj), p.maximize ? milp::Sense::Maximize : milp::Sense::Minimize);
  auto sol = milp::solve(m);
  if (!sol.has_values()) return out;
  for (std::size_t o = 0; o < Z; ++o)
    for (std::size_t d = 0; d < Z; ++d)
      if (beta[o][d] >= 0) out[o][d] = static_cast<int>(std::llround(sol.value(beta[o][d])));
  return out;
}

std::vector<RebalanceCommand> HorRebalancer::rebalance(const RebalanceContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  auto lambda = demand_totals(*ctx.forecast, ctx.now, ctx.now + p_.horizon);
  auto idle = idle_counts(*ctx.vehicles, *ctx.zoning, *ctx.router, ctx.now);
  auto units = hor_flows(lambda, idle, *ctx.costs, p_);
  auto out = send_to_centroids(units, ctx, nullptr);
  stats_ = {};
  stats_.status = "optimal";
  stats_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace rpool
