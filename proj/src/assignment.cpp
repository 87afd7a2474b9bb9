#include "rpool/assignment.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "rpool/parallel.hpp"

namespace rpool {

namespace {

// Appends every feasible schedule obtained by inserting the pickup (optional)
// and the dropoff into parent while keeping the parent's stop order.
void all_insertions(const Schedule& parent, const VehicleState& v, const Availability& start, const Stop* pickup,
                    const Stop& dropoff, const ServiceConstraints& cons, double now, const Router& router,
                    std::vector<Schedule>& out, std::size_t cap) {
  const auto& stops = parent.stops;
  const std::size_t n = stops.size();
  std::vector<const Stop*> seq;
  seq.reserve(n + 2);
  auto try_sequence = [&]() {
    double t = start.time;
    NodeId at = start.node;
    int occ = v.occupancy();
    for (const Stop* s : seq) {
      t += router.time(at, s->node);
      if (t > s->latest_arrival + kTimeTol) return false;
      occ += static_cast<int>(s->boarding.size()) - static_cast<int>(s->alighting.size());
      if (occ > cons.capacity) return false;
      t += cons.boarding_duration;
      at = s->node;
    }
    return true;
  };
  auto emit = [&]() {
    Schedule s;
    s.stops.reserve(seq.size());
    for (const Stop* p : seq) s.stops.push_back(*p);
    retime(s, start.node, start.time, now, router, cons);
    out.push_back(std::move(s));
  };
  const std::size_t i_max = pickup ? n : 0;
  for (std::size_t i = 0; i <= i_max; ++i) {
    for (std::size_t j = pickup ? i : 0; j <= n; ++j) {
      if (cap && out.size() >= cap) return;
      seq.clear();
      if (pickup) {
        for (std::size_t a = 0; a < i; ++a) seq.push_back(&stops[a]);
        seq.push_back(pickup);
        for (std::size_t a = i; a < j; ++a) seq.push_back(&stops[a]);
      } else {
        for (std::size_t a = 0; a < j; ++a) seq.push_back(&stops[a]);
      }
      seq.push_back(&dropoff);
      for (std::size_t a = j; a < n; ++a) seq.push_back(&stops[a]);
      if (try_sequence()) emit();
    }
  }
}

void pick_best(V2RB& b, double pi) {
  b.best = 0;
  b.objective = objective(b.schedules[0], pi);
  for (std::size_t k = 1; k < b.schedules.size(); ++k) {
    double o = objective(b.schedules[k], pi);
    if (o < b.objective - kTimeTol) {
      b.objective = o;
      b.best = k;
    }
  }
}

struct BatchRequest {
  const Request* req;
  Stop pickup;
  Stop dropoff;
};

std::vector<V2RB> build_for_vehicle(std::size_t vi, const VehicleState& v, const std::vector<BatchRequest>& batch,
                                    const std::vector<std::vector<bool>>& share, const RequestMap& requests,
                                    const ServiceConstraints& cons, double pi, double now, const Router& router,
                                    const EnumerationLimits& limits) {
  const auto start = available_at(v, now);
  auto lookup = [&](RequestId id) -> const Request& {
    auto it = requests.find(id);
    if (it == requests.end()) throw UnknownRequest("unknown request id " + std::to_string(id));
    return it->second;
  };

  // Grade 0: every feasible ordering of the obligations.
  std::vector<Schedule> base{Schedule{}};
  bool has_obligations = !v.on_board.empty();
  for (RequestId id : v.on_board) {
    Stop drop = make_stop(lookup(id).destination, {}, {id}, cons.dropoff_deadline(lookup(id)));
    std::vector<Schedule> next;
    for (const auto& p : base) all_insertions(p, v, start, nullptr, drop, cons, now, router, next, 0);
    base = std::move(next);
  }
  for (RequestId id : pending_pickups(v)) {
    has_obligations = true;
    const auto& r = lookup(id);
    Stop pick = make_stop(r.origin, {id}, {}, cons.pickup_deadline(r));
    Stop drop = make_stop(r.destination, {}, {id}, cons.dropoff_deadline(r));
    std::vector<Schedule> next;
    for (const auto& p : base) all_insertions(p, v, start, &pick, drop, cons, now, router, next, 0);
    base = std::move(next);
  }
  if (base.empty()) {
    Schedule current = v.schedule;
    retime(current, start.node, start.time, now, router, cons);
    base.push_back(std::move(current));
  }

  std::vector<V2RB> out;
  std::map<std::vector<std::size_t>, std::size_t> index;  // batch positions -> bundle
  V2RB root;
  root.vehicle = vi;
  root.schedules = std::move(base);
  pick_best(root, pi);
  std::vector<std::vector<std::size_t>> keys;
  if (has_obligations) {
    out.push_back(root);
    keys.push_back({});
    index[{}] = 0;
  }
  const std::size_t cap = limits.max_schedules_per_bundle;
  auto full = [&] { return limits.max_bundles_per_vehicle && out.size() >= limits.max_bundles_per_vehicle; };

  // Grade 1.
  std::vector<std::size_t> level;
  for (std::size_t k = 0; k < batch.size() && !full(); ++k) {
    const auto& br = batch[k];
    if (start.time + router.time(start.node, br.req->origin) > br.pickup.latest_arrival + kTimeTol) continue;
    V2RB b;
    b.vehicle = vi;
    b.requests = {br.req->id};
    for (const auto& p : root.schedules) all_insertions(p, v, start, &br.pickup, br.dropoff, cons, now, router,
                                                        b.schedules, cap);
    if (b.schedules.empty()) continue;
    pick_best(b, pi);
    index[{k}] = out.size();
    level.push_back(out.size());
    keys.push_back({k});
    out.push_back(std::move(b));
  }

  for (std::size_t grade = 2; !level.empty() && (limits.max_grade == 0 || grade <= limits.max_grade); ++grade) {
    std::vector<std::size_t> next_level;
    for (std::size_t parent : level) {
      const auto parent_key = keys[parent];
      for (std::size_t k = parent_key.back() + 1; k < batch.size(); ++k) {
        if (full()) break;
        if (!index.count({k})) continue;
        bool ok = true;
        for (std::size_t m : parent_key)
          if (!share[m][k]) ok = false;
        if (!ok) continue;
        auto key = parent_key;
        key.push_back(k);
        for (std::size_t drop = 0; drop + 1 < key.size() && ok; ++drop) {
          auto sub = key;
          sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
          if (!index.count(sub)) ok = false;
        }
        if (!ok) continue;
        V2RB b;
        b.vehicle = vi;
        for (std::size_t m : key) b.requests.push_back(batch[m].req->id);
        for (const auto& p : out[parent].schedules)
          all_insertions(p, v, start, &batch[k].pickup, batch[k].dropoff, cons, now, router, b.schedules, cap);
        if (b.schedules.empty()) continue;
        pick_best(b, pi);
        index[key] = out.size();
        next_level.push_back(out.size());
        keys.push_back(key);
        out.push_back(std::move(b));
      }
    }
    level = std::move(next_level);
  }
  for (auto& b : out) std::sort(b.requests.begin(), b.requests.end());
  return out;
}

}  // namespace

std::vector<RequestId> pending_pickups(const VehicleState& v) {
  std::vector<RequestId> out;
  for (const auto& s : v.schedule.stops) out.insert(out.end(), s.boarding.begin(), s.boarding.end());
  return out;
}

bool shareable(const Request& a, const Request& b, const ServiceConstraints& cons, double now, const Router& router) {
  // Stops: 0 = pick a, 1 = drop a, 2 = pick b, 3 = drop b.
  static constexpr std::array<std::array<int, 4>, 6> kOrders{{
      {0, 1, 2, 3}, {0, 2, 1, 3}, {0, 2, 3, 1}, {2, 3, 0, 1}, {2, 0, 3, 1}, {2, 0, 1, 3}}};
  const std::array<NodeId, 4> node{a.origin, a.destination, b.origin, b.destination};
  const std::array<double, 4> latest{cons.pickup_deadline(a), cons.dropoff_deadline(a), cons.pickup_deadline(b),
                                     cons.dropoff_deadline(b)};
  const std::array<int, 4> delta{1, -1, 1, -1};
  for (const auto& order : kOrders) {
    NodeId at = node[static_cast<std::size_t>(order[0])];
    double t = now;
    int occ = 0;
    bool ok = true;
    for (int s : order) {
      auto k = static_cast<std::size_t>(s);
      t += router.time(at, node[k]);
      occ += delta[k];
      if (t > latest[k] + kTimeTol || occ > cons.capacity) {
        ok = false;
        break;
      }
      t += cons.boarding_duration;
      at = node[k];
    }
    if (ok) return true;
  }
  return false;
}

std::vector<std::vector<V2RB>> build_v2rbs(const BatchProblem& problem, const ServiceConstraints& cons, double pi,
                                           double now, const Router& router, const EnumerationLimits& limits) {
  static const RequestMap kEmpty;
  const RequestMap& requests = problem.requests ? *problem.requests : kEmpty;
  std::vector<BatchRequest> batch;
  for (const auto& r : problem.unassigned)
    batch.push_back({&r, make_stop(r.origin, {r.id}, {}, cons.pickup_deadline(r)),
                     make_stop(r.destination, {}, {r.id}, cons.dropoff_deadline(r))});
  std::sort(batch.begin(), batch.end(),
            [](const BatchRequest& a, const BatchRequest& b) { return a.req->id < b.req->id; });
  std::vector<std::vector<bool>> share(batch.size(), std::vector<bool>(batch.size(), false));
  for (std::size_t i = 0; i < batch.size(); ++i)
    for (std::size_t j = i + 1; j < batch.size(); ++j)
      share[i][j] = share[j][i] = shareable(*batch[i].req, *batch[j].req, cons, now, router);

  std::vector<std::vector<V2RB>> out(problem.vehicles.size());
  parallel_for(problem.vehicles.size(), limits.threads, [&](std::size_t vi) {
    out[vi] = build_for_vehicle(vi, problem.vehicles[vi], batch, share, requests, cons, pi, now, router, limits);
  });
  return out;
}

milp::LinearModel assignment_model(const BatchProblem& problem, const std::vector<std::vector<V2RB>>& v2rbs) {
  milp::LinearModel m;
  std::vector<milp::Term> obj;
  std::map<RequestId, std::vector<milp::Term>> cover;
  std::map<RequestId, std::vector<milp::Term>> keep;
  std::set<RequestId> obligations;
  for (std::size_t vi = 0; vi < v2rbs.size(); ++vi) {
    const auto& v = problem.vehicles[vi];
    std::vector<RequestId> owed(v.on_board.begin(), v.on_board.end());
    auto pend = pending_pickups(v);
    owed.insert(owed.end(), pend.begin(), pend.end());
    for (auto id : owed) {
      obligations.insert(id);
      keep[id];
    }
    std::vector<milp::Term> per_vehicle;
    for (std::size_t k = 0; k < v2rbs[vi].size(); ++k) {
      const auto& b = v2rbs[vi][k];
      auto z = m.add_binary("z_" + std::to_string(v.id) + "_" + std::to_string(k));
      obj.push_back({z, b.objective});
      per_vehicle.push_back({z, 1.0});
      for (auto id : b.requests) cover[id].push_back({z, 1.0});
      for (auto id : owed) keep[id].push_back({z, 1.0});
    }
    if (!per_vehicle.empty())
      m.add_constraint(std::move(per_vehicle), milp::Relation::LessEqual, 1.0, "veh_" + std::to_string(v.id));
  }
  std::vector<RequestId> unassigned;
  for (const auto& r : problem.unassigned) unassigned.push_back(r.id);
  std::sort(unassigned.begin(), unassigned.end());
  for (auto id : unassigned) {
    auto it = cover.find(id);
    if (it != cover.end())
      m.add_constraint(it->second, milp::Relation::LessEqual, 1.0, "ru_" + std::to_string(id));
  }
  for (auto id : obligations) {
    const auto& terms = keep[id];
    if (terms.empty())
      throw AssignmentInfeasible("previously assigned request " + std::to_string(id) + " has no bundle");
    m.add_constraint(terms, milp::Relation::Equal, 1.0, "ra_" + std::to_string(id));
  }
  m.set_objective(std::move(obj), milp::Sense::Minimize);
  return m;
}

AssignmentResult solve_assignment(const BatchProblem& problem, const std::vector<std::vector<V2RB>>& v2rbs,
                                  const milp::Limits& limits) {
  auto m = assignment_model(problem, v2rbs);
  AssignmentResult res;
  res.chosen.assign(v2rbs.size(), std::nullopt);
  std::set<RequestId> covered;
  if (m.num_variables() > 0) {
    auto sol = milp::solve(m, limits);
    res.status = sol.status;
    if (!sol.has_values()) {
      for (const auto& r : problem.unassigned) res.uncovered.push_back(r.id);
      std::sort(res.uncovered.begin(), res.uncovered.end());
      return res;
    }
    res.objective = sol.objective;
    milp::VarId z = 0;
    for (std::size_t vi = 0; vi < v2rbs.size(); ++vi)
      for (std::size_t k = 0; k < v2rbs[vi].size(); ++k, ++z)
        if (sol.value(z) > 0.5) {
          res.chosen[vi] = k;
          covered.insert(v2rbs[vi][k].requests.begin(), v2rbs[vi][k].requests.end());
        }
  }
  for (const auto& r : problem.unassigned)
    if (!covered.count(r.id)) res.uncovered.push_back(r.id);
  std::sort(res.uncovered.begin(), res.uncovered.end());
  return res;
}

}  // namespace rpool
