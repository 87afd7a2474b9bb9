#pragma once

// Brute-force references for batch assignment: exhaustive stop orderings per
// request subset and exhaustive bundle selection.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "rpool/assignment.hpp"

namespace rpool::oracle {

struct BundleTruth {
  std::size_t feasible_orders = 0;
  double best = 0.0;
};

// Every precedence-respecting ordering of the vehicle's obligations plus the
// given requests, filtered by check_feasible.
inline BundleTruth exhaustive_orders(const VehicleState& v, const std::vector<Request>& extra, const RequestMap& book,
                                     const ServiceConstraints& cons, double pi, double now, const Router& router) {
  struct Item {
    NodeId node;
    RequestId id;
    bool pickup;
  };
  std::vector<Item> items;
  for (auto id : v.on_board) items.push_back({book.at(id).destination, id, false});
  for (auto id : pending_pickups(v)) {
    items.push_back({book.at(id).origin, id, true});
    items.push_back({book.at(id).destination, id, false});
  }
  RequestMap all = book;
  for (const auto& r : extra) {
    all[r.id] = r;
    items.push_back({r.origin, r.id, true});
    items.push_back({r.destination, r.id, false});
  }
  BundleTruth truth;
  std::optional<double> best;
  std::vector<bool> used(items.size(), false);
  std::vector<std::size_t> order;
  std::function<void()> rec = [&] {
    if (order.size() == items.size()) {
      Schedule s;
      for (auto k : order) {
        const auto& it = items[k];
        s.stops.push_back(it.pickup ? make_stop(it.node, {it.id}, {}, 0) : make_stop(it.node, {}, {it.id}, 0));
      }
      auto a = available_at(v, now);
      retime(s, a.node, a.time, now, router, cons);
      if (check_feasible(s, v, all, cons, now, router)) {
        ++truth.feasible_orders;
        double o = objective(s, pi);
        if (!best || o < *best) best = o;
      }
      return;
    }
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (used[k]) continue;
      if (!items[k].pickup) {
        // Drop-off only after its pickup when the pickup is part of the list.
        bool pending = false;
        for (std::size_t q = 0; q < items.size(); ++q)
          if (!used[q] && items[q].pickup && items[q].id == items[k].id) pending = true;
        if (pending) continue;
      }
      used[k] = true;
      order.push_back(k);
      rec();
      order.pop_back();
      used[k] = false;
    }
  };
  rec();
  if (best) truth.best = *best;
  return truth;
}

// Minimum of the assignment ILP by enumerating one choice (or none) per vehicle.
inline std::optional<double> brute_assignment(const BatchProblem& p, const std::vector<std::vector<V2RB>>& b) {
  std::optional<double> best;
  std::vector<int> choice(b.size(), -1);
  std::function<void(std::size_t)> rec = [&](std::size_t vi) {
    if (vi == b.size()) {
      std::map<RequestId, int> count;
      double obj = 0;
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (choice[i] < 0) continue;
        const auto& x = b[i][static_cast<std::size_t>(choice[i])];
        obj += x.objective;
        for (auto id : x.requests) ++count[id];
      }
      for (const auto& [id, c] : count)
        if (c > 1) return;
      for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& v = p.vehicles[i];
        bool owes = !v.on_board.empty() || !pending_pickups(v).empty();
        if (owes && choice[i] < 0) return;
      }
      if (!best || obj < *best) best = obj;
      return;
    }
    for (int k = -1; k < static_cast<int>(b[vi].size()); ++k) {
      choice[vi] = k;
      rec(vi + 1);
    }
  };
  rec(0);
  return best;
}

// Random batch instance on a shared router: up to 3 vehicles, up to 4 batch
// requests, optional obligations.
struct AssignmentInstance {
  std::vector<VehicleState> vehicles;
  std::vector<Request> batch;
  RequestMap book;
  ServiceConstraints cons;
  double now = 600;
};

inline AssignmentInstance random_assignment_instance(std::mt19937_64& rng, const Router& router) {
  AssignmentInstance inst;
  const auto& access = router.network().access_nodes();
  std::uniform_int_distribution<std::size_t> pick(0, access.size() - 1);
  std::uniform_int_distribution<int> small(0, 3);
  inst.cons.t_max_wait = 120 + 60 * small(rng);
  inst.cons.max_rel_detour = 0.25 * small(rng);
  inst.cons.capacity = 1 + small(rng) % 3;
  auto node = [&] { return access[pick(rng)]; };
  auto rand_req = [&](RequestId id, double t) {
    NodeId o = node(), d = node();
    while (d == o) d = node();
    return make_request(id, o, d, t, router);
  };
  RequestId next = 1;
  int nveh = 1 + small(rng) % 3;
  for (int vi = 0; vi < nveh; ++vi) {
    VehicleState v;
    v.id = vi;
    v.node = node();
    if (small(rng) == 0) {
      auto r = rand_req(next++, inst.now - 60);
      r.origin = v.node == r.destination ? r.origin : v.node;
      if (r.origin != r.destination) {
        r.direct_time = router.time(r.origin, r.destination);
        r.direct_distance = router.distance(r.origin, r.destination);
        inst.book[r.id] = r;
        v.on_board.push_back(r.id);
      }
    }
    if (small(rng) == 0) {
      auto r = rand_req(next++, inst.now - 30);
      inst.book[r.id] = r;
      Schedule s;
      for (auto id : v.on_board) s.stops.push_back(make_stop(inst.book[id].destination, {}, {id}, 0));
      s.stops.push_back(make_stop(r.origin, {r.id}, {}, 0));
      s.stops.push_back(make_stop(r.destination, {}, {r.id}, 0));
      v.schedule = s;
    } else if (!v.on_board.empty()) {
      Schedule s;
      for (auto id : v.on_board) s.stops.push_back(make_stop(inst.book[id].destination, {}, {id}, 0));
      v.schedule = s;
    }
    // Keep obligations only when some ordering serves them.
    if (!v.on_board.empty() || !v.schedule.empty()) {
      auto truth = exhaustive_orders(v, {}, inst.book, inst.cons, 1e6, inst.now, router);
      if (truth.feasible_orders == 0) {
        v.on_board.clear();
        v.schedule = {};
      }
    }
    v.status = v.schedule.empty() ? VehicleStatus::Idle : VehicleStatus::EnRoute;
    inst.vehicles.push_back(v);
  }
  int nreq = small(rng) + 1;
  for (int k = 0; k < nreq; ++k) inst.batch.push_back(rand_req(100 + k, inst.now - 20 * k));
  return inst;
}

}  // namespace rpool::oracle
