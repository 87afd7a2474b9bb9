#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <random>

#include "rpool/demand.hpp"
#include "rpool/scheduling.hpp"

namespace rpool::oracle {

struct Fixture {
  std::shared_ptr<const Network> net = std::make_shared<const Network>(make_grid_network(4, 4, 60, 600));
  Router router{net};
  ServiceConstraints cons;
  RequestMap book;

  const Request& add(RequestId id, NodeId o, NodeId d, double t) {
    return book[id] = make_request(id, o, d, t, router);
  }
};

inline VehicleState vehicle_at(NodeId n, int id = 0) {
  VehicleState v;
  v.id = id;
  v.node = n;
  return v;
}

inline Schedule from_stops(std::vector<Stop> stops, const VehicleState& v, double now, const Fixture& f) {
  Schedule s;
  s.stops = std::move(stops);
  auto a = available_at(v, now);
  retime(s, a.node, a.time, now, f.router, f.cons);
  return s;
}

inline Stop pick(NodeId n, RequestId id, const Fixture& f) {
  return make_stop(n, {id}, {}, f.cons.pickup_deadline(f.book.at(id)));
}
inline Stop drop(NodeId n, RequestId id, const Fixture& f) {
  return make_stop(n, {}, {id}, f.cons.dropoff_deadline(f.book.at(id)));
}

// Independent brute force: every (i <= j) pair, full feasibility check, minimum objective.
inline std::optional<double> brute_insert(const Schedule& sch, const VehicleState& v, const Request& r, const Fixture& f,
                                   double pi, double now) {
  std::optional<double> best;
  RequestMap book = f.book;
  book[r.id] = r;
  for (std::size_t i = 0; i <= sch.stops.size(); ++i)
    for (std::size_t j = i; j <= sch.stops.size(); ++j) {
      std::vector<Stop> stops(sch.stops.begin(), sch.stops.begin() + i);
      stops.push_back(make_stop(r.origin, {r.id}, {}, 0));
      stops.insert(stops.end(), sch.stops.begin() + i, sch.stops.begin() + j);
      stops.push_back(make_stop(r.destination, {}, {r.id}, 0));
      stops.insert(stops.end(), sch.stops.begin() + j, sch.stops.end());
      auto cand = from_stops(stops, v, now, f);
      if (!check_feasible(cand, v, book, f.cons, now, f.router)) continue;
      double obj = objective(cand, pi);
      if (!best || obj < *best) best = obj;
    }
  return best;
}


struct InsertionCheck {
  bool got_feasible = false;
  bool want_feasible = false;
  double got = 0.0;
  double want = 0.0;
  bool result_passes_check = true;
};

/// One randomized case: a feasible base schedule of up to 4 stops on a 4x4
/// grid, one new request, insert_request against brute force.
inline InsertionCheck insertion_trial(std::mt19937_64& rng, int trial) {
  Fixture f;
  f.cons.t_max_wait = 120 + 60 * (trial % 5);
  f.cons.max_rel_detour = 0.2 * (trial % 4);
  f.cons.capacity = 1 + trial % 3;
  std::uniform_int_distribution<NodeId> node(0, 15);
  auto rand_req = [&](RequestId id, double t) {
    NodeId o = node(rng), d = node(rng);
    while (d == o) d = node(rng);
    return f.add(id, o, d, t);
  };
  auto v = vehicle_at(node(rng));
  int nreq = 1 + trial % 2;
  std::vector<Stop> stops;
  for (RequestId id = 1; id <= nreq; ++id) {
    const auto& r = rand_req(id, 0);
    stops.push_back(pick(r.origin, id, f));
    stops.push_back(drop(r.destination, id, f));
  }
  std::shuffle(stops.begin(), stops.end(), rng);
  auto base = from_stops(stops, v, 0, f);
  if (!check_feasible(base, v, f.book, f.cons, 0, f.router)) base = Schedule{};
  Request nr = rand_req(9, 30);
  f.book.erase(9);
  InsertionCheck c;
  auto got = insert_request(base, v, nr, f.cons, 1e6, 30, f.router);
  auto base30 = base;
  auto a = available_at(v, 30);
  retime(base30, a.node, a.time, 30, f.router, f.cons);
  auto want = brute_insert(base30, v, nr, f, 1e6, 30);
  c.got_feasible = bool(got);
  c.want_feasible = bool(want);
  if (got) {
    c.got = objective(*got, 1e6);
    RequestMap book = f.book;
    book[nr.id] = nr;
    c.result_passes_check = bool(check_feasible(*got, v, book, f.cons, 30, f.router));
  }
  if (want) c.want = *want;
  return c;
}

}  // namespace rpool::oracle
