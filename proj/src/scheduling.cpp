#include "rpool/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rpool {

void ServiceConstraints::validate() const {
  if (!(t_max_wait >= 0.0) || !(max_rel_detour >= 0.0) || !(boarding_duration >= 0.0))
    throw std::invalid_argument("service constraints must be nonnegative");
  if (capacity < 1) throw std::invalid_argument("vehicle capacity must be at least 1");
}

std::vector<RequestId> Schedule::served() const {
  std::vector<RequestId> out;
  for (const auto& s : stops) out.insert(out.end(), s.alighting.begin(), s.alighting.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t Schedule::served_count() const {
  std::size_t n = 0;
  for (const auto& s : stops) n += s.alighting.size();
  return n;
}

const char* to_string(VehicleStatus s) {
  switch (s) {
    case VehicleStatus::Idle: return "idle";
    case VehicleStatus::EnRoute: return "en_route";
    case VehicleStatus::Rebalancing: return "rebalancing";
  }
  return "?";
}

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::None: return "none";
    case ViolationKind::Precedence: return "precedence";
    case ViolationKind::WaitTime: return "wait_time";
    case ViolationKind::Detour: return "detour";
    case ViolationKind::Capacity: return "capacity";
  }
  return "?";
}

namespace {

constexpr const char* kEventNames[] = {"request", "assign", "reject",    "depart",        "arrive",
                                       "stop_begin", "board", "alight", "stop_end", "rebalance",
                                       "rebalance_end", "sim_end"};

}  // namespace

const char* to_string(EventType t) { return kEventNames[static_cast<int>(t)]; }

std::optional<EventType> parse_event_type(const std::string& s) {
  for (int i = 0; i < static_cast<int>(std::size(kEventNames)); ++i)
    if (s == kEventNames[i]) return static_cast<EventType>(i);
  return std::nullopt;
}

Availability available_at(const VehicleState& v, double now) {
  if (v.on_edge()) return {v.edge_to, v.edge_arrival_time};
  if (v.in_stop) return {v.node, std::max(now, v.dwell_until)};
  return {v.node, now};
}

Stop make_stop(NodeId node, std::vector<RequestId> boarding, std::vector<RequestId> alighting, double latest) {
  Stop s;
  s.node = node;
  s.boarding = std::move(boarding);
  s.alighting = std::move(alighting);
  s.latest_arrival = latest;
  return s;
}

double retime(Schedule& sch, NodeId start, double start_time, double now, const Router& router,
              const ServiceConstraints& cons) {
  double t = start_time;
  NodeId at = start;
  for (auto& s : sch.stops) {
    t += router.time(at, s.node);
    s.planned_arrival = t;
    t += cons.boarding_duration;
    s.planned_departure = t;
    at = s.node;
  }
  sch.system_time = sch.stops.empty() ? 0.0 : t - now;
  return t;
}

double objective(const Schedule& sch, double pi) {
  return sch.system_time - pi * static_cast<double>(sch.served_count());
}

Feasibility check_feasible(const Schedule& sch, const VehicleState& veh, const RequestMap& requests,
                           const ServiceConstraints& cons, double now, const Router& router) {
  auto lookup = [&](RequestId id) -> const Request& {
    auto it = requests.find(id);
    if (it == requests.end()) throw UnknownRequest("unknown request id " + std::to_string(id));
    return it->second;
  };
  for (const auto& s : sch.stops) {
    for (auto id : s.boarding) lookup(id);
    for (auto id : s.alighting) lookup(id);
  }

  // Precedence: board once, alight once after boarding, nobody left aboard.
  {
    std::set<RequestId> aboard(veh.on_board.begin(), veh.on_board.end());
    std::set<RequestId> done;
    for (const auto& s : sch.stops) {
      for (auto id : s.alighting) {
        if (!aboard.erase(id)) return {ViolationKind::Precedence, id};
        done.insert(id);
      }
      for (auto id : s.boarding) {
        if (aboard.count(id) || done.count(id)) return {ViolationKind::Precedence, id};
        if (std::find(s.alighting.begin(), s.alighting.end(), id) != s.alighting.end())
          return {ViolationKind::Precedence, id};
        aboard.insert(id);
      }
    }
    if (!aboard.empty()) return {ViolationKind::Precedence, *aboard.begin()};
  }

  Schedule timed = sch;
  auto start = available_at(veh, now);
  retime(timed, start.node, start.time, now, router, cons);
  for (const auto& s : timed.stops)
    for (auto id : s.boarding)
      if (s.planned_arrival > cons.pickup_deadline(lookup(id)) + kTimeTol) return {ViolationKind::WaitTime, id};
  for (const auto& s : timed.stops)
    for (auto id : s.alighting)
      if (s.planned_arrival > cons.dropoff_deadline(lookup(id)) + kTimeTol) return {ViolationKind::Detour, id};

  int occ = veh.occupancy();
  if (occ > cons.capacity) return {ViolationKind::Capacity, veh.on_board.front()};
  for (const auto& s : timed.stops) {
    occ -= static_cast<int>(s.alighting.size());
    occ += static_cast<int>(s.boarding.size());
    if (occ > cons.capacity) return {ViolationKind::Capacity, s.boarding.empty() ? -1 : s.boarding.front()};
  }
  return {};
}

std::optional<Schedule> insert_request(const Schedule& sch, const VehicleState& veh, const Request& req,
                                       const ServiceConstraints& cons, double pi, double now, const Router& router) {
  const auto start = available_at(veh, now);
  const double pickup_deadline = cons.pickup_deadline(req);
  if (start.time + router.time(start.node, req.origin) > pickup_deadline + kTimeTol) return std::nullopt;

  const Stop pickup = make_stop(req.origin, {req.id}, {}, pickup_deadline);
  const Stop dropoff = make_stop(req.destination, {}, {req.id}, cons.dropoff_deadline(req));
  const auto& stops = sch.stops;
  const std::size_t n = stops.size();
  const double reward = pi * static_cast<double>(sch.served_count() + 1);

  std::vector<const Stop*> seq(n + 2);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0, best_j = 0;
  bool found = false;
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = i; j <= n; ++j) {
      std::size_t k = 0;
      for (std::size_t a = 0; a < i; ++a) seq[k++] = &stops[a];
      seq[k++] = &pickup;
      for (std::size_t a = i; a < j; ++a) seq[k++] = &stops[a];
      seq[k++] = &dropoff;
      for (std::size_t a = j; a < n; ++a) seq[k++] = &stops[a];

      double t = start.time;
      NodeId at = start.node;
      int occ = veh.occupancy();
      bool ok = true;
      for (const Stop* s : seq) {
        t += router.time(at, s->node);
        if (t > s->latest_arrival + kTimeTol) {
          ok = false;
          break;
        }
        occ += static_cast<int>(s->boarding.size()) - static_cast<int>(s->alighting.size());
        if (occ > cons.capacity) {
          ok = false;
          break;
        }
        t += cons.boarding_duration;
        at = s->node;
      }
      if (!ok) continue;
      double obj = (t - now) - reward;
      if (obj < best - kTimeTol) {
        best = obj;
        best_i = i;
        best_j = j;
        found = true;
      }
    }
  }
  if (!found) return std::nullopt;
  Schedule out;
  out.stops.reserve(n + 2);
  out.stops.insert(out.stops.end(), stops.begin(), stops.begin() + static_cast<std::ptrdiff_t>(best_i));
  out.stops.push_back(pickup);
  out.stops.insert(out.stops.end(), stops.begin() + static_cast<std::ptrdiff_t>(best_i),
                   stops.begin() + static_cast<std::ptrdiff_t>(best_j));
  out.stops.push_back(dropoff);
  out.stops.insert(out.stops.end(), stops.begin() + static_cast<std::ptrdiff_t>(best_j), stops.end());
  retime(out, start.node, start.time, now, router, cons);
  return out;
}

void advance_vehicle(VehicleState& v, double t_begin, double t_end, const Router& router,
                     const ServiceConstraints& cons, std::vector<Event>* events, std::vector<Stop>* history) {
  double cur = t_begin;
  auto emit = [&](EventType type, RequestId req = -1) {
    if (events) events->push_back({cur, type, v.id, req, v.node, v.occupancy()});
  };
  auto depart_towards = [&](NodeId target) {
    NodeId next = router.next_hop(v.node, target);
    if (next == kNoNode) throw std::logic_error("vehicle " + std::to_string(v.id) + " cannot reach its next stop");
    const Edge* e = router.network().edge_between(v.node, next);
    emit(EventType::Depart);
    v.edge_to = next;
    v.edge_start_time = cur;
    v.edge_arrival_time = cur + e->travel_time;
  };

  while (true) {
    if (v.on_edge()) {
      if (v.edge_arrival_time > t_end + kTimeTol) return;
      cur = v.edge_arrival_time;
      v.node = v.edge_to;
      v.edge_to = kNoNode;
      emit(EventType::Arrive);
      continue;
    }
    if (v.in_stop) {
      if (v.dwell_until > t_end + kTimeTol) return;
      cur = std::max(cur, v.dwell_until);
      v.in_stop = false;
      emit(EventType::StopEnd);
      if (v.schedule.empty() && v.status == VehicleStatus::EnRoute) v.status = VehicleStatus::Idle;
      continue;
    }
    if (!v.schedule.empty()) {
      Stop& s = v.schedule.stops.front();
      if (v.node != s.node) {
        depart_towards(s.node);
        continue;
      }
      emit(EventType::StopBegin);
      for (auto id : s.alighting) {
        auto it = std::find(v.on_board.begin(), v.on_board.end(), id);
        if (it == v.on_board.end())
          throw std::logic_error("request " + std::to_string(id) + " alights but is not on board");
        v.on_board.erase(it);
        emit(EventType::Alight, id);
      }
      for (auto id : s.boarding) {
        v.on_board.push_back(id);
        emit(EventType::Board, id);
      }
      if (v.occupancy() > cons.capacity)
        throw std::logic_error("vehicle " + std::to_string(v.id) + " exceeds its capacity");
      v.in_stop = true;
      v.dwell_until = cur + cons.boarding_duration;
      if (history) {
        Stop done = s;
        done.planned_arrival = cur;
        done.planned_departure = v.dwell_until;
        history->push_back(std::move(done));
      }
      v.schedule.stops.erase(v.schedule.stops.begin());
      continue;
    }
    if (v.status == VehicleStatus::Rebalancing && v.rebalance_target != kNoNode) {
      if (v.node != v.rebalance_target) {
        depart_towards(v.rebalance_target);
        continue;
      }
      v.rebalance_target = kNoNode;
      v.status = VehicleStatus::Idle;
      emit(EventType::RebalanceEnd);
      continue;
    }
    if (v.status != VehicleStatus::Idle && v.occupancy() == 0) v.status = VehicleStatus::Idle;
    return;
  }
}

std::vector<Schedule> split_idle_subschedules(const Schedule& sch, int initial_occupancy) {
  std::vector<Schedule> out;
  if (sch.stops.empty()) return out;
  Schedule piece;
  int occ = initial_occupancy;
  for (std::size_t k = 0; k < sch.stops.size(); ++k) {
    const auto& s = sch.stops[k];
    piece.stops.push_back(s);
    occ += static_cast<int>(s.boarding.size()) - static_cast<int>(s.alighting.size());
    if (occ == 0 && k + 1 < sch.stops.size()) {
      out.push_back(std::move(piece));
      piece = Schedule{};
    }
  }
  out.push_back(std::move(piece));
  for (auto& p : out) p.system_time = p.stops.back().planned_departure - p.stops.front().planned_arrival;
  return out;
}

}  // namespace rpool
