#include "rpool/kpi.hpp"

#include <fstream>
#include <sstream>

#include "rpool/csv.hpp"

namespace rpool {

std::optional<double> saved_distance(double fleet_km, double served_direct_km) {
  if (!(served_direct_km > 0.0)) return std::nullopt;
  return (served_direct_km - fleet_km) / served_direct_km;
}

KpiAccumulator::KpiAccumulator(const Network& net, std::size_t fleet_size, const RequestMap& requests)
    : net_(net), requests_(requests), tracks_(fleet_size) {}

KpiAccumulator::VehicleTrack& KpiAccumulator::track(int vehicle) {
  if (vehicle < 0 || static_cast<std::size_t>(vehicle) >= tracks_.size())
    throw KpiError("event references unknown vehicle " + std::to_string(vehicle));
  return tracks_[static_cast<std::size_t>(vehicle)];
}

void KpiAccumulator::close_segment(const VehicleTrack& tr, double until, Times& t) {
  const double dt = until - tr.last;
  if (dt <= 0) return;
  if (tr.occupancy > 0)
    t.revenue += dt;
  else if (tr.on_edge)
    t.empty_drive += dt;
  else if (tr.in_stop)
    t.dwell += dt;
  else
    t.idle += dt;
}

void KpiAccumulator::add(const Event& e) {
  switch (e.type) {
    case EventType::Request:
      ++requests_seen_;
      request_time_[e.request] = e.time;
      return;
    case EventType::Reject:
      ++rejected_;
      return;
    case EventType::SimEnd:
      return;
    default:
      break;
  }
  auto& tr = track(e.vehicle);
  if (e.time < tr.last - kTimeTol)
    throw KpiError("events of vehicle " + std::to_string(e.vehicle) + " are out of order at t=" +
                   csv::format_double(e.time));
  close_segment(tr, e.time, tr.times);
  tr.last = std::max(tr.last, e.time);
  switch (e.type) {
    case EventType::Assign:
      tr.rebalancing = false;
      break;
    case EventType::Rebalance:
      tr.rebalancing = true;
      break;
    case EventType::RebalanceEnd:
      tr.rebalancing = false;
      break;
    case EventType::Depart:
      tr.on_edge = true;
      tr.edge_from = e.node;
      tr.edge_empty = tr.occupancy == 0;
      tr.edge_rebalancing = tr.rebalancing;
      break;
    case EventType::Arrive: {
      if (!tr.on_edge) throw KpiError("arrival without departure at t=" + csv::format_double(e.time));
      const Edge* edge = net_.edge_between(tr.edge_from, e.node);
      if (!edge) throw KpiError("arrival over a missing edge at t=" + csv::format_double(e.time));
      tr.fleet_m += edge->length;
      if (tr.edge_empty) tr.empty_m += edge->length;
      if (tr.edge_rebalancing) tr.rebalancing_m += edge->length;
      tr.on_edge = false;
      break;
    }
    case EventType::StopBegin:
      tr.in_stop = true;
      break;
    case EventType::StopEnd:
      tr.in_stop = false;
      break;
    case EventType::Board: {
      ++tr.occupancy;
      auto it = request_time_.find(e.request);
      if (it == request_time_.end())
        throw KpiError("boarding of unannounced request " + std::to_string(e.request));
      auto& trip = trips_[e.request];
      trip.board = e.time;
      trip.waiting = e.time - it->second;
      break;
    }
    case EventType::Alight: {
      --tr.occupancy;
      auto it = trips_.find(e.request);
      auto rq = requests_.find(e.request);
      if (it == trips_.end() || rq == requests_.end() || it->second.detour)
        throw KpiError("alighting of unknown request " + std::to_string(e.request));
      it->second.direct_m = rq->second.direct_distance;
      it->second.detour = (e.time - it->second.board - rq->second.direct_time) / rq->second.direct_time;
      break;
    }
    default:
      break;
  }
}

KpiReport KpiAccumulator::finish(double sim_end) const {
  KpiReport r;
  Times t;
  double fleet_m = 0.0, empty_m = 0.0, rebalancing_m = 0.0;
  for (const auto& tr : tracks_) {
    Times own = tr.times;
    close_segment(tr, sim_end, own);
    t.revenue += own.revenue;
    t.empty_drive += own.empty_drive;
    t.dwell += own.dwell;
    t.idle += own.idle;
    fleet_m += tr.fleet_m;
    empty_m += tr.empty_m;
    rebalancing_m += tr.rebalancing_m;
  }
  std::size_t served = 0;
  double direct_m = 0.0, waiting_sum = 0.0, detour_sum = 0.0;
  for (const auto& [id, trip] : trips_) {
    waiting_sum += trip.waiting;
    if (!trip.detour) continue;
    ++served;
    direct_m += trip.direct_m;
    detour_sum += *trip.detour;
  }
  r.fleet_size = tracks_.size();
  r.requests = requests_seen_;
  r.served = served;
  r.rejected = rejected_;
  r.service_rate = requests_seen_ ? static_cast<double>(served) / static_cast<double>(requests_seen_) : 0.0;
  r.revenue_time = t.revenue;
  r.empty_drive_time = t.empty_drive;
  r.dwell_time = t.dwell;
  r.idle_time = t.idle;
  r.avg_vehicle_revenue_hours = tracks_.empty() ? 0.0 : t.revenue / static_cast<double>(tracks_.size()) / 3600.0;
  r.fleet_vkm = fleet_m / 1000.0;
  r.empty_vkm = empty_m / 1000.0;
  r.rebalancing_vkm = rebalancing_m / 1000.0;
  r.served_direct_km = direct_m / 1000.0;
  r.saved_distance = saved_distance(r.fleet_vkm, r.served_direct_km);
  r.avg_waiting_time = trips_.empty() ? 0.0 : waiting_sum / static_cast<double>(trips_.size());
  r.avg_detour = served ? detour_sum / static_cast<double>(served) : 0.0;
  r.sim_end = sim_end;
  return r;
}

namespace {

std::string node_text(NodeId n, const Network& net) {
  return n == kNoNode ? std::string("-1") : std::to_string(net.external_id(n));
}

}  // namespace

void write_events(const std::vector<Event>& events, const Network& net, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "time_s,event_type,vehicle_id,request_id,node,occupancy\n";
  for (const auto& e : events)
    f << csv::format_double(e.time) << ',' << to_string(e.type) << ',' << e.vehicle << ',' << e.request << ','
      << node_text(e.node, net) << ',' << e.occupancy << '\n';
}

std::vector<Event> read_events(const std::string& path, const Network& net) {
  auto t = csv::read_file(path);
  const auto c_time = t.column("time_s"), c_type = t.column("event_type"), c_veh = t.column("vehicle_id"),
             c_req = t.column("request_id"), c_node = t.column("node"), c_occ = t.column("occupancy");
  std::vector<Event> out;
  out.reserve(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& row = t.rows[k];
    Event e;
    e.time = csv::to_double(row.at(c_time));
    auto type = parse_event_type(row.at(c_type));
    if (!type) throw std::runtime_error(path + ":" + std::to_string(t.lines[k]) + ": unknown event type");
    e.type = *type;
    e.vehicle = static_cast<int>(csv::to_int(row.at(c_veh)));
    e.request = csv::to_int(row.at(c_req));
    const auto node = csv::to_int(row.at(c_node));
    e.node = node < 0 ? kNoNode : net.index_of(node);
    e.occupancy = static_cast<int>(csv::to_int(row.at(c_occ)));
    out.push_back(e);
  }
  return out;
}

KpiReport compute_kpis(const std::vector<Event>& events, const std::vector<Request>& requests, const Network& net,
                       std::size_t fleet_size) {
  RequestMap book;
  for (const auto& r : requests) book[r.id] = r;
  KpiAccumulator acc(net, fleet_size, book);
  double last = 0.0;
  bool ended = false;
  for (const auto& e : events) {
    if (ended || e.time < last - kTimeTol)
      throw KpiError("event log inconsistent after t=" + csv::format_double(last));
    try {
      acc.add(e);
    } catch (const KpiError& err) {
      throw KpiError(std::string(err.what()) + " (last consistent timestamp " + csv::format_double(last) + ")");
    }
    last = std::max(last, e.time);
    if (e.type == EventType::SimEnd) ended = true;
  }
  if (!ended) throw KpiError("event log truncated; last consistent timestamp " + csv::format_double(last));
  return acc.finish(last);
}

}  // namespace rpool
