#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <map>
#include <unordered_map>
#include <vector>

#include "rpool/scheduling.hpp"

namespace rpool {

struct KpiReport {
  std::size_t fleet_size = 0;
  std::size_t requests = 0;  // admitted
  std::size_t served = 0;
  std::size_t rejected = 0;
  double service_rate = 0.0;
  double avg_vehicle_revenue_hours = 0.0;
  double fleet_vkm = 0.0;
  double empty_vkm = 0.0;
  double rebalancing_vkm = 0.0;
  double served_direct_km = 0.0;
  /// Not available when no distance was served.
  std::optional<double> saved_distance;
  double avg_waiting_time = 0.0;
  double avg_detour = 0.0;
  // Per-category vehicle time in seconds summed over the fleet.
  double revenue_time = 0.0;
  double empty_drive_time = 0.0;
  double dwell_time = 0.0;
  double idle_time = 0.0;
  double sim_end = 0.0;
};

/// 1 - fleet_km / served_direct_km; nullopt when served_direct_km is not positive.
std::optional<double> saved_distance(double fleet_km, double served_direct_km);

class KpiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Folds simulation events into KPIs. Events of one vehicle must arrive in
/// time order and a request's Request event must precede its boarding. The
/// result does not depend on how events of different vehicles interleave.
class KpiAccumulator {
 public:
  KpiAccumulator(const Network& net, std::size_t fleet_size, const RequestMap& requests);

  void add(const Event& e);
  /// Closes every vehicle's time budget at sim_end.
  KpiReport finish(double sim_end) const;

 private:
  struct Times {
    double revenue = 0.0, empty_drive = 0.0, dwell = 0.0, idle = 0.0;
  };
  struct VehicleTrack {
    double last = 0.0;
    Times times;
    double fleet_m = 0.0, empty_m = 0.0, rebalancing_m = 0.0;
    int occupancy = 0;
    bool on_edge = false;
    bool in_stop = false;
    bool rebalancing = false;
    NodeId edge_from = kNoNode;
    bool edge_empty = true;
    bool edge_rebalancing = false;
  };
  struct Trip {
    double board = 0.0;
    double waiting = 0.0;
    std::optional<double> detour;
    double direct_m = 0.0;
  };

  static void close_segment(const VehicleTrack& tr, double until, Times& t);
  VehicleTrack& track(int vehicle);

  const Network& net_;
  const RequestMap& requests_;
  std::vector<VehicleTrack> tracks_;
  std::size_t requests_seen_ = 0, rejected_ = 0;
  std::unordered_map<RequestId, double> request_time_;
  std::map<RequestId, Trip> trips_;
};

/// Events CSV: time_s,event_type,vehicle_id,request_id,node,occupancy with
/// nodes written as external ids.
void write_events(const std::vector<Event>& events, const Network& net, const std::string& path);
std::vector<Event> read_events(const std::string& path, const Network& net);

/// Recomputes KPIs from a complete, time-ordered log ending with SimEnd.
/// Throws KpiError naming the last consistent timestamp otherwise.
KpiReport compute_kpis(const std::vector<Event>& events, const std::vector<Request>& requests, const Network& net,
                       std::size_t fleet_size);

}  // namespace rpool
