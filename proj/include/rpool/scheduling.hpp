#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rpool/demand.hpp"
#include "rpool/network.hpp"

namespace rpool {

inline constexpr double kTimeTol = 1e-9;
inline constexpr double kDefaultReward = 1e6;

struct ServiceConstraints {
  double t_max_wait = 360.0;
  double max_rel_detour = 0.4;
  int capacity = 4;
  double boarding_duration = 0.0;

  void validate() const;
  double pickup_deadline(const Request& r) const { return r.request_time + t_max_wait; }
  double dropoff_deadline(const Request& r) const {
    return r.request_time + t_max_wait + (1.0 + max_rel_detour) * r.direct_time;
  }
};

struct Stop {
  NodeId node = kNoNode;
  std::vector<RequestId> boarding;
  std::vector<RequestId> alighting;
  double planned_arrival = 0.0;
  double planned_departure = 0.0;
  /// Tightest deadline among the stop's boardings and alightings.
  double latest_arrival = std::numeric_limits<double>::infinity();
};

struct Schedule {
  std::vector<Stop> stops;
  /// Time from evaluation to departure at the final stop.
  double system_time = 0.0;

  bool empty() const { return stops.empty(); }
  /// Requests served by the schedule (every served request alights once), ascending.
  std::vector<RequestId> served() const;
  std::size_t served_count() const;
  double end_time() const { return stops.empty() ? 0.0 : stops.back().planned_departure; }
};

enum class VehicleStatus { Idle, EnRoute, Rebalancing };
const char* to_string(VehicleStatus s);

struct VehicleState {
  int id = 0;
  /// Current node, or the tail of the edge being traversed.
  NodeId node = kNoNode;
  NodeId edge_to = kNoNode;
  double edge_start_time = 0.0;
  double edge_arrival_time = 0.0;
  bool in_stop = false;
  double dwell_until = 0.0;
  std::vector<RequestId> on_board;
  Schedule schedule;
  VehicleStatus status = VehicleStatus::Idle;
  NodeId rebalance_target = kNoNode;

  int occupancy() const { return static_cast<int>(on_board.size()); }
  bool on_edge() const { return edge_to != kNoNode; }
  bool idle() const { return status == VehicleStatus::Idle; }
};

/// Node and time from which the vehicle can start a new leg.
struct Availability {
  NodeId node;
  double time;
};
Availability available_at(const VehicleState& v, double now);

class UnknownRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RequestMap = std::unordered_map<RequestId, Request>;

enum class ViolationKind { None, Precedence, WaitTime, Detour, Capacity };
const char* to_string(ViolationKind k);

struct Feasibility {
  ViolationKind kind = ViolationKind::None;
  RequestId request = -1;
  explicit operator bool() const { return kind == ViolationKind::None; }
};

/// Recomputes planned arrivals and departures starting at (node, time) and
/// sets system_time relative to now. Returns the final departure, or the
/// start time when empty.
double retime(Schedule& sch, NodeId start, double start_time, double now, const Router& router,
              const ServiceConstraints& cons);

/// Checks precedence, waiting time, detour and capacity in that order.
/// Throws UnknownRequest for ids missing from requests.
Feasibility check_feasible(const Schedule& sch, const VehicleState& veh, const RequestMap& requests,
                           const ServiceConstraints& cons, double now, const Router& router);

/// rho = system_time - pi * |served|.
double objective(const Schedule& sch, double pi);

/// Best insertion of req into the vehicle's schedule keeping existing stop
/// order; schedule times are refreshed. nullopt when no feasible insertion
/// exists.
std::optional<Schedule> insert_request(const Schedule& sch, const VehicleState& veh, const Request& req,
                                       const ServiceConstraints& cons, double pi, double now, const Router& router);

/// Stop at which a request boards or alights.
Stop make_stop(NodeId node, std::vector<RequestId> boarding, std::vector<RequestId> alighting, double latest);

enum class EventType {
  Request,
  Assign,
  Reject,
  Depart,
  Arrive,
  StopBegin,
  Board,
  Alight,
  StopEnd,
  Rebalance,
  RebalanceEnd,
  SimEnd
};
const char* to_string(EventType t);
std::optional<EventType> parse_event_type(const std::string& s);

struct Event {
  double time = 0.0;
  EventType type = EventType::Request;
  int vehicle = -1;
  RequestId request = -1;
  NodeId node = kNoNode;
  int occupancy = 0;
};

/// Moves the vehicle from t_begin to t_end along fastest-path legs, executing
/// stops on arrival. Executed stops are removed from the schedule and, when
/// history is given, appended to it with realized times.
void advance_vehicle(VehicleState& v, double t_begin, double t_end, const Router& router,
                     const ServiceConstraints& cons, std::vector<Event>* events = nullptr,
                     std::vector<Stop>* history = nullptr);

/// Cuts the schedule after every stop that leaves the vehicle empty, except
/// the last. Pieces are disjoint and cover all stops in order.
std::vector<Schedule> split_idle_subschedules(const Schedule& sch, int initial_occupancy = 0);

}  // namespace rpool
