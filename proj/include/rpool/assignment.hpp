#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rpool/milp.hpp"
#include "rpool/scheduling.hpp"

namespace rpool {

/// Vehicle plus a set of newly batched requests plus all feasible schedules
/// serving them together with the vehicle's obligations (on-board customers
/// and previously assigned requests).
struct V2RB {
  std::size_t vehicle = 0;             // index into the batch's vehicle list
  std::vector<RequestId> requests;     // batch requests, ascending
  std::vector<Schedule> schedules;
  std::size_t best = 0;
  double objective = 0.0;

  std::size_t grade() const { return requests.size(); }
  const Schedule& best_schedule() const { return schedules.at(best); }
};

struct BatchProblem {
  std::span<const VehicleState> vehicles;
  /// Requests not yet assigned (R_u).
  std::vector<Request> unassigned;
  /// Every request referenced by a vehicle schedule or on board.
  const RequestMap* requests = nullptr;
};

struct EnumerationLimits {
  std::size_t max_grade = 0;                 // 0 = unlimited
  std::size_t max_bundles_per_vehicle = 0;   // 0 = unlimited
  std::size_t max_schedules_per_bundle = 0;  // 0 = unlimited
  unsigned threads = 1;
};

/// Requests assigned to the vehicle but not yet picked up (its part of R_a).
std::vector<RequestId> pending_pickups(const VehicleState& v);

/// Whether a vehicle starting at the origin of either request at time now can
/// serve both.
bool shareable(const Request& a, const Request& b, const ServiceConstraints& cons, double now, const Router& router);

/// Per vehicle: the grade-0 bundle (only when the vehicle has obligations)
/// followed by bundles of increasing grade in creation order.
std::vector<std::vector<V2RB>> build_v2rbs(const BatchProblem& problem, const ServiceConstraints& cons, double pi,
                                           double now, const Router& router, const EnumerationLimits& limits = {});

struct AssignmentResult {
  /// Per vehicle: index into its V2RB list, or nullopt to leave it unchanged.
  std::vector<std::optional<std::size_t>> chosen;
  /// R_u members not covered by any chosen bundle.
  std::vector<RequestId> uncovered;
  milp::Status status = milp::Status::Optimal;
  double objective = 0.0;
};

class AssignmentInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Assignment ILP over the bundles. Throws AssignmentInfeasible when a
/// previously assigned request appears in no bundle.
AssignmentResult solve_assignment(const BatchProblem& problem, const std::vector<std::vector<V2RB>>& v2rbs,
                                  const milp::Limits& limits = {});

/// Builds the assignment ILP; exposed for model dumps and tests.
milp::LinearModel assignment_model(const BatchProblem& problem, const std::vector<std::vector<V2RB>>& v2rbs);

}  // namespace rpool
