#include <gtest/gtest.h>

#include "../support/assignment_oracle.hpp"

using namespace rpool;

namespace {

struct Line {
  std::shared_ptr<const Network> net = std::make_shared<const Network>(make_grid_network(4, 4, 60, 600));
  Router router{net};
};

BatchProblem problem_of(const oracle::AssignmentInstance& inst) {
  BatchProblem p;
  p.vehicles = inst.vehicles;
  p.unassigned = inst.batch;
  p.requests = &inst.book;
  return p;
}

}  // namespace

TEST(Assignment, EmptyBatch) {
  Line g;
  std::vector<VehicleState> vs(2);
  vs[0].node = 0;
  vs[1].id = 1;
  vs[1].node = 5;
  RequestMap book;
  BatchProblem p{vs, {}, &book};
  auto b = build_v2rbs(p, {}, 1e6, 0, g.router);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_TRUE(b[0].empty() && b[1].empty());
  auto res = solve_assignment(p, b);
  EXPECT_FALSE(res.chosen[0] || res.chosen[1]);
  EXPECT_TRUE(res.uncovered.empty());
}

TEST(Assignment, UnreachableRequestHasNoBundle) {
  Line g;
  std::vector<VehicleState> vs(1);
  vs[0].node = 0;
  ServiceConstraints cons;
  cons.t_max_wait = 100;
  auto r = make_request(1, 15, 14, 0, g.router);
  RequestMap book;
  BatchProblem p{vs, {r}, &book};
  auto b = build_v2rbs(p, cons, 1e6, 0, g.router);
  EXPECT_TRUE(b[0].empty());
  auto res = solve_assignment(p, b);
  EXPECT_EQ(res.uncovered, std::vector<RequestId>{1});
}

TEST(Assignment, TwoRequestsOneVehicle) {
  Line g;
  std::vector<VehicleState> vs(1);
  vs[0].node = 0;
  ServiceConstraints cons;
  cons.t_max_wait = 600;
  cons.max_rel_detour = 1.0;
  auto r1 = make_request(1, 1, 3, 0, g.router);
  auto r2 = make_request(2, 2, 7, 0, g.router);
  RequestMap book;
  BatchProblem p{vs, {r1, r2}, &book};
  auto b = build_v2rbs(p, cons, 1e6, 0, g.router);
  ASSERT_EQ(b[0].size(), 3u);
  EXPECT_EQ(b[0][0].requests, std::vector<RequestId>{1});
  EXPECT_EQ(b[0][1].requests, std::vector<RequestId>{2});
  EXPECT_EQ(b[0][2].requests, (std::vector<RequestId>{1, 2}));
  auto truth = oracle::exhaustive_orders(vs[0], {r1, r2}, book, cons, 1e6, 0, g.router);
  EXPECT_EQ(b[0][2].schedules.size(), truth.feasible_orders);
  EXPECT_NEAR(b[0][2].objective, truth.best, 1e-6);
  auto res = solve_assignment(p, b);
  ASSERT_TRUE(res.chosen[0]);
  EXPECT_EQ(*res.chosen[0], 2u);
}

TEST(Assignment, PicksBetterConflictingBundle) {
  Line g;
  std::vector<VehicleState> vs(1);
  RequestMap book;
  BatchProblem p{vs, {}, &book};
  p.unassigned = {make_request(1, 0, 1, 0, g.router), make_request(2, 0, 2, 0, g.router)};
  std::vector<std::vector<V2RB>> b(1);
  V2RB a, c;
  a.requests = {1};
  a.objective = -9990;
  a.schedules.resize(1);
  c.requests = {2};
  c.objective = -9985;
  c.schedules.resize(1);
  b[0] = {a, c};
  auto res = solve_assignment(p, b);
  ASSERT_TRUE(res.chosen[0]);
  EXPECT_EQ(*res.chosen[0], 0u);
  EXPECT_EQ(res.uncovered, std::vector<RequestId>{2});
}

TEST(Assignment, OneRequestTwoVehicles) {
  Line g;
  std::vector<VehicleState> vs(2);
  vs[0].node = 0;
  vs[1].id = 1;
  vs[1].node = 2;
  RequestMap book;
  BatchProblem p{vs, {make_request(1, 1, 5, 0, g.router)}, &book};
  auto b = build_v2rbs(p, {}, 1e6, 0, g.router);
  ASSERT_EQ(b[0].size(), 1u);
  ASSERT_EQ(b[1].size(), 1u);
  EXPECT_EQ(b[0][0].objective, b[1][0].objective);
  auto res = solve_assignment(p, b);
  EXPECT_EQ(int(bool(res.chosen[0])) + int(bool(res.chosen[1])), 1);
}

TEST(Assignment, MissingObligationThrows) {
  Line g;
  std::vector<VehicleState> vs(1);
  vs[0].node = 0;
  RequestMap book{{5, make_request(5, 1, 2, 0, g.router)}};
  vs[0].schedule.stops = {make_stop(1, {5}, {}, 0), make_stop(2, {}, {5}, 0)};
  BatchProblem p{vs, {}, &book};
  std::vector<std::vector<V2RB>> none(1);
  EXPECT_THROW(solve_assignment(p, none), AssignmentInfeasible);
}

TEST(Assignment, MatchesExhaustiveSearch) {
  Line g;
  std::mt19937_64 rng(2024);
  int nontrivial = 0;
  for (int trial = 0; trial < 120; ++trial) {
    auto inst = oracle::random_assignment_instance(rng, g.router);
    auto p = problem_of(inst);
    auto b = build_v2rbs(p, inst.cons, 1e6, inst.now, g.router);
    for (std::size_t vi = 0; vi < inst.vehicles.size(); ++vi) {
      std::map<std::vector<RequestId>, const V2RB*> have;
      for (const auto& x : b[vi]) have[x.requests] = &x;
      const auto n = inst.batch.size();
      for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<Request> sub;
        std::vector<RequestId> ids;
        for (std::size_t k = 0; k < n; ++k)
          if (mask >> k & 1) {
            sub.push_back(inst.batch[k]);
            ids.push_back(inst.batch[k].id);
          }
        std::sort(ids.begin(), ids.end());
        const auto& v = inst.vehicles[vi];
        bool owes = !v.on_board.empty() || !v.schedule.empty();
        if (mask == 0 && !owes) continue;
        auto truth = oracle::exhaustive_orders(v, sub, inst.book, inst.cons, 1e6, inst.now, g.router);
        auto it = have.find(ids);
        ASSERT_EQ(truth.feasible_orders > 0, it != have.end()) << "trial " << trial << " mask " << mask;
        if (it == have.end()) continue;
        EXPECT_EQ(it->second->schedules.size(), truth.feasible_orders) << "trial " << trial;
        EXPECT_NEAR(it->second->objective, truth.best, 1e-6);
        if (ids.size() >= 2) ++nontrivial;
      }
    }
    auto res = solve_assignment(p, b);
    auto want = oracle::brute_assignment(p, b);
    ASSERT_TRUE(want.has_value());
    EXPECT_NEAR(res.objective, *want, 1e-6) << "trial " << trial;
  }
  EXPECT_GT(nontrivial, 10);
}
