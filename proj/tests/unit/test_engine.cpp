#include <gtest/gtest.h>

#include <map>

#include "rpool/engine.hpp"
#include "../support/world_builder.hpp"

namespace rpool {
namespace {

using fixture::line_world;
using fixture::seed_placing_at;
using fixture::shell_scenario;

std::vector<Event> of_type(const RunResult& r, EventType t) {
  std::vector<Event> out;
  for (const auto& e : r.events)
    if (e.type == t) out.push_back(e);
  return out;
}

Scenario small_grid(const std::string& rebalancer) {
  Scenario sc;
  sc.grid_rows = 4;
  sc.grid_cols = 4;
  sc.travel_time_scale = 1.0;
  sc.zone_reach = 120;
  sc.fleet_size = 4;
  sc.demand_rate = 40;
  sc.sim_duration = 3600;
  sc.horizon = 1800;
  sc.rebalancer = rebalancer;
  sc.seed = 7;
  return sc;
}

TEST(Engine, ZeroRequestsLeavesFleetIdle) {
  auto w = line_world({60, 60}, {600, 600}, 60);
  auto sc = shell_scenario(2, 600);
  auto r = run(sc, w);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.kpis.served, 0u);
  EXPECT_EQ(r.kpis.avg_vehicle_revenue_hours, 0.0);
  EXPECT_EQ(r.kpis.fleet_vkm, 0.0);
  EXPECT_DOUBLE_EQ(r.kpis.idle_time, 2 * 600.0);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events.back().type, EventType::SimEnd);
  EXPECT_EQ(r.events.back().time, 600.0);
}

TEST(Engine, RequestNextToIdleVehicleIsServedWithinOneStepPlusTravel) {
  auto w = line_world({60, 60}, {600, 600}, 60);
  w.requests = {make_request(0, 1, 2, 10, *w.router)};
  auto sc = shell_scenario(1, 600);
  sc.seed = seed_placing_at(sc, w, 0);
  auto r = run(sc, w);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.kpis.served, 1u);
  // Admitted and assigned at clock 60, node 0 -> node 1 takes 60 s.
  auto board = of_type(r, EventType::Board);
  ASSERT_EQ(board.size(), 1u);
  EXPECT_DOUBLE_EQ(board[0].time, 120.0);
  EXPECT_LE(board[0].time - 10.0, sc.assign_interval + 60.0);
  EXPECT_TRUE(of_type(r, EventType::Reject).empty());
}

TEST(Engine, SameSeedGivesIdenticalRuns) {
  auto sc = small_grid("sampling");
  auto a = run(sc), b = run(sc);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    EXPECT_EQ(a.events[k].time, b.events[k].time);
    EXPECT_EQ(a.events[k].type, b.events[k].type);
    EXPECT_EQ(a.events[k].vehicle, b.events[k].vehicle);
    EXPECT_EQ(a.events[k].request, b.events[k].request);
    EXPECT_EQ(a.events[k].node, b.events[k].node);
  }
  EXPECT_EQ(a.kpis.served, b.kpis.served);
  EXPECT_EQ(a.kpis.revenue_time, b.kpis.revenue_time);
  sc.seed = 8;
  auto c = run(sc);
  EXPECT_NE(a.events.size() == c.events.size() && a.kpis.revenue_time == c.kpis.revenue_time, true);
}

TEST(Engine, UnreachableRequestIsRejected) {
  std::vector<double> t(7, 60.0), l(7, 600.0);
  auto w = line_world(t, l, 60);
  w.requests = {make_request(0, 7, 6, 0, *w.router)};
  auto sc = shell_scenario(1, 600);
  sc.cons.t_max_wait = 120;
  sc.seed = seed_placing_at(sc, w, 0);
  auto r = run(sc, w);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.kpis.served, 0u);
  EXPECT_EQ(r.kpis.rejected, 1u);
  auto rej = of_type(r, EventType::Reject);
  ASSERT_EQ(rej.size(), 1u);
  EXPECT_EQ(rej[0].time, 0.0);
  ASSERT_EQ(r.zonal.size(), w.zoning.size());
  EXPECT_EQ(r.zonal[static_cast<std::size_t>(w.zoning.zone_of(7))].rejected, 1);
}

TEST(Engine, RequestDeferredOneBatchIsServed) {
  auto w = line_world({60, 60, 60}, {600, 600, 600}, 60);
  w.requests = {make_request(0, 0, 3, 1, *w.router), make_request(1, 0, 3, 2, *w.router)};
  auto sc = shell_scenario(1, 600);
  sc.max_grade = 1;
  sc.seed = seed_placing_at(sc, w, 0);
  auto r = run(sc, w);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.kpis.served, 2u);
  EXPECT_TRUE(of_type(r, EventType::Reject).empty());
  std::map<double, int> assigns;
  for (const auto& e : of_type(r, EventType::Assign)) ++assigns[e.time];
  EXPECT_EQ(assigns, (std::map<double, int>{{60.0, 1}, {120.0, 1}}));
}

TEST(Engine, FirstBatchPolicyRejectsUncovered) {
  auto w = line_world({60, 60, 60}, {600, 600, 600}, 60);
  w.requests = {make_request(0, 0, 3, 1, *w.router), make_request(1, 0, 3, 2, *w.router)};
  auto sc = shell_scenario(1, 600);
  sc.max_grade = 1;
  sc.rejection = "first_batch";
  sc.seed = seed_placing_at(sc, w, 0);
  auto r = run(sc, w);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.kpis.served, 1u);
  EXPECT_EQ(r.kpis.rejected, 1u);
}

TEST(Engine, ExpireRequestsUsesVehicleAvailability) {
  auto w = line_world({60, 60, 60, 60}, {600, 600, 600, 600}, 60);
  ServiceConstraints cons;
  cons.t_max_wait = 120;
  auto req = make_request(0, 2, 3, 0, *w.router);
  VehicleState near, far;
  near.node = 0;
  far.node = 3;
  far.id = 1;
  // Node 0 reaches node 2 at 120 (deadline inclusive).
  EXPECT_TRUE(expire_requests({req}, {near}, cons, 0, *w.router).empty());
  EXPECT_EQ(expire_requests({req}, {near}, cons, 1, *w.router), std::vector<RequestId>{0});
  EXPECT_TRUE(expire_requests({req}, {near, far}, cons, 60, *w.router).empty());
  EXPECT_EQ(expire_requests({req}, {}, cons, 0, *w.router), std::vector<RequestId>{0});
}

TEST(Engine, UniformPlacementSplitsEvenly) {
  auto w = line_world({60}, {600}, 30);
  auto sc = shell_scenario(1000, 600);
  sc.seed = 3;
  auto fleet = initial_fleet(sc, w);
  ASSERT_EQ(fleet.size(), 1000u);
  int at0 = 0;
  for (const auto& v : fleet) at0 += v.node == 0;
  EXPECT_NEAR(at0, 500, 50);
  auto again = initial_fleet(sc, w);
  for (std::size_t k = 0; k < fleet.size(); ++k) EXPECT_EQ(fleet[k].node, again[k].node);
  sc.fleet_size = 1;
  auto one = initial_fleet(sc, w);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].idle());
}

TEST(Engine, ForecastPlacementFollowsOrigins) {
  auto w = line_world({600, 600}, {600, 600}, 60);
  ASSERT_EQ(w.zoning.size(), 3u);
  w.forecast.add(w.zoning.zone_of(2), w.zoning.zone_of(0), 0, 5.0);
  auto sc = shell_scenario(20, 600);
  sc.placement = "forecast";
  for (const auto& v : initial_fleet(sc, w)) EXPECT_EQ(v.node, 2);
}

TEST(Engine, InvariantsHoldForEveryStrategy) {
  for (std::string rb : {"none", "react", "qt", "hor", "sampling"}) {
    auto sc = small_grid(rb);
    auto r = run(sc);
    EXPECT_TRUE(r.violations.empty()) << rb << ": " << (r.violations.empty() ? "" : r.violations.front());
    EXPECT_EQ(r.kpis.requests, r.kpis.served + r.kpis.rejected + r.unresolved) << rb;
    EXPECT_LE(r.max_occupancy, static_cast<std::size_t>(sc.cons.capacity));
    const double budget = r.kpis.revenue_time + r.kpis.empty_drive_time + r.kpis.dwell_time + r.kpis.idle_time;
    EXPECT_NEAR(budget, sc.fleet_size * r.kpis.sim_end, 1e-6);
    if (rb != "none") {
      for (const auto& c : r.rebalance_calls) EXPECT_EQ(std::fmod(c.time, sc.rebalance_interval), 0.0) << rb;
      EXPECT_EQ(r.rebalance_calls.size(), static_cast<std::size_t>(sc.sim_duration / sc.rebalance_interval));
    }
  }
}

TEST(Engine, MyopicForecastRuns) {
  auto sc = small_grid("sampling");
  sc.forecast = "myopic";
  auto r = run(sc);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_GT(r.kpis.served, 0u);
}

TEST(Config, ParsesKeyValueText) {
  Scenario sc;
  apply_config_text(sc, "# comment\n grid_rows = 3 \ngrid_cols=5 # trailing\n\nrebalancer = qt\nmax_wait = 300\n"
                        "strict_linkage = true\n");
  EXPECT_EQ(sc.grid_rows, 3);
  EXPECT_EQ(sc.grid_cols, 5);
  EXPECT_EQ(sc.rebalancer, "qt");
  EXPECT_EQ(sc.cons.t_max_wait, 300.0);
  EXPECT_TRUE(sc.strict_linkage);
  EXPECT_NO_THROW(sc.validate());
}

TEST(Config, RejectsBadInput) {
  Scenario sc;
  EXPECT_THROW(apply_config_text(sc, "nonsense = 1\n"), ConfigError);
  EXPECT_THROW(apply_config_text(sc, "fleet_size = many\n"), ConfigError);
  EXPECT_THROW(apply_config_text(sc, "just a line\n"), ConfigError);
  EXPECT_THROW(apply_config_text(sc, "strict_linkage = maybe\n"), ConfigError);
  try {
    apply_config_text(sc, "grid_rows = 2\nbogus = 1\n", "x.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.conf:2"), std::string::npos);
  }
}

TEST(Config, ValidationRules) {
  Scenario sc;
  sc.grid_rows = sc.grid_cols = 3;
  EXPECT_NO_THROW(sc.validate());
  auto bad = [&](auto mutate) {
    Scenario s = sc;
    mutate(s);
    EXPECT_THROW(s.validate(), ConfigError);
  };
  bad([](Scenario& s) { s.rebalance_interval = 910; });
  bad([](Scenario& s) { s.horizon = 1000; });
  bad([](Scenario& s) { s.fleet_size = 0; });
  bad([](Scenario& s) { s.network_dir = "somewhere"; });
  bad([](Scenario& s) { s.rebalancer = "magic"; });
  bad([](Scenario& s) { s.forecast = "file"; });
  bad([](Scenario& s) { s.cons.capacity = 0; });
}

TEST(Config, EveryKeyRoundTrips) {
  Scenario sc;
  sc.grid_rows = 2;
  sc.gamma = 0.25;
  sc.rebalancer = "hor";
  sc.cons.capacity = 3;
  Scenario copy;
  for (const auto& [k, v] : scenario_values(sc)) set_scenario_value(copy, k, v);
  EXPECT_EQ(scenario_values(copy), scenario_values(sc));
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
}

}  // namespace
}  // namespace rpool
