// Acceptance checks: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "../support/assignment_oracle.hpp"
#include "../support/milp_oracle.hpp"
#include "../support/network_oracle.hpp"
#include "../support/rebalancing_oracle.hpp"
#include "../support/scheduling_oracle.hpp"
#include "../support/world_builder.hpp"
#include "rpool/demand.hpp"
#include "rpool/engine.hpp"
#include "rpool/kpi.hpp"
#include "rpool/reporting.hpp"

using namespace rpool;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << x;
  return s.str();
}

std::string join(const std::vector<double>& xs, int digits = 0) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? "," : "") + fmt(xs[k], digits);
  return out;
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};
const std::vector<std::string> kStrategies = {"none", "react", "qt", "hor", "sampling"};

Scenario grid_scenario() { return load_scenario(RPOOL_GRID_CONFIG); }

// Strategy -> per-seed results of the grid scenario, shared by several criteria.
struct GridRuns {
  std::map<std::string, std::vector<RunResult>> by_strategy;
  double seconds = 0.0;
};

const GridRuns& grid_runs() {
  static const GridRuns runs = [] {
    GridRuns g;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& rb : kStrategies)
      for (auto seed : kSeeds) {
        auto sc = grid_scenario();
        sc.rebalancer = rb;
        sc.seed = seed;
        g.by_strategy[rb].push_back(run(sc));
      }
    g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return g;
  }();
  return runs;
}

std::vector<double> served_of(const std::vector<RunResult>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(static_cast<double>(r.kpis.served));
  return out;
}

Outcome criterion1() {
  const auto& g = grid_runs();
  const auto none = served_of(g.by_strategy.at("none")), samp = served_of(g.by_strategy.at("sampling"));
  std::vector<double> vrh_none, vrh_samp;
  for (const auto& r : g.by_strategy.at("none")) vrh_none.push_back(r.kpis.avg_vehicle_revenue_hours);
  for (const auto& r : g.by_strategy.at("sampling")) vrh_samp.push_back(r.kpis.avg_vehicle_revenue_hours);
  const double mn = median(none), ms = median(samp);
  const bool served_ok = ms >= 1.25 * mn;
  const bool vrh_ok = median(vrh_samp) > median(vrh_none);
  return {served_ok && vrh_ok, "served median sampling " + fmt(ms, 0) + " [" + join(samp) + "] vs none " + fmt(mn, 0) +
                                   " [" + join(none) + "] (+" + fmt(100 * (ms / mn - 1), 1) + "%), VRH median " +
                                   fmt(median(vrh_samp)) + " h vs " + fmt(median(vrh_none)) + " h, " +
                                   fmt(g.seconds, 1) + " s for all grid runs"};
}

Outcome criterion2() {
  const auto& g = grid_runs();
  const double ms = median(served_of(g.by_strategy.at("sampling")));
  bool ok = true;
  std::string detail = "served medians: sampling " + fmt(ms, 0);
  for (std::string rb : {"react", "qt", "hor"}) {
    const double m = median(served_of(g.by_strategy.at(rb)));
    ok = ok && ms >= m;
    detail += ", " + rb + " " + fmt(m, 0);
  }
  return {ok, detail};
}

Outcome criterion3() {
  std::mt19937_64 rng(31);
  int mismatches = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto p = oracle::random_rebalancing_problem(rng);
    auto want = oracle::brute_rebalancing(p);
    auto sol = solve_rebalancing(p);
    if (!want || sol.status != milp::Status::Optimal) {
      ++mismatches;
      continue;
    }
    const double diff = std::abs(sol.objective - *want);
    worst = std::max(worst, diff);
    if (diff > 1e-6) ++mismatches;
  }
  return {mismatches == 0, "200 instances, " + std::to_string(mismatches) + " mismatches, max |diff| " +
                               fmt(worst, 9)};
}

Outcome criterion4() {
  auto net = std::make_shared<const Network>(make_grid_network(4, 4, 60, 600));
  Router router(net);
  std::mt19937_64 rng(4242);
  int bad_opt = 0, bad_enum = 0, subsets = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = oracle::random_assignment_instance(rng, router);
    BatchProblem p;
    p.vehicles = inst.vehicles;
    p.unassigned = inst.batch;
    p.requests = &inst.book;
    auto b = build_v2rbs(p, inst.cons, 1e6, inst.now, router);
    for (std::size_t vi = 0; vi < inst.vehicles.size(); ++vi) {
      std::map<std::vector<RequestId>, const V2RB*> have;
      for (const auto& x : b[vi]) have[x.requests] = &x;
      const auto& v = inst.vehicles[vi];
      const bool owes = !v.on_board.empty() || !v.schedule.empty();
      for (std::uint32_t mask = 0; mask < (1u << inst.batch.size()); ++mask) {
        if (mask == 0 && !owes) continue;
        std::vector<Request> sub;
        std::vector<RequestId> ids;
        for (std::size_t k = 0; k < inst.batch.size(); ++k)
          if (mask >> k & 1) {
            sub.push_back(inst.batch[k]);
            ids.push_back(inst.batch[k].id);
          }
        std::sort(ids.begin(), ids.end());
        ++subsets;
        auto truth = oracle::exhaustive_orders(v, sub, inst.book, inst.cons, 1e6, inst.now, router);
        auto it = have.find(ids);
        if ((truth.feasible_orders > 0) != (it != have.end())) {
          ++bad_enum;
          continue;
        }
        if (it != have.end() && (it->second->schedules.size() != truth.feasible_orders ||
                                 std::abs(it->second->objective - truth.best) > 1e-6))
          ++bad_enum;
      }
    }
    auto res = solve_assignment(p, b);
    auto want = oracle::brute_assignment(p, b);
    if (!want || std::abs(res.objective - *want) > 1e-6) ++bad_opt;
  }
  return {bad_opt == 0 && bad_enum == 0, "200 instances, " + std::to_string(subsets) +
                                             " bundle subsets checked; optimum mismatches " + std::to_string(bad_opt) +
                                             ", enumeration mismatches " + std::to_string(bad_enum)};
}

Outcome criterion5() {
  std::mt19937_64 rng(555);
  int mismatches = 0, infeasible_results = 0, feasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto c = oracle::insertion_trial(rng, trial);
    if (c.got_feasible != c.want_feasible || (c.got_feasible && std::abs(c.got - c.want) > 1e-6)) ++mismatches;
    if (c.got_feasible) {
      ++feasible;
      if (!c.result_passes_check) ++infeasible_results;
    }
  }
  return {mismatches == 0 && infeasible_results == 0,
          "500 cases (" + std::to_string(feasible) + " insertable), mismatches " + std::to_string(mismatches) +
              ", returned schedules failing check_feasible " + std::to_string(infeasible_results)};
}

Outcome criterion6() {
  std::mt19937_64 rng(66);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + trial % 9;
    auto net = std::make_shared<const Network>(oracle::random_network(rng, n, 0.3, false));
    Router router(net);
    const double reach = 5 + trial % 10;
    if (select_zone_centroids(router, reach).size() != oracle::brute_min_cover(router, reach)) ++mismatches;
  }
  return {mismatches == 0, "100 graphs with 4..12 nodes, " + std::to_string(mismatches) + " mismatches"};
}

Outcome criterion7() {
  std::mt19937_64 rng(77);
  bool ok = true;
  std::string detail;
  for (double lambda : {0.5, 2.0, 8.0}) {
    const int n = 10000;
    double sum = 0;
    for (int k = 0; k < n; ++k) sum += static_cast<double>(draw_poisson(lambda, rng));
    const double mean = sum / n, se = std::sqrt(lambda / n);
    ok = ok && std::abs(mean - lambda) <= 3 * se;
    detail += "lambda " + fmt(lambda, 1) + ": mean " + fmt(mean, 4) + " (3 SE " + fmt(3 * se, 4) + "); ";
  }
  bool zero = true;
  for (int k = 0; k < 10000; ++k) zero = zero && draw_poisson(0.0, rng) == 0;
  return {ok && zero, detail + "lambda 0 always zero: " + (zero ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

Outcome criterion8() {
  const auto base = fs::temp_directory_path() / "rpool_acceptance_det";
  fs::remove_all(base);
  bool ok = true;
  std::string detail;
  for (const auto& rb : kStrategies) {
    auto sc = grid_scenario();
    sc.rebalancer = rb;
    sc.seed = 11;
    write_run_outputs(run(sc), (base / (rb + "_a")).string());
    write_run_outputs(run(sc), (base / (rb + "_b")).string());
    const bool same = slurp(base / (rb + "_a") / "kpis.csv") == slurp(base / (rb + "_b") / "kpis.csv") &&
                      slurp(base / (rb + "_a") / "events.csv") == slurp(base / (rb + "_b") / "events.csv");
    ok = ok && same;
    detail += rb + (same ? " identical; " : " DIFFERS; ");
  }
  fs::remove_all(base);
  return {ok, detail};
}

Outcome criterion9() {
  const auto& g = grid_runs();
  std::size_t runs = 0;
  std::vector<std::string> problems;
  for (const auto& [rb, rs] : g.by_strategy)
    for (const auto& r : rs) {
      ++runs;
      const auto& k = r.kpis;
      for (const auto& v : r.violations) problems.push_back(rb + ": " + v);
      if (k.requests != k.served + k.rejected + r.unresolved) problems.push_back(rb + ": request conservation");
      std::size_t boards = 0, alights = 0;
      for (const auto& e : r.events) {
        boards += e.type == EventType::Board;
        alights += e.type == EventType::Alight;
      }
      if (boards != alights || alights != k.served) problems.push_back(rb + ": passenger conservation");
      if (r.max_occupancy > static_cast<std::size_t>(r.scenario.cons.capacity)) problems.push_back(rb + ": capacity");
      const double budget = k.revenue_time + k.empty_drive_time + k.dwell_time + k.idle_time;
      if (std::abs(budget - r.scenario.fleet_size * k.sim_end) > 1e-6 * budget) problems.push_back(rb + ": time budget");
    }
  return {problems.empty(), std::to_string(runs) + " grid runs checked" +
                                (problems.empty() ? std::string() : "; first problem: " + problems.front())};
}

Outcome criterion10() {
  std::mt19937_64 rng(1010);
  int mismatches = 0, bound_failures = 0, feasible = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto m = milp::oracle::random_binary_model(rng);
    auto e = milp::oracle::enumerate(m);
    auto s = milp::solve(m);
    if (e.feasible != (s.status == milp::Status::Optimal)) {
      ++mismatches;
      continue;
    }
    if (!e.feasible) continue;
    ++feasible;
    if (std::abs(s.objective - e.objective) > 1e-6) ++mismatches;
    auto r = milp::solve_relaxation(m);
    const bool bound = r.status == milp::Status::Optimal &&
                       (m.sense() == milp::Sense::Minimize ? r.objective <= s.objective + 1e-6
                                                           : r.objective >= s.objective - 1e-6);
    if (!bound) ++bound_failures;
  }
  return {mismatches == 0 && bound_failures == 0, "500 models (" + std::to_string(feasible) +
                                                      " feasible), mismatches " + std::to_string(mismatches) +
                                                      ", relaxation bound failures " + std::to_string(bound_failures)};
}

Outcome criterion11() {
  const bool examples = *saved_distance(100, 100) == 0.0 && *saved_distance(80, 100) == 0.2 &&
                        *saved_distance(120, 100) == -0.2;
  // Line A-B-C (300 m / 30 s, 900 m / 90 s), one vehicle at A, two riders B -> C.
  auto w = fixture::line_world({30, 90}, {300, 900}, 10);
  w.requests = {make_request(0, 1, 2, 0, *w.router), make_request(1, 1, 2, 0, *w.router)};
  auto sc = fixture::shell_scenario(1, 600);
  sc.seed = fixture::seed_placing_at(sc, w, 0);
  auto r = run(sc, w);
  const double want = 1.0 - (0.3 + 0.9) / (2 * 0.9);
  const bool pooled = r.kpis.served == 2 && r.kpis.saved_distance && std::abs(*r.kpis.saved_distance - want) <= 1e-9;
  return {examples && pooled, std::string("examples 0/0.2/-0.2 ") + (examples ? "exact" : "WRONG") +
                                  "; pooled SD " + (r.kpis.saved_distance ? fmt(*r.kpis.saved_distance, 12) : "NA") +
                                  " vs hand value " + fmt(want, 12)};
}

Outcome criterion12() {
  const auto& g = grid_runs();
  double worst = 0;
  std::size_t calls = 0;
  const auto sc = grid_scenario();
  const bool setting = std::abs(sc.horizon - 3 * sc.rebalance_interval) < 1e-9 && sc.num_samples == 3;
  for (const auto& r : g.by_strategy.at("sampling"))
    for (const auto& c : r.rebalance_calls) {
      ++calls;
      worst = std::max(worst, c.stats.seconds);
    }
  return {setting && calls > 0 && worst < 5.0, std::to_string(calls) + " sampling calls (horizon " +
                                                   fmt(sc.horizon, 0) + " s, " + std::to_string(sc.num_samples) +
                                                   " samples), slowest " + fmt(worst, 4) + " s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rebalancing benefit on the grid", criterion1},
      {"strategy ordering", criterion2},
      {"rebalancing ILP vs enumeration", criterion3},
      {"assignment vs brute force", criterion4},
      {"insertion heuristic vs brute force", criterion5},
      {"zone centroid ILP vs brute force", criterion6},
      {"Poisson sampler", criterion7},
      {"determinism", criterion8},
      {"conservation suite", criterion9},
      {"MILP solver vs enumeration", criterion10},
      {"KPI formula checks", criterion11},
      {"rebalancer call latency", criterion12},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                o.detail.c_str(), s);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
