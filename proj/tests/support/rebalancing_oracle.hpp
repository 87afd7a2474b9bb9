#pragma once

// Brute-force reference for the rebalancing ILP. Every tour is either left
// uncovered or served from one admissible (zone, step); trip counts are then
// the smallest values compatible with the coverage, which is optimal because
// trip costs are non-negative and trips only consume supply.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "rpool/rebalancing.hpp"

namespace rpool::oracle {

inline std::optional<double> brute_rebalancing(const RebalancingProblem& p) {
  const auto Z = p.num_zones;
  const int NS = p.num_samples;
  const auto n = p.tours.size();
  std::vector<std::vector<std::pair<int, int>>> options(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& t = p.tours[k];
    for (int T = 0; T <= p.t_max; ++T)
      for (std::size_t o = 0; o < Z; ++o) {
        double arrive = p.now + T * p.step + p.cost[o][static_cast<std::size_t>(t.start_zone)];
        if (arrive <= t.start_time + 1e-9) options[k].push_back({static_cast<int>(o), T});
      }
  }
  auto dv = [&](int s, int tau, std::size_t o) {
    if (static_cast<std::size_t>(s) >= p.idle_increments.size()) return 0.0;
    const auto& a = p.idle_increments[static_cast<std::size_t>(s)];
    if (static_cast<std::size_t>(tau) >= a.size()) return 0.0;
    return a[static_cast<std::size_t>(tau)][o];
  };
  std::optional<double> best;
  std::vector<int> choice(n, -1);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k < n) {
      for (int c = -1; c < static_cast<int>(options[k].size()); ++c) {
        choice[k] = c;
        rec(k + 1);
      }
      return;
    }
    std::map<std::pair<int, int>, int> entries;
    // count[s][T][o][d]
    std::vector<std::vector<std::vector<std::vector<int>>>> count(
        static_cast<std::size_t>(NS),
        std::vector<std::vector<std::vector<int>>>(static_cast<std::size_t>(p.t_max) + 1,
                                                   std::vector<std::vector<int>>(Z, std::vector<int>(Z, 0))));
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (choice[i] < 0) continue;
      const auto& t = p.tours[i];
      if (++entries[{t.sample, t.tour}] > 1) return;
      auto [o, T] = options[i][static_cast<std::size_t>(choice[i])];
      ++count[static_cast<std::size_t>(t.sample)][static_cast<std::size_t>(T)][static_cast<std::size_t>(o)]
             [static_cast<std::size_t>(t.start_zone)];
      obj += std::pow(p.gamma, T) * t.objective / NS;
    }
    std::vector<std::vector<int>> theta0(Z, std::vector<int>(Z, 0));
    for (std::size_t o = 0; o < Z; ++o)
      for (std::size_t d = 0; d < Z; ++d) {
        int lo = 0, hi = 1 << 30;
        for (int s = 0; s < NS; ++s) {
          lo = std::max(lo, count[static_cast<std::size_t>(s)][0][o][d]);
          hi = std::min(hi, count[static_cast<std::size_t>(s)][0][o][d]);
        }
        if (p.strict_linkage && lo != hi) return;
        theta0[o][d] = lo;
        obj += p.cost[o][d] * lo;
      }
    for (std::size_t o = 0; o < Z; ++o) {
      int out0 = 0;
      for (std::size_t d = 0; d < Z; ++d) out0 += theta0[o][d];
      if (out0 > p.idle[o]) return;
      for (int s = 0; s < NS; ++s) {
        double used = out0;
        for (int T = 1; T <= p.t_max; ++T) {
          for (std::size_t d = 0; d < Z; ++d) {
            int c = count[static_cast<std::size_t>(s)][static_cast<std::size_t>(T)][o][d];
            used += c;
            obj += std::pow(p.gamma, T) * p.cost[o][d] * c / NS;
          }
          double avail = p.idle[o];
          for (int tau = 0; tau < T; ++tau) avail += dv(s, tau, o);
          for (std::size_t i = 0; i < n; ++i) {
            const auto& t = p.tours[i];
            if (choice[i] < 0 || t.sample != s || static_cast<std::size_t>(t.end_zone) != o) continue;
            int tau = static_cast<int>(std::floor((t.end_time - p.now) / p.step + 1e-9));
            if (tau < T) avail += 1;
          }
          if (used > avail + 1e-9) return;
        }
      }
    }
    if (!best || obj < *best) best = obj;
  };
  rec(0);
  return best;
}

// Random instance: up to 3 zones, up to 2 idle vehicles, up to 4 tours,
// up to 2 samples, up to 2 future steps.
inline RebalancingProblem random_rebalancing_problem(std::mt19937_64& rng) {
  auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  RebalancingProblem p;
  p.num_zones = static_cast<std::size_t>(uni(1, 3));
  p.num_samples = uni(1, 2);
  p.t_max = uni(1, 2);
  p.step = 900;
  p.now = 1800;
  const double gammas[] = {0.5, 0.8, 1.0};
  p.gamma = gammas[uni(0, 2)];
  p.strict_linkage = uni(0, 1) == 1;
  const auto Z = p.num_zones;
  p.cost.assign(Z, std::vector<double>(Z, 0.0));
  for (std::size_t o = 0; o < Z; ++o)
    for (std::size_t d = 0; d < Z; ++d)
      if (o != d) p.cost[o][d] = 60.0 * uni(1, 20);
  p.idle.assign(Z, 0);
  int idle_total = uni(0, 2);
  for (int k = 0; k < idle_total; ++k) ++p.idle[static_cast<std::size_t>(uni(0, static_cast<int>(Z) - 1))];
  p.idle_increments.assign(static_cast<std::size_t>(p.num_samples),
                           std::vector<std::vector<double>>(static_cast<std::size_t>(p.t_max),
                                                            std::vector<double>(Z, 0.0)));
  for (auto& per_s : p.idle_increments)
    for (auto& per_tau : per_s)
      for (auto& x : per_tau) x = uni(0, 5) == 0 ? 1.0 : 0.0;
  int ntours = uni(0, 4);
  std::map<std::pair<int, int>, int> next_sub;
  for (int k = 0; k < ntours; ++k) {
    SampledTour t;
    t.sample = uni(0, p.num_samples - 1);
    // Reuse an existing tour id sometimes so that sub-tours appear.
    int u = uni(0, 2);
    t.tour = u;
    t.sub_tour = next_sub[{t.sample, u}]++;
    t.start_zone = uni(0, static_cast<int>(Z) - 1);
    t.start_time = p.now + uni(0, static_cast<int>(p.t_max * p.step + 600));
    t.objective = -1e6 * uni(1, 3) + uni(0, 3000);
    t.end_zone = uni(0, static_cast<int>(Z) - 1);
    t.end_time = t.start_time + uni(60, 2000);
    t.first_pickup_node = 0;
    p.tours.push_back(t);
  }
  return p;
}

}  // namespace rpool::oracle
