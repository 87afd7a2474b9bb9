#include "rpool/reporting.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>

#include "rpool/csv.hpp"
#include "rpool/parallel.hpp"

namespace rpool {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) s += ',';
    s += xs[k];
  }
  return s;
}

std::string fmt(double x) { return csv::format_double(x); }

}  // namespace

std::vector<std::string> kpi_columns() {
  return {"fleet_size",      "requests",       "served",          "rejected",        "unresolved",
          "service_rate",    "avg_vrh_hours",  "fleet_vkm",       "empty_vkm",       "rebalancing_vkm",
          "served_direct_km", "saved_distance", "avg_waiting_s",  "avg_detour",      "revenue_h",
          "empty_drive_h",   "dwell_h",        "idle_h",          "sim_end_s"};
}

std::vector<std::string> kpi_values(const KpiReport& k, std::size_t unresolved) {
  return {std::to_string(k.fleet_size),
          std::to_string(k.requests),
          std::to_string(k.served),
          std::to_string(k.rejected),
          std::to_string(unresolved),
          fmt(k.service_rate),
          fmt(k.avg_vehicle_revenue_hours),
          fmt(k.fleet_vkm),
          fmt(k.empty_vkm),
          fmt(k.rebalancing_vkm),
          fmt(k.served_direct_km),
          k.saved_distance ? fmt(*k.saved_distance) : std::string("NA"),
          fmt(k.avg_waiting_time),
          fmt(k.avg_detour),
          fmt(k.revenue_time / 3600.0),
          fmt(k.empty_drive_time / 3600.0),
          fmt(k.dwell_time / 3600.0),
          fmt(k.idle_time / 3600.0),
          fmt(k.sim_end)};
}

void write_run_outputs(const RunResult& r, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path d(dir);
  write_events(r.events, *r.network, (d / "events.csv").string());
  {
    auto f = open_out(d / "kpis.csv");
    f << join(kpi_columns()) << '\n' << join(kpi_values(r.kpis, r.unresolved)) << '\n';
  }
  {
    auto f = open_out(d / "fleet_states.csv");
    f << "time_s,idle,en_route,rebalancing,on_board,pending\n";
    for (const auto& s : r.fleet_states)
      f << fmt(s.time) << ',' << s.idle << ',' << s.en_route << ',' << s.rebalancing << ',' << s.on_board << ','
        << s.pending << '\n';
  }
  {
    auto f = open_out(d / "zonal.csv");
    f << "zone_id,rejected_count,idle_vehicle_hours\n";
    for (const auto& z : r.zonal) f << z.zone << ',' << z.rejected << ',' << fmt(z.idle_vehicle_hours) << '\n';
  }
  nlohmann::ordered_json meta;
  meta["version"] = kVersion;
  meta["seed"] = r.scenario.seed;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : scenario_values(r.scenario)) cfg[k] = v;
  meta["config"] = cfg;
  meta["wall_seconds"] = r.wall_seconds;
  meta["max_occupancy"] = r.max_occupancy;
  auto calls = nlohmann::ordered_json::array();
  for (const auto& c : r.rebalance_calls)
    calls.push_back({{"time_s", c.time},
                     {"commands", c.commands},
                     {"seconds", c.stats.seconds},
                     {"variables", c.stats.variables},
                     {"constraints", c.stats.constraints},
                     {"tours", c.stats.tours},
                     {"status", c.stats.status}});
  meta["rebalancing_calls"] = calls;
  meta["violations"] = r.violations;
  auto f = open_out(d / "run_meta.json");
  f << meta.dump(2) << '\n';
}

SweepAxis parse_sweep(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("sweep must look like key=v1,v2: '" + text + "'");
  SweepAxis a;
  a.key = csv::trim(text.substr(0, eq));
  for (auto& v : csv::split(text.substr(eq + 1), ',')) {
    auto t = csv::trim(v);
    if (t.empty()) throw ConfigError("empty value in sweep '" + text + "'");
    a.values.push_back(t);
  }
  if (a.values.empty()) throw ConfigError("sweep '" + text + "' has no values");
  Scenario probe;
  set_scenario_value(probe, a.key, a.values.front());
  return a;
}

std::vector<MatrixRow> run_experiment_matrix(const Scenario& base, const std::vector<SweepAxis>& axes,
                                             const std::vector<std::uint64_t>& seeds_in, unsigned jobs,
                                             const std::string& out_dir) {
  const std::vector<std::uint64_t> seeds = seeds_in.empty() ? std::vector<std::uint64_t>{base.seed} : seeds_in;
  std::vector<std::vector<std::pair<std::string, std::string>>> combos{{}};
  for (const auto& a : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& c : combos)
      for (const auto& v : a.values) {
        auto x = c;
        x.emplace_back(a.key, v);
        next.push_back(std::move(x));
      }
    combos = std::move(next);
  }
  std::vector<MatrixRow> rows;
  for (const auto& c : combos)
    for (auto s : seeds) {
      MatrixRow r;
      r.run = rows.size();
      r.params = c;
      r.seed = s;
      rows.push_back(std::move(r));
    }
  fs::create_directories(out_dir);
  parallel_for(rows.size(), std::max(1u, jobs), [&](std::size_t k) {
    auto& row = rows[k];
    try {
      Scenario sc = base;
      for (const auto& [key, v] : row.params) set_scenario_value(sc, key, v);
      sc.seed = row.seed;
      auto res = run(sc);
      write_run_outputs(res, (fs::path(out_dir) / "runs" / std::to_string(row.run)).string());
      row.kpis = res.kpis;
      row.unresolved = res.unresolved;
      if (!res.violations.empty()) row.error = "invariant: " + res.violations.front();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  auto f = open_out(fs::path(out_dir) / "kpis.csv");
  std::vector<std::string> header{"run"};
  for (const auto& a : axes) header.push_back(a.key);
  header.push_back("seed");
  header.push_back("status");
  for (auto& c : kpi_columns()) header.push_back(c);
  header.push_back("error");
  f << join(header) << '\n';
  for (const auto& r : rows) {
    std::vector<std::string> cells{std::to_string(r.run)};
    for (const auto& [k, v] : r.params) cells.push_back(v);
    cells.push_back(std::to_string(r.seed));
    cells.push_back(r.kpis && r.error.empty() ? "ok" : "failed");
    if (r.kpis) {
      for (auto& v : kpi_values(*r.kpis, r.unresolved)) cells.push_back(v);
    } else {
      for (std::size_t k = 0; k < kpi_columns().size(); ++k) cells.push_back("");
    }
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    cells.push_back(err);
    f << join(cells) << '\n';
  }
  return rows;
}

}  // namespace rpool
