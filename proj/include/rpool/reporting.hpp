#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpool/engine.hpp"

namespace rpool {

inline constexpr const char* kVersion = "1.0.0";

/// KPI columns shared by single runs and sweeps.
std::vector<std::string> kpi_columns();
std::vector<std::string> kpi_values(const KpiReport& k, std::size_t unresolved);

/// Writes events.csv, kpis.csv, fleet_states.csv, zonal.csv and run_meta.json.
void write_run_outputs(const RunResult& r, const std::string& dir);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "key=v1,v2,...".
SweepAxis parse_sweep(const std::string& text);

struct MatrixRow {
  std::size_t run = 0;
  std::vector<std::pair<std::string, std::string>> params;
  std::uint64_t seed = 0;
  std::optional<KpiReport> kpis;
  std::size_t unresolved = 0;
  std::string error;
};

/// Cartesian product of the axes (last axis fastest) times the seeds. Each
/// run writes its outputs under out_dir/runs/<index>; kpis.csv collects one
/// row per run. Failed runs keep their row with the error message.
std::vector<MatrixRow> run_experiment_matrix(const Scenario& base, const std::vector<SweepAxis>& axes,
                                             const std::vector<std::uint64_t>& seeds, unsigned jobs,
                                             const std::string& out_dir);

}  // namespace rpool
