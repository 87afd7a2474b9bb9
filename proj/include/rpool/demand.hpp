#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "rpool/network.hpp"

namespace rpool {

using RequestId = std::int64_t;

struct Request {
  RequestId id = 0;
  NodeId origin = kNoNode;
  NodeId destination = kNoNode;
  double request_time = 0.0;    // seconds since simulation start
  double direct_time = 0.0;     // seconds
  double direct_distance = 0.0; // meters
};

/// Builds a request and fills the direct travel time and distance.
/// Throws std::invalid_argument when the endpoints are equal, not access
/// nodes, or not connected.
Request make_request(RequestId id, NodeId origin, NodeId destination, double request_time, const Router& router);

/// One row of a raw trip dataset. Missing fields stay empty.
struct TripRecord {
  std::optional<double> distance_km;
  std::optional<double> duration_s;
  std::optional<std::int64_t> origin_area;
  std::optional<std::int64_t> destination_area;
  std::optional<double> interval_start_s;
  double interval_length_s = 900.0;
};

struct TripFilterRules {
  double min_distance_km = 0.1;
  double max_distance_km = 100.0;
  double min_duration_s = 60.0;
  double max_duration_s = 5 * 3600.0;
  double min_speed_kmh = 5.0;
  double max_speed_kmh = 130.0;

  /// Throws std::invalid_argument unless min < max for every pair.
  void validate() const;
};

struct FilterResult {
  std::vector<TripRecord> kept;
  std::size_t missing_field = 0;
  std::size_t out_of_bounds = 0;
};

/// Keeps records within every bound (bounds inclusive).
FilterResult filter_trips(const std::vector<TripRecord>& records, const TripFilterRules& rules);

struct ConversionResult {
  std::vector<Request> requests;  // sorted by request time
  std::size_t dropped = 0;
  std::vector<std::string> diagnostics;
};

/// Draws one request per retained record: endpoints uniform over the access
/// nodes of each area, request time uniform in whole seconds within the
/// record's start interval. Each record is retained with probability
/// subsample_rate.
ConversionResult trips_to_requests(const std::vector<TripRecord>& records,
                                   const std::map<std::int64_t, std::vector<NodeId>>& areas, const Router& router,
                                   std::mt19937_64& rng, double subsample_rate = 1.0, RequestId first_id = 0);

/// Expected requests per (origin zone, destination zone, time bin).
class ForecastMatrix {
 public:
  /// Key order (bin index, origin zone, destination zone).
  using Key = std::tuple<std::int64_t, int, int>;

  ForecastMatrix() = default;
  ForecastMatrix(std::size_t num_zones, double bin_width);

  std::size_t num_zones() const { return num_zones_; }
  double bin_width() const { return bin_; }
  std::int64_t bin_index(double t) const;
  double bin_start(std::int64_t index) const { return static_cast<double>(index) * bin_; }

  /// Rate of the bin containing t.
  double rate(int origin_zone, int destination_zone, double t) const;
  void set(int origin_zone, int destination_zone, std::int64_t bin, double rate);
  void add(int origin_zone, int destination_zone, std::int64_t bin, double rate);
  /// Sum of rates over bins whose start lies in [t0, t1).
  double total(int origin_zone, int destination_zone, double t0, double t1) const;
  double total() const;
  const std::map<Key, double>& cells() const { return cells_; }

 private:
  void check_zone(int z) const;

  std::size_t num_zones_ = 0;
  double bin_ = 900.0;
  std::map<Key, double> cells_;
};

/// Counts requests per (origin zone, destination zone, bin).
ForecastMatrix perfect_forecast(const std::vector<Request>& requests, const Zoning& zoning, double bin_width);

/// Counts of [now - bin_width, now) applied to every bin starting at
/// now + k * bin_width for k = 0 .. horizon / bin_width - 1.
ForecastMatrix myopic_forecast(const std::vector<Request>& history, const Zoning& zoning, double now,
                               double bin_width, double horizon);

/// Draws Poisson(rate) requests per cell whose bin starts in [t, t + horizon).
/// Destinations equal to the origin are redrawn. Output sorted by time with
/// ids first_id, first_id + 1, ...
std::vector<Request> sample_requests(const ForecastMatrix& fc, double t, double horizon, const Zoning& zoning,
                                     const Router& router, std::mt19937_64& rng, RequestId first_id = 0);

/// Poisson draw; rate 0 yields 0.
std::int64_t draw_poisson(double rate, std::mt19937_64& rng);

/// Synthetic demand on a network with coordinates: Poisson arrivals at
/// requests_per_hour over [0, duration). A share of trips (directional_share)
/// goes from the west third to the east third of the x extent; the rest has
/// endpoints uniform over all access nodes.
struct SyntheticDemand {
  double requests_per_hour = 60.0;
  double duration_s = 7200.0;
  double directional_share = 0.9;
};

std::vector<Request> generate_synthetic_requests(const SyntheticDemand& spec, const Router& router,
                                                 std::mt19937_64& rng);

std::vector<Request> load_requests(const std::string& path, const Router& router);
void save_requests(const std::vector<Request>& requests, const Network& net, const std::string& path);
ForecastMatrix load_forecast(const std::string& path, std::size_t num_zones, double bin_width);
void save_forecast(const ForecastMatrix& fc, const std::string& path);

}  // namespace rpool
