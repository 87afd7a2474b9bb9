#include "rpool/demand.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rpool/csv.hpp"

namespace rpool {

namespace {

constexpr int kMaxRedraws = 100;

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

double uniform_whole_second(double start, double length, std::mt19937_64& rng) {
  auto lo = static_cast<std::int64_t>(std::ceil(start));
  auto hi = static_cast<std::int64_t>(std::ceil(start + length)) - 1;
  if (hi < lo) return static_cast<double>(lo);
  std::uniform_int_distribution<std::int64_t> d(lo, hi);
  return static_cast<double>(d(rng));
}

// Draws an (origin, destination) pair with destination != origin, or nullopt
// when no distinct destination exists after bounded retries.
std::optional<std::pair<NodeId, NodeId>> draw_pair(const std::vector<NodeId>& from, const std::vector<NodeId>& to,
                                                   std::mt19937_64& rng) {
  NodeId o = pick(from, rng);
  for (int k = 0; k < kMaxRedraws; ++k) {
    NodeId d = pick(to, rng);
    if (d != o) return std::make_pair(o, d);
  }
  return std::nullopt;
}

void sort_and_number(std::vector<Request>& out, RequestId first_id) {
  std::stable_sort(out.begin(), out.end(),
                   [](const Request& a, const Request& b) { return a.request_time < b.request_time; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = first_id + static_cast<RequestId>(i);
}

}  // namespace

Request make_request(RequestId id, NodeId origin, NodeId destination, double request_time, const Router& router) {
  const auto& net = router.network();
  if (origin == destination) throw std::invalid_argument("request " + std::to_string(id) + ": origin equals destination");
  if (!net.is_access(origin) || !net.is_access(destination))
    throw std::invalid_argument("request " + std::to_string(id) + ": endpoints must be access nodes");
  double t = router.time(origin, destination);
  if (!std::isfinite(t)) throw std::invalid_argument("request " + std::to_string(id) + ": destination unreachable");
  return Request{id, origin, destination, request_time, t, router.distance(origin, destination)};
}

void TripFilterRules::validate() const {
  if (!(min_distance_km < max_distance_km) || !(min_duration_s < max_duration_s) || !(min_speed_kmh < max_speed_kmh))
    throw std::invalid_argument("trip filter bounds need min < max");
}

FilterResult filter_trips(const std::vector<TripRecord>& records, const TripFilterRules& rules) {
  rules.validate();
  FilterResult out;
  for (const auto& r : records) {
    if (!r.distance_km || !r.duration_s) {
      ++out.missing_field;
      continue;
    }
    double dist = *r.distance_km;
    double dur = *r.duration_s;
    bool ok = dist >= rules.min_distance_km && dist <= rules.max_distance_km && dur >= rules.min_duration_s &&
              dur <= rules.max_duration_s;
    if (ok) {
      double speed = dist / (dur / 3600.0);
      ok = speed >= rules.min_speed_kmh && speed <= rules.max_speed_kmh;
    }
    if (ok)
      out.kept.push_back(r);
    else
      ++out.out_of_bounds;
  }
  return out;
}

ConversionResult trips_to_requests(const std::vector<TripRecord>& records,
                                   const std::map<std::int64_t, std::vector<NodeId>>& areas, const Router& router,
                                   std::mt19937_64& rng, double subsample_rate, RequestId first_id) {
  if (!(subsample_rate >= 0.0 && subsample_rate <= 1.0)) throw std::invalid_argument("subsample rate must be in [0,1]");
  ConversionResult out;
  std::bernoulli_distribution keep(subsample_rate);
  const auto& net = router.network();
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (!keep(rng)) continue;
    auto drop = [&](const std::string& why) {
      ++out.dropped;
      out.diagnostics.push_back("record " + std::to_string(k) + ": " + why);
    };
    if (!r.origin_area || !r.destination_area || !r.interval_start_s) {
      drop("missing area or start interval");
      continue;
    }
    auto oa = areas.find(*r.origin_area);
    auto da = areas.find(*r.destination_area);
    auto access_only = [&](const std::vector<NodeId>& v) {
      std::vector<NodeId> a;
      for (NodeId n : v)
        if (net.is_access(n)) a.push_back(n);
      return a;
    };
    std::vector<NodeId> from = oa == areas.end() ? std::vector<NodeId>{} : access_only(oa->second);
    std::vector<NodeId> to = da == areas.end() ? std::vector<NodeId>{} : access_only(da->second);
    if (from.empty() || to.empty()) {
      drop("area without access nodes");
      continue;
    }
    auto pair = draw_pair(from, to, rng);
    if (!pair) {
      drop("no destination distinct from origin");
      continue;
    }
    double t = uniform_whole_second(*r.interval_start_s, r.interval_length_s, rng);
    if (!std::isfinite(router.time(pair->first, pair->second))) {
      drop("destination unreachable");
      continue;
    }
    out.requests.push_back(make_request(0, pair->first, pair->second, t, router));
  }
  sort_and_number(out.requests, first_id);
  return out;
}

ForecastMatrix::ForecastMatrix(std::size_t num_zones, double bin_width) : num_zones_(num_zones), bin_(bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("forecast bin width must be positive");
}

std::int64_t ForecastMatrix::bin_index(double t) const {
  return static_cast<std::int64_t>(std::floor(t / bin_ + 1e-9));
}

void ForecastMatrix::check_zone(int z) const {
  if (z < 0 || static_cast<std::size_t>(z) >= num_zones_) throw std::out_of_range("zone id out of range");
}

double ForecastMatrix::rate(int o, int d, double t) const {
  auto it = cells_.find({bin_index(t), o, d});
  return it == cells_.end() ? 0.0 : it->second;
}

void ForecastMatrix::set(int o, int d, std::int64_t bin, double rate) {
  check_zone(o);
  check_zone(d);
  if (!(rate >= 0.0)) throw std::invalid_argument("forecast rates must be nonnegative");
  if (rate == 0.0)
    cells_.erase({bin, o, d});
  else
    cells_[{bin, o, d}] = rate;
}

void ForecastMatrix::add(int o, int d, std::int64_t bin, double rate) {
  auto it = cells_.find({bin, o, d});
  set(o, d, bin, (it == cells_.end() ? 0.0 : it->second) + rate);
}

double ForecastMatrix::total(int o, int d, double t0, double t1) const {
  double s = 0.0;
  for (const auto& [key, r] : cells_) {
    auto [b, i, j] = key;
    double start = bin_start(b);
    if (i == o && j == d && start >= t0 - 1e-9 && start < t1 - 1e-9) s += r;
  }
  return s;
}

double ForecastMatrix::total() const {
  double s = 0.0;
  for (const auto& [k, r] : cells_) s += r;
  return s;
}

ForecastMatrix perfect_forecast(const std::vector<Request>& requests, const Zoning& zoning, double bin_width) {
  ForecastMatrix fc(zoning.size(), bin_width);
  for (const auto& r : requests)
    fc.add(zoning.zone_of(r.origin), zoning.zone_of(r.destination), fc.bin_index(r.request_time), 1.0);
  return fc;
}

ForecastMatrix myopic_forecast(const std::vector<Request>& history, const Zoning& zoning, double now, double bin_width,
                               double horizon) {
  ForecastMatrix fc(zoning.size(), bin_width);
  std::map<std::pair<int, int>, double> counts;
  for (const auto& r : history)
    if (r.request_time >= now - bin_width && r.request_time < now)
      counts[{zoning.zone_of(r.origin), zoning.zone_of(r.destination)}] += 1.0;
  auto bins = static_cast<std::int64_t>(std::llround(std::floor(horizon / bin_width + 1e-9)));
  for (std::int64_t k = 0; k < bins; ++k) {
    auto b = fc.bin_index(now + static_cast<double>(k) * bin_width);
    for (const auto& [od, c] : counts) fc.set(od.first, od.second, b, c);
  }
  return fc;
}

std::int64_t draw_poisson(double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0)) throw std::invalid_argument("Poisson rate must be nonnegative");
  if (rate == 0.0) return 0;
  std::poisson_distribution<std::int64_t> d(rate);
  return d(rng);
}

std::vector<Request> sample_requests(const ForecastMatrix& fc, double t, double horizon, const Zoning& zoning,
                                     const Router& router, std::mt19937_64& rng, RequestId first_id) {
  std::vector<Request> out;
  for (const auto& [key, rate] : fc.cells()) {
    auto [b, i, j] = key;
    double start = fc.bin_start(b);
    if (start < t - 1e-9 || start >= t + horizon - 1e-9) continue;
    if (i < 0 || static_cast<std::size_t>(i) >= zoning.size() || j < 0 || static_cast<std::size_t>(j) >= zoning.size())
      throw std::invalid_argument("forecast references an unknown zone");
    const auto& from = zoning.zone(i).members;
    const auto& to = zoning.zone(j).members;
    if (from.empty() || to.empty()) throw std::invalid_argument("forecast has positive rate for an empty zone");
    auto n = draw_poisson(rate, rng);
    for (std::int64_t k = 0; k < n; ++k) {
      auto pair = draw_pair(from, to, rng);
      double when = uniform_whole_second(start, fc.bin_width(), rng);
      if (!pair || !std::isfinite(router.time(pair->first, pair->second))) continue;
      out.push_back(make_request(0, pair->first, pair->second, when, router));
    }
  }
  sort_and_number(out, first_id);
  return out;
}

std::vector<Request> generate_synthetic_requests(const SyntheticDemand& spec, const Router& router,
                                                 std::mt19937_64& rng) {
  const auto& net = router.network();
  const auto& access = net.access_nodes();
  if (access.size() < 2) throw std::invalid_argument("synthetic demand needs at least two access nodes");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (NodeId n : access) {
    xmin = std::min(xmin, net.node(n).x);
    xmax = std::max(xmax, net.node(n).x);
  }
  const double third = (xmax - xmin) / 3.0;
  std::vector<NodeId> west, east;
  for (NodeId n : access) {
    if (net.node(n).x <= xmin + third + 1e-9) west.push_back(n);
    if (net.node(n).x >= xmax - third - 1e-9) east.push_back(n);
  }
  std::bernoulli_distribution directional(spec.directional_share);
  auto count = draw_poisson(spec.requests_per_hour * spec.duration_s / 3600.0, rng);
  std::vector<Request> out;
  for (std::int64_t k = 0; k < count; ++k) {
    double when = uniform_whole_second(0.0, spec.duration_s, rng);
    bool dir = directional(rng);
    auto pair = dir ? draw_pair(west, east, rng) : draw_pair(access, access, rng);
    if (!pair || !std::isfinite(router.time(pair->first, pair->second))) continue;
    out.push_back(make_request(0, pair->first, pair->second, when, router));
  }
  sort_and_number(out, 0);
  return out;
}

std::vector<Request> load_requests(const std::string& path, const Router& router) {
  auto t = csv::read_file(path);
  const auto c_id = t.column("request_id");
  const auto c_o = t.column("origin_node");
  const auto c_d = t.column("destination_node");
  const auto c_t = t.column("request_time_s");
  const auto& net = router.network();
  std::vector<Request> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      out.push_back(make_request(csv::to_int(row.at(c_id)), net.index_of(csv::to_int(row.at(c_o))),
                                 net.index_of(csv::to_int(row.at(c_d))), csv::to_double(row.at(c_t)), router));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(t.lines[r]) + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Request& a, const Request& b) { return a.request_time < b.request_time; });
  return out;
}

void save_requests(const std::vector<Request>& requests, const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "request_id,origin_node,destination_node,request_time_s\n";
  for (const auto& r : requests)
    out << r.id << ',' << net.external_id(r.origin) << ',' << net.external_id(r.destination) << ','
        << csv::format_double(r.request_time) << '\n';
}

ForecastMatrix load_forecast(const std::string& path, std::size_t num_zones, double bin_width) {
  auto t = csv::read_file(path);
  const auto c_o = t.column("origin_zone");
  const auto c_d = t.column("destination_zone");
  const auto c_b = t.column("bin_start_s");
  const auto c_r = t.column("rate");
  ForecastMatrix fc(num_zones, bin_width);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    try {
      double start = csv::to_double(row.at(c_b));
      double q = start / bin_width;
      if (std::abs(q - std::round(q)) > 1e-9) throw std::invalid_argument("bin start not aligned to bin width");
      fc.add(static_cast<int>(csv::to_int(row.at(c_o))), static_cast<int>(csv::to_int(row.at(c_d))),
             static_cast<std::int64_t>(std::llround(q)), csv::to_double(row.at(c_r)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + " line " + std::to_string(t.lines[r]) + ": " + e.what());
    }
  }
  return fc;
}

void save_forecast(const ForecastMatrix& fc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "origin_zone,destination_zone,bin_start_s,rate\n";
  for (const auto& [key, r] : fc.cells()) {
    auto [b, i, j] = key;
    out << i << ',' << j << ',' << csv::format_double(fc.bin_start(b)) << ',' << csv::format_double(r) << '\n';
  }
}

}  // namespace rpool
