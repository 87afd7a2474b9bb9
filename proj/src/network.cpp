#include "rpool/network.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "rpool/csv.hpp"
#include "rpool/milp.hpp"

namespace rpool {

namespace {

constexpr double kTieEps = 1e-9;

bool nearly_equal(double a, double b) { return std::abs(a - b) <= kTieEps * std::max(1.0, std::abs(a)); }

}  // namespace

Network::Network(std::vector<NodeInfo> nodes, std::vector<EdgeRecord> edges) {
  std::sort(nodes.begin(), nodes.end(),
            [](const NodeInfo& a, const NodeInfo& b) { return a.external_id < b.external_id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index_.emplace(nodes[i].external_id, static_cast<NodeId>(i)).second)
      throw NetworkError("duplicate node id " + std::to_string(nodes[i].external_id));
  }
  nodes_ = std::move(nodes);

  std::map<std::pair<NodeId, NodeId>, Edge> best;
  for (auto& rec : edges) {
    auto fi = index_.find(rec.from);
    auto ti = index_.find(rec.to);
    if (fi == index_.end() || ti == index_.end())
      throw NetworkError("edge " + std::to_string(rec.from) + "->" + std::to_string(rec.to) +
                         " references an undeclared node");
    if (!(rec.travel_time > 0.0) || !std::isfinite(rec.travel_time))
      throw NetworkError("edge " + std::to_string(rec.from) + "->" + std::to_string(rec.to) +
                         " has non-positive travel time");
    double length = rec.length.value_or(rec.travel_time * kDefaultSpeedMps);
    if (!(length >= 0.0)) throw NetworkError("negative edge length");
    if (fi->second == ti->second) continue;
    Edge e{fi->second, ti->second, rec.travel_time, length, std::move(rec.road_class)};
    auto key = std::make_pair(e.from, e.to);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, std::move(e));
    } else if (std::tie(e.travel_time, e.length) < std::tie(it->second.travel_time, it->second.length)) {
      it->second = std::move(e);
    }
  }
  edges_.reserve(best.size());
  for (auto& [k, e] : best) edges_.push_back(std::move(e));
  rebuild_adjacency();
}

void Network::rebuild_adjacency() {
  const std::size_t n = nodes_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[static_cast<std::size_t>(e.from) + 1];
    ++in_offsets_[static_cast<std::size_t>(e.to) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_list_.assign(edges_.size(), 0);
  in_list_.assign(edges_.size(), 0);
  auto out_pos = out_offsets_;
  auto in_pos = in_offsets_;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    out_list_[static_cast<std::size_t>(out_pos[static_cast<std::size_t>(edges_[k].from)]++)] =
        static_cast<std::int32_t>(k);
    in_list_[static_cast<std::size_t>(in_pos[static_cast<std::size_t>(edges_[k].to)]++)] =
        static_cast<std::int32_t>(k);
  }
  access_.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (nodes_[i].is_access) access_.push_back(static_cast<NodeId>(i));
}

std::span<const std::int32_t> Network::out_edges(NodeId n) const {
  auto i = static_cast<std::size_t>(n);
  return {out_list_.data() + out_offsets_[i], static_cast<std::size_t>(out_offsets_[i + 1] - out_offsets_[i])};
}

std::span<const std::int32_t> Network::in_edges(NodeId n) const {
  auto i = static_cast<std::size_t>(n);
  return {in_list_.data() + in_offsets_[i], static_cast<std::size_t>(in_offsets_[i + 1] - in_offsets_[i])};
}

const Edge* Network::edge_between(NodeId from, NodeId to) const {
  // Out-edges are stored in ascending head order.
  auto out = out_edges(from);
  auto it = std::lower_bound(out.begin(), out.end(), to,
                             [&](std::int32_t k, NodeId v) { return edges_[static_cast<std::size_t>(k)].to < v; });
  if (it == out.end() || edges_[static_cast<std::size_t>(*it)].to != to) return nullptr;
  return &edges_[static_cast<std::size_t>(*it)];
}

NodeId Network::index_of(std::int64_t external_id) const {
  auto it = index_.find(external_id);
  if (it == index_.end()) throw NetworkError("unknown node id " + std::to_string(external_id));
  return it->second;
}

Network Network::with_access_nodes(const std::vector<NodeId>& access) const {
  Network copy = *this;
  for (auto& n : copy.nodes_) n.is_access = false;
  for (NodeId a : access) copy.nodes_.at(static_cast<std::size_t>(a)).is_access = true;
  copy.rebuild_adjacency();
  return copy;
}

double Network::euclidean(NodeId a, NodeId b) const {
  const auto& p = node(a);
  const auto& q = node(b);
  return std::hypot(p.x - q.x, p.y - q.y);
}

std::vector<NodeId> ShortestPathTree::path_to(NodeId target) const {
  std::vector<NodeId> out;
  if (!reachable(target)) return out;
  for (NodeId v = target; v != kNoNode; v = parent[static_cast<std::size_t>(v)]) out.push_back(v);
  std::reverse(out.begin(), out.end());
  return out;
}

ShortestPathTree build_tree(const Network& net, NodeId source) {
  const std::size_t n = net.num_nodes();
  if (source < 0 || static_cast<std::size_t>(source) >= n) throw NetworkError("source node out of range");
  ShortestPathTree t;
  t.source = source;
  t.time.assign(n, std::numeric_limits<double>::infinity());
  t.distance.assign(n, std::numeric_limits<double>::infinity());
  t.parent.assign(n, kNoNode);
  t.first_hop.assign(n, kNoNode);
  std::vector<bool> done(n, false);

  using Label = std::tuple<double, double, NodeId>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> pq;
  t.time[static_cast<std::size_t>(source)] = 0.0;
  t.distance[static_cast<std::size_t>(source)] = 0.0;
  pq.emplace(0.0, 0.0, source);

  std::vector<NodeId> a, b;
  auto lex_less_via = [&](NodeId p1, NodeId p2, NodeId v) {
    a = t.path_to(p1);
    b = t.path_to(p2);
    a.push_back(v);
    b.push_back(v);
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };

  const auto& edges = net.edges();
  while (!pq.empty()) {
    auto [tu, du, u] = pq.top();
    pq.pop();
    const auto ui = static_cast<std::size_t>(u);
    if (done[ui] || tu != t.time[ui] || du != t.distance[ui]) continue;
    done[ui] = true;
    if (u != source) {
      NodeId p = t.parent[ui];
      t.first_hop[ui] = p == source ? u : t.first_hop[static_cast<std::size_t>(p)];
    }
    for (auto k : net.out_edges(u)) {
      const auto& e = edges[static_cast<std::size_t>(k)];
      const auto vi = static_cast<std::size_t>(e.to);
      if (done[vi]) continue;
      const double nt = tu + e.travel_time;
      const double nd = du + e.length;
      bool better;
      if (!std::isfinite(t.time[vi])) {
        better = true;
      } else if (!nearly_equal(nt, t.time[vi])) {
        better = nt < t.time[vi];
      } else if (!nearly_equal(nd, t.distance[vi])) {
        better = nd < t.distance[vi];
      } else {
        better = t.parent[vi] != u && lex_less_via(u, t.parent[vi], e.to);
      }
      if (better) {
        t.time[vi] = nt;
        t.distance[vi] = nd;
        t.parent[vi] = u;
        pq.emplace(nt, nd, e.to);
      }
    }
  }
  return t;
}

std::optional<PathResult> fastest_path(const Network& net, NodeId o, NodeId d) {
  if (d < 0 || static_cast<std::size_t>(d) >= net.num_nodes()) throw NetworkError("target node out of range");
  auto t = build_tree(net, o);
  if (!t.reachable(d)) return std::nullopt;
  return PathResult{t.time[static_cast<std::size_t>(d)], t.distance[static_cast<std::size_t>(d)], t.path_to(d)};
}

Network scale_edge_times(const Network& net, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw std::invalid_argument("scale factor must be positive");
  std::vector<NodeInfo> nodes;
  for (std::size_t i = 0; i < net.num_nodes(); ++i) nodes.push_back(net.node(static_cast<NodeId>(i)));
  std::vector<EdgeRecord> edges;
  for (const auto& e : net.edges())
    edges.push_back({net.external_id(e.from), net.external_id(e.to), e.travel_time * factor, e.length, e.road_class});
  return Network(std::move(nodes), std::move(edges));
}

Router::Router(std::shared_ptr<const Network> net)
    : net_(std::move(net)), trees_(new std::atomic<const ShortestPathTree*>[net_->num_nodes()]) {
  for (std::size_t i = 0; i < net_->num_nodes(); ++i) trees_[i].store(nullptr, std::memory_order_relaxed);
}

Router::~Router() = default;

const ShortestPathTree& Router::tree(NodeId source) const {
  auto& slot = trees_[static_cast<std::size_t>(source)];
  const ShortestPathTree* p = slot.load(std::memory_order_acquire);
  if (p != nullptr) return *p;
  std::lock_guard lock(mutex_);
  p = slot.load(std::memory_order_acquire);
  if (p == nullptr) {
    auto owned = std::make_unique<ShortestPathTree>(build_tree(*net_, source));
    p = owned.get();
    owned_.push_back(std::move(owned));
    slot.store(p, std::memory_order_release);
  }
  return *p;
}

std::optional<PathResult> Router::path(NodeId o, NodeId d) const {
  const auto& t = tree(o);
  if (!t.reachable(d)) return std::nullopt;
  return PathResult{t.time[static_cast<std::size_t>(d)], t.distance[static_cast<std::size_t>(d)], t.path_to(d)};
}

TravelTimeMatrix::TravelTimeMatrix(const Router& router, std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) pos_.emplace(nodes_[i], i);
  cells_.resize(nodes_.size() * nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& t = router.tree(nodes_[i]);
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const auto d = static_cast<std::size_t>(nodes_[j]);
      cells_[i * nodes_.size() + j] = {t.time[d], t.distance[d]};
    }
  }
}

std::optional<TravelTimeMatrix::Entry> TravelTimeMatrix::at(NodeId o, NodeId d) const {
  const auto& e = cells_[pos_.at(o) * nodes_.size() + pos_.at(d)];
  if (!std::isfinite(e.time)) return std::nullopt;
  return e;
}

std::vector<NodeId> boarding_candidates(const Network& net, const BoardingRule& rule) {
  std::vector<NodeId> out;
  const auto& edges = net.edges();
  for (std::size_t i = 0; i < net.num_nodes(); ++i) {
    auto n = static_cast<NodeId>(i);
    auto outs = net.out_edges(n);
    auto ins = net.in_edges(n);
    if (outs.empty() && ins.empty()) continue;
    bool ok = std::all_of(outs.begin(), outs.end(), [&](auto k) { return rule(edges[static_cast<std::size_t>(k)]); }) &&
              std::all_of(ins.begin(), ins.end(), [&](auto k) { return rule(edges[static_cast<std::size_t>(k)]); });
    if (ok) out.push_back(n);
  }
  return out;
}

std::vector<NodeId> select_access_nodes(const Network& net, const BoardingRule& rule, double min_spacing,
                                        std::size_t target_count, std::mt19937_64& rng) {
  auto candidates = boarding_candidates(net, rule);
  if (target_count > candidates.size())
    throw std::invalid_argument("target_count " + std::to_string(target_count) + " exceeds " +
                                std::to_string(candidates.size()) + " boarding candidates");
  const std::size_t n = candidates.size();
  std::vector<bool> alive(n, true);
  std::vector<double> nn_dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> nn(n, n);
  auto recompute = [&](std::size_t i) {
    nn_dist[i] = std::numeric_limits<double>::infinity();
    nn[i] = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !alive[j]) continue;
      double d = net.euclidean(candidates[i], candidates[j]);
      if (d < nn_dist[i]) {
        nn_dist[i] = d;
        nn[i] = j;
      }
    }
  };
  if (min_spacing > 0.0)
    for (std::size_t i = 0; i < n; ++i) recompute(i);

  std::size_t remaining = n;
  std::vector<std::size_t> pool;
  while (remaining > target_count) {
    pool.clear();
    if (min_spacing > 0.0)
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i] && nn_dist[i] < min_spacing) pool.push_back(i);
    if (pool.empty())
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) pool.push_back(i);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::size_t victim = pool[pick(rng)];
    alive[victim] = false;
    --remaining;
    if (min_spacing > 0.0)
      for (std::size_t i = 0; i < n; ++i)
        if (alive[i] && nn[i] == victim) recompute(i);
  }
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n; ++i)
    if (alive[i]) out.push_back(candidates[i]);
  return out;
}

Zoning::Zoning(std::vector<Zone> zones, std::vector<int> node_zone)
    : zones_(std::move(zones)), node_zone_(std::move(node_zone)) {}

std::vector<NodeId> select_zone_centroids(const Router& router, double reach_limit, double time_limit_s) {
  if (!(reach_limit >= 0.0)) throw std::invalid_argument("reach_limit must be nonnegative");
  const auto& access = router.network().access_nodes();
  if (access.empty()) return {};
  milp::LinearModel m;
  std::vector<milp::Term> obj;
  for (NodeId c : access) {
    auto v = m.add_binary("n" + std::to_string(router.network().external_id(c)));
    obj.push_back({v, 1.0});
  }
  for (NodeId n : access) {
    std::vector<milp::Term> cover;
    for (std::size_t k = 0; k < access.size(); ++k)
      if (router.time(access[k], n) <= reach_limit + kTieEps) cover.push_back({static_cast<milp::VarId>(k), 1.0});
    if (cover.empty())
      throw Infeasible("node " + std::to_string(router.network().external_id(n)) +
                       " is not reachable from any access node within the reach limit");
    m.add_constraint(std::move(cover), milp::Relation::GreaterEqual, 1.0);
  }
  m.set_objective(std::move(obj), milp::Sense::Minimize);
  milp::Limits lim;
  lim.time_seconds = time_limit_s;
  auto sol = milp::solve(m, lim);
  if (!sol.has_values()) throw Infeasible(std::string("centroid selection failed: ") + milp::to_string(sol.status));
  std::vector<NodeId> out;
  for (std::size_t k = 0; k < access.size(); ++k)
    if (sol.values[k] > 0.5) out.push_back(access[k]);
  return out;
}

Zoning assign_nodes_to_zones(const Router& router, std::vector<NodeId> centroids) {
  if (centroids.empty()) throw std::invalid_argument("at least one centroid is required");
  std::sort(centroids.begin(), centroids.end());
  centroids.erase(std::unique(centroids.begin(), centroids.end()), centroids.end());
  const auto& net = router.network();
  for (NodeId c : centroids)
    if (!net.is_access(c)) throw std::invalid_argument("centroid " + std::to_string(net.external_id(c)) +
                                                       " is not an access node");

  std::vector<Zone> zones(centroids.size());
  for (std::size_t z = 0; z < centroids.size(); ++z) {
    zones[z].id = static_cast<int>(z);
    zones[z].centroid = centroids[z];
  }
  std::vector<int> node_zone(net.num_nodes(), -1);
  for (std::size_t i = 0; i < net.num_nodes(); ++i) {
    auto n = static_cast<NodeId>(i);
    int best = -1;
    double best_t = std::numeric_limits<double>::infinity();
    for (std::size_t z = 0; z < centroids.size(); ++z) {
      double t = router.time(centroids[z], n);
      if (t < best_t) {
        best_t = t;
        best = static_cast<int>(z);
      }
    }
    if (best < 0) {
      if (net.is_access(n))
        throw Infeasible("access node " + std::to_string(net.external_id(n)) + " is unreachable from every centroid");
      for (std::size_t z = 0; z < centroids.size(); ++z) {
        double t = router.time(n, centroids[z]);
        if (t < best_t) {
          best_t = t;
          best = static_cast<int>(z);
        }
      }
      if (best < 0) best = 0;
    }
    node_zone[i] = best;
    if (net.is_access(n)) zones[static_cast<std::size_t>(best)].members.push_back(n);
  }
  return Zoning(std::move(zones), std::move(node_zone));
}

Network make_grid_network(int rows, int cols, double edge_time, double edge_length) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("grid dimensions must be positive");
  std::vector<NodeInfo> nodes;
  std::vector<EdgeRecord> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      std::int64_t id = static_cast<std::int64_t>(r) * cols + c;
      nodes.push_back({id, true, c * edge_length, r * edge_length});
      auto link = [&](std::int64_t other) {
        edges.push_back({id, other, edge_time, edge_length, {}});
        edges.push_back({other, id, edge_time, edge_length, {}});
      };
      if (c + 1 < cols) link(id + 1);
      if (r + 1 < rows) link(id + cols);
    }
  }
  return Network(std::move(nodes), std::move(edges));
}

namespace {

bool parse_flag(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false" || s.empty()) return false;
  throw std::invalid_argument("expected 0/1 flag, got '" + s + "'");
}

}  // namespace

Network load_network(const std::string& dir) {
  namespace fs = std::filesystem;
  auto nodes_t = csv::read_file((fs::path(dir) / "nodes.csv").string());
  auto edges_t = csv::read_file((fs::path(dir) / "edges.csv").string());
  const auto c_id = nodes_t.column("node_id");
  const auto c_acc = nodes_t.column("is_access");
  const int c_x = nodes_t.find_column("x");
  const int c_y = nodes_t.find_column("y");
  std::vector<NodeInfo> nodes;
  for (std::size_t r = 0; r < nodes_t.rows.size(); ++r) {
    const auto& row = nodes_t.rows[r];
    try {
      NodeInfo n;
      n.external_id = csv::to_int(row.at(c_id));
      n.is_access = parse_flag(row.at(c_acc));
      if (c_x >= 0 && static_cast<std::size_t>(c_x) < row.size() && !row[static_cast<std::size_t>(c_x)].empty())
        n.x = csv::to_double(row[static_cast<std::size_t>(c_x)]);
      if (c_y >= 0 && static_cast<std::size_t>(c_y) < row.size() && !row[static_cast<std::size_t>(c_y)].empty())
        n.y = csv::to_double(row[static_cast<std::size_t>(c_y)]);
      nodes.push_back(n);
    } catch (const std::exception& e) {
      throw NetworkError("nodes.csv line " + std::to_string(nodes_t.lines[r]) + ": " + e.what());
    }
  }
  const auto c_from = edges_t.column("from");
  const auto c_to = edges_t.column("to");
  const auto c_tt = edges_t.column("travel_time_s");
  const int c_len = edges_t.find_column("length_m");
  const int c_cls = edges_t.find_column("road_class");
  std::vector<EdgeRecord> edges;
  for (std::size_t r = 0; r < edges_t.rows.size(); ++r) {
    const auto& row = edges_t.rows[r];
    try {
      EdgeRecord e;
      e.from = csv::to_int(row.at(c_from));
      e.to = csv::to_int(row.at(c_to));
      e.travel_time = csv::to_double(row.at(c_tt));
      if (c_len >= 0 && static_cast<std::size_t>(c_len) < row.size() && !row[static_cast<std::size_t>(c_len)].empty())
        e.length = csv::to_double(row[static_cast<std::size_t>(c_len)]);
      if (c_cls >= 0 && static_cast<std::size_t>(c_cls) < row.size()) e.road_class = row[static_cast<std::size_t>(c_cls)];
      edges.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw NetworkError("edges.csv line " + std::to_string(edges_t.lines[r]) + ": " + e.what());
    }
  }
  return Network(std::move(nodes), std::move(edges));
}

void save_network(const Network& net, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream nodes((fs::path(dir) / "nodes.csv").string());
  nodes << "node_id,is_access,x,y\n";
  for (std::size_t i = 0; i < net.num_nodes(); ++i) {
    const auto& n = net.node(static_cast<NodeId>(i));
    nodes << n.external_id << ',' << (n.is_access ? 1 : 0) << ',' << csv::format_double(n.x) << ','
          << csv::format_double(n.y) << '\n';
  }
  std::ofstream edges((fs::path(dir) / "edges.csv").string());
  edges << "from,to,travel_time_s,length_m,road_class\n";
  for (const auto& e : net.edges())
    edges << net.external_id(e.from) << ',' << net.external_id(e.to) << ',' << csv::format_double(e.travel_time)
          << ',' << csv::format_double(e.length) << ',' << e.road_class << '\n';
}

Zoning load_zoning(const std::string& path, const Router& router) {
  const auto& net = router.network();
  auto t = csv::read_file(path);
  const auto c_node = t.column("node_id");
  const auto c_zone = t.column("zone_id");
  const auto c_cent = t.column("is_centroid");
  std::map<std::int64_t, std::vector<NodeId>> members;
  std::map<std::int64_t, NodeId> centroid;
  std::set<NodeId> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    auto where = path + " line " + std::to_string(t.lines[r]) + ": ";
    NodeId n;
    std::int64_t z;
    bool is_c;
    try {
      n = net.index_of(csv::to_int(row.at(c_node)));
      z = csv::to_int(row.at(c_zone));
      is_c = parse_flag(row.at(c_cent));
    } catch (const std::exception& e) {
      throw NetworkError(where + e.what());
    }
    if (!seen.insert(n).second) throw NetworkError(where + "node listed twice");
    if (net.is_access(n)) members[z].push_back(n);
    if (is_c) {
      if (centroid.count(z)) throw NetworkError(where + "zone has two centroids");
      centroid[z] = n;
    }
  }
  for (NodeId a : net.access_nodes())
    if (!seen.count(a)) throw NetworkError(path + ": access node " + std::to_string(net.external_id(a)) + " has no zone");

  std::vector<Zone> zones;
  std::map<std::int64_t, int> dense;
  for (auto& [z, mem] : members) {
    if (!centroid.count(z)) throw NetworkError(path + ": zone " + std::to_string(z) + " has no centroid");
    Zone zone;
    zone.id = static_cast<int>(zones.size());
    zone.centroid = centroid[z];
    zone.members = mem;
    std::sort(zone.members.begin(), zone.members.end());
    if (!std::binary_search(zone.members.begin(), zone.members.end(), zone.centroid))
      throw NetworkError(path + ": centroid of zone " + std::to_string(z) + " is not a member");
    dense[z] = zone.id;
    zones.push_back(std::move(zone));
  }
  std::vector<int> node_zone(net.num_nodes(), -1);
  for (const auto& zone : zones)
    for (NodeId n : zone.members) node_zone[static_cast<std::size_t>(n)] = zone.id;
  for (std::size_t i = 0; i < net.num_nodes(); ++i) {
    if (node_zone[i] >= 0) continue;
    auto n = static_cast<NodeId>(i);
    double best_t = std::numeric_limits<double>::infinity();
    int best = 0;
    for (const auto& zone : zones) {
      double tt = router.time(zone.centroid, n);
      if (tt < best_t) {
        best_t = tt;
        best = zone.id;
      }
    }
    node_zone[i] = best;
  }
  return Zoning(std::move(zones), std::move(node_zone));
}

void save_zoning(const Zoning& zoning, const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "node_id,zone_id,is_centroid\n";
  for (NodeId a : net.access_nodes()) {
    int z = zoning.zone_of(a);
    out << net.external_id(a) << ',' << z << ',' << (zoning.centroid(z) == a ? 1 : 0) << '\n';
  }
}

}  // namespace rpool
