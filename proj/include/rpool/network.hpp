#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rpool {

/// Dense node index. Indices follow ascending external id order, so
/// comparisons on NodeId agree with comparisons on the ids in the input files.
using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Fallback speed used when a network file carries no edge length.
inline constexpr double kDefaultSpeedMps = 10.0;

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NodeInfo {
  std::int64_t external_id = 0;
  bool is_access = false;
  double x = 0.0;
  double y = 0.0;
};

struct Edge {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  double travel_time = 0.0;  // seconds, > 0
  double length = 0.0;       // meters, >= 0
  std::string road_class;
};

/// Raw edge as read from a file, keyed by external node ids.
struct EdgeRecord {
  std::int64_t from = 0;
  std::int64_t to = 0;
  double travel_time = 0.0;
  std::optional<double> length;
  std::string road_class;
};

/// Directed road graph. Immutable after construction. Parallel edges are
/// collapsed to the fastest one (shorter length on ties).
class Network {
 public:
  Network() = default;
  Network(std::vector<NodeInfo> nodes, std::vector<EdgeRecord> edges);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const std::int32_t> out_edges(NodeId n) const;
  std::span<const std::int32_t> in_edges(NodeId n) const;
  /// Edge from -> to, or nullptr.
  const Edge* edge_between(NodeId from, NodeId to) const;

  std::int64_t external_id(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)).external_id; }
  NodeId index_of(std::int64_t external_id) const;
  bool contains(std::int64_t external_id) const { return index_.count(external_id) != 0; }
  const NodeInfo& node(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)); }

  bool is_access(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)).is_access; }
  /// Ascending.
  const std::vector<NodeId>& access_nodes() const { return access_; }
  /// Copy with a replaced access-node set.
  Network with_access_nodes(const std::vector<NodeId>& access) const;

  double euclidean(NodeId a, NodeId b) const;

 private:
  void rebuild_adjacency();

  std::vector<NodeInfo> nodes_;
  std::unordered_map<std::int64_t, NodeId> index_;
  std::vector<Edge> edges_;
  std::vector<std::int32_t> out_offsets_, out_list_, in_offsets_, in_list_;
  std::vector<NodeId> access_;
};

struct PathResult {
  double time = 0.0;
  double distance = 0.0;
  std::vector<NodeId> nodes;
};

/// Single-source fastest-path tree. Ties on time are broken by distance, then by
/// the lexicographically smaller node sequence.
struct ShortestPathTree {
  NodeId source = kNoNode;
  std::vector<double> time;
  std::vector<double> distance;
  std::vector<NodeId> parent;
  std::vector<NodeId> first_hop;

  bool reachable(NodeId n) const { return std::isfinite(time[static_cast<std::size_t>(n)]); }
  std::vector<NodeId> path_to(NodeId target) const;
};

ShortestPathTree build_tree(const Network& net, NodeId source);

/// Fastest path o -> d, or nullopt when d is unreachable.
std::optional<PathResult> fastest_path(const Network& net, NodeId o, NodeId d);

Network scale_edge_times(const Network& net, double factor);

/// Lazily cached all-pairs routing. Safe for concurrent queries.
class Router {
 public:
  explicit Router(std::shared_ptr<const Network> net);
  ~Router();
  Router(const Router&) = delete;
  Router& operator=(const Router&) = delete;

  const Network& network() const { return *net_; }
  std::shared_ptr<const Network> network_ptr() const { return net_; }

  /// +inf when unreachable.
  double time(NodeId o, NodeId d) const { return tree(o).time[static_cast<std::size_t>(d)]; }
  double distance(NodeId o, NodeId d) const { return tree(o).distance[static_cast<std::size_t>(d)]; }
  /// Next node after o on the fastest path to d; kNoNode when o == d or unreachable.
  NodeId next_hop(NodeId o, NodeId d) const { return tree(o).first_hop[static_cast<std::size_t>(d)]; }
  std::optional<PathResult> path(NodeId o, NodeId d) const;
  const ShortestPathTree& tree(NodeId source) const;

 private:
  std::shared_ptr<const Network> net_;
  std::unique_ptr<std::atomic<const ShortestPathTree*>[]> trees_;
  mutable std::vector<std::unique_ptr<ShortestPathTree>> owned_;
  mutable std::mutex mutex_;
};

/// Dense origin x destination table over a node subset.
class TravelTimeMatrix {
 public:
  struct Entry {
    double time;
    double distance;
  };

  TravelTimeMatrix(const Router& router, std::vector<NodeId> nodes);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  /// nullopt marks an unreachable pair. Throws std::out_of_range for nodes outside the subset.
  std::optional<Entry> at(NodeId o, NodeId d) const;

 private:
  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, std::size_t> pos_;
  std::vector<Entry> cells_;
};

/// Edge predicate deciding where boarding is allowed.
using BoardingRule = std::function<bool(const Edge&)>;

/// Nodes all of whose adjacent edges satisfy the rule.
std::vector<NodeId> boarding_candidates(const Network& net, const BoardingRule& rule);

/// Thins the candidate set to target_count nodes. Repeatedly removes a uniformly
/// drawn node among those whose nearest surviving neighbour (euclidean) is closer
/// than min_spacing, or a uniformly drawn node when no such node remains.
std::vector<NodeId> select_access_nodes(const Network& net, const BoardingRule& rule, double min_spacing,
                                        std::size_t target_count, std::mt19937_64& rng);

struct Zone {
  int id = 0;
  NodeId centroid = kNoNode;
  std::vector<NodeId> members;  // access nodes, ascending
};

/// Zone partition of the access nodes. Every other node is also mapped to a
/// zone (closest centroid) so that vehicles anywhere can be located.
class Zoning {
 public:
  Zoning() = default;
  Zoning(std::vector<Zone> zones, std::vector<int> node_zone);

  std::size_t size() const { return zones_.size(); }
  const std::vector<Zone>& zones() const { return zones_; }
  const Zone& zone(int id) const { return zones_.at(static_cast<std::size_t>(id)); }
  int zone_of(NodeId n) const { return node_zone_.at(static_cast<std::size_t>(n)); }
  NodeId centroid(int id) const { return zone(id).centroid; }

 private:
  std::vector<Zone> zones_;
  std::vector<int> node_zone_;
};

/// Minimum set of access nodes such that every access node is within
/// reach_limit seconds of one of them (set-cover ILP).
std::vector<NodeId> select_zone_centroids(const Router& router, double reach_limit, double time_limit_s = 60.0);

/// Each access node joins the zone of the centroid with the smallest travel
/// time centroid -> node; ties go to the smaller centroid. Zone ids follow
/// ascending centroid order.
Zoning assign_nodes_to_zones(const Router& router, std::vector<NodeId> centroids);

/// Regular rows x cols grid with bidirectional edges. All nodes are access
/// nodes; node id = row * cols + col.
Network make_grid_network(int rows, int cols, double edge_time, double edge_length);

Network load_network(const std::string& dir);
void save_network(const Network& net, const std::string& dir);
Zoning load_zoning(const std::string& path, const Router& router);
void save_zoning(const Zoning& zoning, const Network& net, const std::string& path);

}  // namespace rpool
