#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace rfd {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct Edge {
  NodeIndex from = 0;
  NodeIndex to = 0;
  double cost = 0.0;
};

// Edge as it appears in a graph file, endpoints by id.
struct EdgeSpec {
  std::string from;
  std::string to;
  double cost = 0.0;
};

/// Immutable weighted digraph of intersections (nodes) and road units (edges).
///
/// Nodes are addressed by dense indices in declaration order; the string id is
/// kept for I/O and for lexicographic tie-breaking. Outgoing edge lists are
/// sorted by target id so every "first best" scan breaks ties the same way.
class RoadGraph {
 public:
  RoadGraph() = default;

  /// Validates ids and edges and builds the adjacency index.
  /// Throws ValidationError on duplicate ids, bad ids, self-loops, parallel
  /// edges, unknown endpoints or non-positive / non-finite costs.
  static RoadGraph build(std::vector<std::string> node_ids, const std::vector<EdgeSpec>& edges);

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& id(NodeIndex v) const { return ids_.at(v); }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Throws UnknownNode.
  NodeIndex index(std::string_view id) const;
  std::optional<NodeIndex> find(std::string_view id) const;

  const Edge& edge(EdgeIndex e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeIndex> out_edges(NodeIndex v) const {
    return {out_.data() + out_offset_[v], out_.data() + out_offset_[v + 1]};
  }
  std::span<const EdgeIndex> in_edges(NodeIndex v) const {
    return {in_.data() + in_offset_[v], in_.data() + in_offset_[v + 1]};
  }

  std::optional<EdgeIndex> find_edge(NodeIndex from, NodeIndex to) const;

  /// Same topology with replaced edge costs (indexed like edges()).
  RoadGraph with_costs(std::span<const double> costs) const;

  /// Edge list in file form, in edge-index order.
  std::vector<EdgeSpec> edge_specs() const;

  /// "from>to", the road-unit identifier used on the telemetry wire.
  std::string unit_id(EdgeIndex e) const;

  friend bool operator==(const RoadGraph& a, const RoadGraph& b) {
    return a.ids_ == b.ids_ && a.edge_specs() == b.edge_specs();
  }

 private:
  void index_adjacency();

  std::vector<std::string> ids_;
  std::unordered_map<std::string, NodeIndex> lookup_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offset_, in_offset_;
  std::vector<EdgeIndex> out_, in_;
};

inline bool operator==(const EdgeSpec& a, const EdgeSpec& b) {
  return a.from == b.from && a.to == b.to && a.cost == b.cost;
}

/// Node ids must be 1..64 printable ASCII characters without ',' (the
/// telemetry field separator).
bool valid_node_id(std::string_view id);

struct PathResult {
  std::vector<NodeIndex> nodes;
  double total_cost = 0.0;

  friend bool operator==(const PathResult&, const PathResult&) = default;
};

/// Sum of edge costs along consecutive node pairs, in path order.
/// Throws ValidationError if a pair is not an edge.
double path_cost(const RoadGraph& g, std::span<const NodeIndex> nodes);

PathResult make_path(const RoadGraph& g, std::vector<NodeIndex> nodes);

std::vector<std::string> path_ids(const RoadGraph& g, const PathResult& p);
std::string format_path(const RoadGraph& g, const PathResult& p, char sep = ',');

/// Shortest decimal form that reads back to the same double.
std::string format_number(double x);

/// Removes every cycle from a walk, keeping the first visit of each node that
/// survives: the result is a simple path with the walk's endpoints.
std::vector<NodeIndex> loop_erase(std::span<const NodeIndex> walk);

/// Shared PathResult validator. Returns a description of the first violated
/// invariant, or nullopt when the path is a valid simple origin->dest path.
std::optional<std::string> check_path(const RoadGraph& g, const PathResult& p, NodeIndex origin,
                                      NodeIndex dest);

// ---- file I/O -------------------------------------------------------------

/// Builds a graph from the "nodes"/"edges" part of a graph or network document.
/// Unknown keys are ignored, so network files load as plain graphs.
RoadGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const RoadGraph& g);

/// Throws ParseError on malformed JSON or schema, ValidationError on
/// invariant violations.
RoadGraph load_graph(std::istream& in);
RoadGraph load_graph_file(const std::string& path);
void save_graph(const RoadGraph& g, std::ostream& out);

// ---- exact oracle -----------------------------------------------------------

/// Cost-to-go from every node to dest (infinity when dest is unreachable).
std::vector<double> distances_to(const RoadGraph& g, NodeIndex dest);

/// Minimum-cost path; among equal-cost paths the lexicographically smallest
/// node-id sequence. Throws Unreachable.
PathResult dijkstra_shortest_path(const RoadGraph& g, NodeIndex origin, NodeIndex dest);

// ---- generators -------------------------------------------------------------

struct CostRange {
  int lo = 1;
  int hi = 10;
};

/// Seeded digraph over nodes "n0".."n{n-1}": a directed Hamiltonian backbone
/// starting at n0 over a random permutation of the others, plus m-(n-1)
/// distinct random extra edges. Integer costs uniform in [lo, hi].
/// Throws InfeasibleParams.
RoadGraph random_graph(std::size_t n, std::size_t m, CostRange costs, std::uint64_t seed);

/// Node reachable from origin with the largest shortest-path cost (ties: the
/// smallest id). Returns origin when nothing else is reachable.
NodeIndex farthest_node(const RoadGraph& g, NodeIndex origin);

}  // namespace rfd
