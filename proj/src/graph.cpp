#include "rfd/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <set>

#include "rfd/errors.hpp"
#include "rfd/random.hpp"

namespace rfd {

using nlohmann::json;

bool valid_node_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) { return c > ' ' && c < 127 && c != ','; });
}

RoadGraph RoadGraph::build(std::vector<std::string> node_ids, const std::vector<EdgeSpec>& edges) {
  RoadGraph g;
  g.ids_ = std::move(node_ids);
  for (std::size_t i = 0; i < g.ids_.size(); ++i) {
    const auto& id = g.ids_[i];
    if (!valid_node_id(id)) throw ValidationError("invalid node id '" + id + "'");
    if (!g.lookup_.emplace(id, static_cast<NodeIndex>(i)).second)
      throw ValidationError("duplicate node id '" + id + "'");
  }
  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  g.edges_.reserve(edges.size());
  for (const auto& spec : edges) {
    const auto from = g.find(spec.from);
    const auto to = g.find(spec.to);
    if (!from) throw ValidationError("edge references unknown node '" + spec.from + "'");
    if (!to) throw ValidationError("edge references unknown node '" + spec.to + "'");
    if (*from == *to) throw ValidationError("self-loop at '" + spec.from + "'");
    if (!(spec.cost > 0.0) || !std::isfinite(spec.cost))
      throw ValidationError("edge " + spec.from + ">" + spec.to + " has non-positive cost");
    if (!seen.emplace(*from, *to).second)
      throw ValidationError("duplicate edge " + spec.from + ">" + spec.to);
    g.edges_.push_back({*from, *to, spec.cost});
  }
  g.index_adjacency();
  return g;
}

void RoadGraph::index_adjacency() {
  const std::size_t n = ids_.size();
  out_offset_.assign(n + 1, 0);
  in_offset_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offset_[e.from + 1];
    ++in_offset_[e.to + 1];
  }
  std::partial_sum(out_offset_.begin(), out_offset_.end(), out_offset_.begin());
  std::partial_sum(in_offset_.begin(), in_offset_.end(), in_offset_.begin());
  out_.assign(edges_.size(), 0);
  in_.assign(edges_.size(), 0);
  auto out_fill = out_offset_;
  auto in_fill = in_offset_;
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    out_[out_fill[edges_[e].from]++] = e;
    in_[in_fill[edges_[e].to]++] = e;
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(out_.begin() + out_offset_[v], out_.begin() + out_offset_[v + 1],
              [&](EdgeIndex a, EdgeIndex b) { return ids_[edges_[a].to] < ids_[edges_[b].to]; });
    std::sort(in_.begin() + in_offset_[v], in_.begin() + in_offset_[v + 1],
              [&](EdgeIndex a, EdgeIndex b) { return ids_[edges_[a].from] < ids_[edges_[b].from]; });
  }
}

NodeIndex RoadGraph::index(std::string_view id) const {
  if (auto v = find(id)) return *v;
  throw UnknownNode(std::string(id));
}

std::optional<NodeIndex> RoadGraph::find(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> RoadGraph::find_edge(NodeIndex from, NodeIndex to) const {
  for (EdgeIndex e : out_edges(from))
    if (edges_[e].to == to) return e;
  return std::nullopt;
}

RoadGraph RoadGraph::with_costs(std::span<const double> costs) const {
  if (costs.size() != edges_.size()) throw ValidationError("cost vector size mismatch");
  RoadGraph g = *this;
  for (std::size_t e = 0; e < costs.size(); ++e) {
    if (!(costs[e] > 0.0) || !std::isfinite(costs[e]))
      throw ValidationError("non-positive cost for " + unit_id(static_cast<EdgeIndex>(e)));
    g.edges_[e].cost = costs[e];
  }
  return g;
}

std::vector<EdgeSpec> RoadGraph::edge_specs() const {
  std::vector<EdgeSpec> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({ids_[e.from], ids_[e.to], e.cost});
  return out;
}

std::string RoadGraph::unit_id(EdgeIndex e) const {
  return ids_[edges_[e].from] + ">" + ids_[edges_[e].to];
}

// ---- paths ------------------------------------------------------------------

double path_cost(const RoadGraph& g, std::span<const NodeIndex> nodes) {
  double total = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto e = g.find_edge(nodes[i - 1], nodes[i]);
    if (!e) throw ValidationError("no edge " + g.id(nodes[i - 1]) + ">" + g.id(nodes[i]));
    total += g.edge(*e).cost;
  }
  return total;
}

PathResult make_path(const RoadGraph& g, std::vector<NodeIndex> nodes) {
  PathResult p;
  p.total_cost = path_cost(g, nodes);
  p.nodes = std::move(nodes);
  return p;
}

std::vector<std::string> path_ids(const RoadGraph& g, const PathResult& p) {
  std::vector<std::string> out;
  out.reserve(p.nodes.size());
  for (NodeIndex v : p.nodes) out.push_back(g.id(v));
  return out;
}

std::string format_number(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string format_path(const RoadGraph& g, const PathResult& p, char sep) {
  std::string s;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    if (i) s += sep;
    s += g.id(p.nodes[i]);
  }
  return s;
}

std::vector<NodeIndex> loop_erase(std::span<const NodeIndex> walk) {
  std::vector<NodeIndex> out;
  for (NodeIndex v : walk) {
    auto seen = std::find(out.begin(), out.end(), v);
    if (seen != out.end())
      out.erase(seen + 1, out.end());
    else
      out.push_back(v);
  }
  return out;
}

std::optional<std::string> check_path(const RoadGraph& g, const PathResult& p, NodeIndex origin,
                                      NodeIndex dest) {
  if (p.nodes.empty()) return "empty path";
  if (p.nodes.front() != origin) return "path does not start at origin";
  if (p.nodes.back() != dest) return "path does not end at destination";
  std::vector<bool> seen(g.node_count(), false);
  double total = 0.0;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const NodeIndex v = p.nodes[i];
    if (v >= g.node_count()) return "node index out of range";
    if (seen[v]) return "repeated node " + g.id(v);
    seen[v] = true;
    if (i > 0) {
      auto e = g.find_edge(p.nodes[i - 1], v);
      if (!e) return "missing edge " + g.id(p.nodes[i - 1]) + ">" + g.id(v);
      total += g.edge(*e).cost;
    }
  }
  if (std::abs(total - p.total_cost) > 1e-9 * std::max(1.0, total))
    return "totalCost " + std::to_string(p.total_cost) + " != edge sum " + std::to_string(total);
  return std::nullopt;
}

// ---- I/O --------------------------------------------------------------------

RoadGraph graph_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("graph document must be a JSON object");
    if (!doc.contains("nodes") || !doc.at("nodes").is_array())
      throw ParseError("missing array 'nodes'");
    if (!doc.contains("edges") || !doc.at("edges").is_array())
      throw ParseError("missing array 'edges'");
    std::vector<std::string> ids;
    for (const auto& n : doc.at("nodes")) {
      if (!n.is_object() || !n.contains("id") || !n.at("id").is_string())
        throw ParseError("node entries need a string 'id'");
      ids.push_back(n.at("id").get<std::string>());
    }
    std::vector<EdgeSpec> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("cost"))
        throw ParseError("edge entries need 'from', 'to' and 'cost'");
      if (!e.at("from").is_string() || !e.at("to").is_string() || !e.at("cost").is_number())
        throw ParseError("edge fields have the wrong type");
      edges.push_back({e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                       e.at("cost").get<double>()});
    }
    return RoadGraph::build(std::move(ids), edges);
  } catch (const json::exception& ex) {
    throw ParseError(ex.what());
  }
}

json graph_to_json(const RoadGraph& g) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& id : g.ids()) doc["nodes"].push_back({{"id", id}});
  doc["edges"] = json::array();
  for (const auto& e : g.edge_specs())
    doc["edges"].push_back({{"from", e.from}, {"to", e.to}, {"cost", e.cost}});
  return doc;
}

RoadGraph load_graph(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError(ex.what());
  }
  return graph_from_json(doc);
}

RoadGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'");
  return load_graph(in);
}

void save_graph(const RoadGraph& g, std::ostream& out) { out << graph_to_json(g).dump(2) << '\n'; }

// ---- oracle -----------------------------------------------------------------

std::vector<double> distances_to(const RoadGraph& g, NodeIndex dest) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.node_count(), inf);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[dest] = 0.0;
  heap.emplace(0.0, dest);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (EdgeIndex e : g.in_edges(v)) {
      const auto& edge = g.edge(e);
      const double nd = d + edge.cost;
      if (nd < dist[edge.from]) {
        dist[edge.from] = nd;
        heap.emplace(nd, edge.from);
      }
    }
  }
  return dist;
}

PathResult dijkstra_shortest_path(const RoadGraph& g, NodeIndex origin, NodeIndex dest) {
  if (origin >= g.node_count() || dest >= g.node_count()) throw UnknownNode(std::to_string(origin));
  const auto dist = distances_to(g, dest);
  if (!std::isfinite(dist[origin]))
    throw Unreachable("no path from " + g.id(origin) + " to " + g.id(dest));
  // Walk tight edges; out_edges is sorted by target id, so the first tight
  // edge gives the lexicographically smallest optimal continuation.
  std::vector<NodeIndex> nodes{origin};
  NodeIndex at = origin;
  while (at != dest) {
    const double tol = 1e-9 * std::max(1.0, dist[at]);
    NodeIndex next = at;
    for (EdgeIndex e : g.out_edges(at)) {
      const auto& edge = g.edge(e);
      if (std::abs(edge.cost + dist[edge.to] - dist[at]) <= tol) {
        next = edge.to;
        break;
      }
    }
    if (next == at) throw Unreachable("oracle lost the tight edge at " + g.id(at));
    nodes.push_back(next);
    at = next;
  }
  return make_path(g, std::move(nodes));
}

// ---- generators -------------------------------------------------------------

RoadGraph random_graph(std::size_t n, std::size_t m, CostRange costs, std::uint64_t seed) {
  if (n < 2) throw InfeasibleParams("random_graph needs n >= 2");
  if (m < n - 1) throw InfeasibleParams("random_graph needs m >= n-1");
  if (costs.lo < 1 || costs.hi < costs.lo) throw InfeasibleParams("cost range must satisfy 1 <= lo <= hi");
  if (m > n * (n - 1)) throw InfeasibleParams("m exceeds n*(n-1)");

  Rng rng = make_rng(seed, 0x67726170);
  std::uniform_int_distribution<int> cost_dist(costs.lo, costs.hi);

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = "n" + std::to_string(i);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin() + 1, order.end(), rng);

  std::set<std::pair<std::size_t, std::size_t>> used;
  std::vector<EdgeSpec> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    used.emplace(order[i], order[i + 1]);
    edges.push_back({ids[order[i]], ids[order[i + 1]], double(cost_dist(rng))});
  }

  const std::size_t extra = m - (n - 1);
  const std::size_t free_pairs = n * (n - 1) - (n - 1);
  if (extra * 2 <= free_pairs) {
    std::uniform_int_distribution<std::size_t> node_dist(0, n - 1);
    while (edges.size() < m) {
      const std::size_t a = node_dist(rng), b = node_dist(rng);
      if (a == b || !used.emplace(a, b).second) continue;
      edges.push_back({ids[a], ids[b], double(cost_dist(rng))});
    }
  } else {
    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    candidates.reserve(free_pairs);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && !used.count({a, b})) candidates.emplace_back(a, b);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (std::size_t i = 0; i < extra; ++i) {
      const auto [a, b] = candidates[i];
      edges.push_back({ids[a], ids[b], double(cost_dist(rng))});
    }
  }
  return RoadGraph::build(std::move(ids), edges);
}

NodeIndex farthest_node(const RoadGraph& g, NodeIndex origin) {
  // Forward distances: Dijkstra from origin over out-edges.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.node_count(), inf);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[origin] = 0.0;
  heap.emplace(0.0, origin);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (EdgeIndex e : g.out_edges(v)) {
      const auto& edge = g.edge(e);
      if (d + edge.cost < dist[edge.to]) {
        dist[edge.to] = d + edge.cost;
        heap.emplace(dist[edge.to], edge.to);
      }
    }
  }
  NodeIndex best = origin;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (!std::isfinite(dist[v])) continue;
    if (dist[v] > dist[best] || (dist[v] == dist[best] && g.id(v) < g.id(best))) best = v;
  }
  return best;
}

}  // namespace rfd
