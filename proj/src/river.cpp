#include "rfd/river.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "rfd/errors.hpp"
#include "rfd/parallel.hpp"

namespace rfd {

void RfdParams::validate() const {
  auto fail = [](const char* what) { throw InfeasibleParams(std::string("rfd: ") + what); };
  if (!(initial_altitude > 0.0)) fail("initial_altitude must be positive");
  if (!(erosion_rate > 0.0)) fail("erosion_rate must be positive");
  if (erosion_law == ErosionLaw::graded && erosion_rate > 1.0) fail("erosion_rate must be at most 1 under the graded law");
  if (!(flat_weight > 0.0)) fail("flat_weight must be positive");
  if (!(flat_weight < initial_altitude)) fail("flat_weight must be below initial_altitude");
  if (!(deposit_rate > 0.0 && deposit_rate <= 1.0)) fail("deposit_rate must be in (0,1]");
  if (drops_per_iteration == 0) fail("drops_per_iteration must be positive");
  if (max_iterations == 0) fail("max_iterations must be positive");
  if (stable_path_iterations == 0) fail("stable_path_iterations must be positive");
  if (!(min_altitude > 0.0 && min_altitude <= initial_altitude)) fail("min_altitude must be in (0, initial_altitude]");
  if (!(flat_tolerance >= 0.0)) fail("flat_tolerance must be non-negative");
  if (workers == 0) fail("workers must be positive");
}

// ---- Landscape --------------------------------------------------------------

Landscape::Landscape(std::vector<double> altitude, NodeIndex destination)
    : altitude_(std::move(altitude)), destination_(destination) {
  if (destination_ >= altitude_.size()) throw UnknownNode(std::to_string(destination_));
  altitude_[destination_] = 0.0;
}

void Landscape::apply(std::span<const ErosionDelta> deltas, const RfdParams& p) {
  for (const auto& d : deltas) altitude_[d.node] += d.delta;
  for (std::size_t v = 0; v < altitude_.size(); ++v)
    altitude_[v] = std::clamp(altitude_[v], p.min_altitude, p.initial_altitude);
  altitude_[destination_] = 0.0;
}

void Landscape::set_altitude(NodeIndex v, double value, const RfdParams& p) {
  altitude_.at(v) = v == destination_ ? 0.0 : std::clamp(value, p.min_altitude, p.initial_altitude);
}

Landscape init_landscape(const RoadGraph& g, NodeIndex destination, const RfdParams& p) {
  if (destination >= g.node_count()) throw UnknownNode(std::to_string(destination));
  return Landscape(std::vector<double>(g.node_count(), p.initial_altitude), destination);
}

// ---- drops ------------------------------------------------------------------

std::vector<TransitionWeight> transition_weights(const RoadGraph& g, const Landscape& land,
                                                 const Drop& d, const RfdParams& p) {
  std::vector<TransitionWeight> out;
  const auto edges = g.out_edges(d.at);
  out.reserve(edges.size());
  const double here = land.altitude(d.at);
  for (EdgeIndex e : edges) {
    const auto& edge = g.edge(e);
    const double gradient = (here - land.altitude(edge.to)) / edge.cost;
    double w = 0.0;
    if (gradient > p.flat_tolerance)
      w = gradient;
    else if (std::abs(gradient) <= p.flat_tolerance)
      w = p.flat_weight / edge.cost;
    out.push_back({e, edge.to, w});
  }
  if (d.path.size() >= 2) {
    const NodeIndex previous = d.path[d.path.size() - 2];
    auto back = std::find_if(out.begin(), out.end(), [&](const auto& t) { return t.target == previous; });
    if (back != out.end() && back->weight > 0.0) {
      const bool alternative = std::any_of(out.begin(), out.end(), [&](const auto& t) {
        return t.target != previous && t.weight > 0.0;
      });
      if (alternative) back->weight = 0.0;
    }
  }
  return out;
}

ErosionDelta deposit_sediment(const RoadGraph& g, const Landscape& land, NodeIndex node,
                              const RfdParams& p) {
  if (node == land.destination()) throw NotBlocked("deposit requested at the destination");
  const auto edges = g.out_edges(node);
  if (edges.empty()) throw NotBlocked("deposit requested at " + g.id(node) + " which has no outgoing edges");
  double lowest = std::numeric_limits<double>::infinity();
  for (EdgeIndex e : edges) lowest = std::min(lowest, land.altitude(g.edge(e).to));
  if (!(lowest > land.altitude(node)))
    throw NotBlocked("node " + g.id(node) + " has a neighbor at or below its altitude");
  return {node, p.deposit_rate * (lowest - land.altitude(node))};
}

void advance_drop(const RoadGraph& g, const Landscape& land, Drop& d, Rng& rng, const RfdParams& p,
                  std::vector<ErosionDelta>& deltas) {
  if (!d.alive()) return;
  if (d.at == land.destination()) {
    d.fate = DropFate::completed;
    return;
  }
  if (d.path.size() > p.step_cap(g)) {
    d.fate = DropFate::exhausted;
    return;
  }
  const auto weights = transition_weights(g, land, d, p);
  if (weights.empty()) {
    d.fate = DropFate::stranded;
    return;
  }
  double total = 0.0;
  for (const auto& t : weights) total += t.weight;
  if (!(total > 0.0)) {
    deltas.push_back(deposit_sediment(g, land, d.at, p));
    d.fate = DropFate::blocked;
    return;
  }

  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  const TransitionWeight* pick = nullptr;
  double acc = 0.0;
  for (const auto& t : weights) {
    if (t.weight <= 0.0) continue;
    pick = &t;
    acc += t.weight;
    if (u < acc) break;
  }

  if (p.erosion_law == ErosionLaw::gradient) deltas.push_back({d.at, -p.erosion_rate * pick->weight});
  d.at = pick->target;
  d.path.push_back(d.at);
  if (d.at == land.destination()) d.fate = DropFate::completed;
}

std::vector<ErosionDelta> settle_drop(const RoadGraph& g, const Landscape& land, const Drop& d,
                                      const RfdParams& p) {
  // Loops the drop wandered through say nothing about the route.
  const auto route = loop_erase(d.path);
  std::vector<ErosionDelta> out;
  if (route.size() < 2) return out;
  const double length = path_cost(g, route);
  const double mean_slope = land.altitude(route.front()) / length;
  out.reserve(route.size() - 1);
  for (std::size_t k = 0; k + 1 < route.size(); ++k) {
    const NodeIndex i = route[k], j = route[k + 1];
    const double cost = g.edge(*g.find_edge(i, j)).cost;
    const double excess = land.altitude(i) - land.altitude(j) - mean_slope * cost;
    out.push_back({i, -p.erosion_rate * excess});
  }
  return out;
}

// ---- iteration --------------------------------------------------------------

namespace {

struct DropOutcome {
  DropFate fate = DropFate::moving;
  std::vector<ErosionDelta> deltas;  ///< a blocked drop's deposit is last
};

DropOutcome run_drop(const RoadGraph& g, const Landscape& land, NodeIndex origin, const RfdParams& p,
                     std::size_t iteration, std::size_t index) {
  Rng rng = make_rng(p.seed, iteration, index);
  Drop drop(origin);
  DropOutcome out;
  while (drop.alive()) advance_drop(g, land, drop, rng, p, out.deltas);
  out.fate = drop.fate;
  if (p.erosion_law == ErosionLaw::graded && drop.fate == DropFate::completed)
    out.deltas = settle_drop(g, land, drop, p);
  return out;
}

}  // namespace

IterationReport run_iteration(const RoadGraph& g, Landscape& land, NodeIndex origin,
                              const RfdParams& p, std::size_t iteration) {
  if (origin >= g.node_count()) throw UnknownNode(std::to_string(origin));
  std::vector<DropOutcome> outcomes(p.drops_per_iteration);
  parallel_for(outcomes.size(), p.workers, [&](std::size_t i) {
    outcomes[i] = run_drop(g, land, origin, p, iteration, i);
  });

  IterationReport report;
  report.launched = outcomes.size();
  const bool graded = p.erosion_law == ErosionLaw::graded;
  std::vector<ErosionDelta> erosion;
  std::vector<ErosionDelta> fills;
  // Blocked drops at the same node all compute the same fill from the same
  // snapshot; the node is filled once, not once per drop.
  std::vector<bool> filled(g.node_count(), false);
  for (const auto& o : outcomes) {
    auto moves = std::span<const ErosionDelta>(o.deltas);
    switch (o.fate) {
      case DropFate::completed: ++report.completed; break;
      case DropFate::exhausted: ++report.exhausted; break;
      case DropFate::stranded: ++report.stranded; break;
      case DropFate::moving: break;
      case DropFate::blocked: {
        ++report.blocked;
        const auto& dep = o.deltas.back();
        double lowest = std::numeric_limits<double>::infinity();
        for (EdgeIndex e : g.out_edges(dep.node)) lowest = std::min(lowest, land.altitude(g.edge(e).to));
        report.deposits.push_back({dep.node, lowest, dep.delta});
        if (!filled[dep.node]) fills.push_back(dep);
        filled[dep.node] = true;
        moves = moves.first(moves.size() - 1);
        break;
      }
    }
    if (!graded || o.fate == DropFate::completed) erosion.insert(erosion.end(), moves.begin(), moves.end());
  }

  if (graded) {
    std::vector<double> sum(g.node_count(), 0.0);
    std::vector<std::size_t> count(g.node_count(), 0);
    for (const auto& d : erosion) {
      sum[d.node] += d.delta;
      ++count[d.node];
    }
    erosion.clear();
    for (NodeIndex v = 0; v < g.node_count(); ++v)
      if (count[v]) erosion.push_back({v, sum[v] / static_cast<double>(count[v])});
  }
  erosion.insert(erosion.end(), fills.begin(), fills.end());
  land.apply(erosion, p);
  return report;
}

PathResult extract_steepest_path(const RoadGraph& g, const Landscape& land, NodeIndex origin) {
  std::vector<NodeIndex> nodes{origin};
  NodeIndex at = origin;
  while (at != land.destination()) {
    const EdgeIndex* best = nullptr;
    double best_gradient = 0.0;
    // out_edges is sorted by target id, so strict '>' keeps the smallest id on ties.
    for (const EdgeIndex& e : g.out_edges(at)) {
      const auto& edge = g.edge(e);
      if (!(land.altitude(edge.to) < land.altitude(at))) continue;
      const double gradient = (land.altitude(at) - land.altitude(edge.to)) / edge.cost;
      if (!best || gradient > best_gradient) {
        best = &e;
        best_gradient = gradient;
      }
    }
    if (!best) throw NoDescent("no downhill edge out of " + g.id(at));
    at = g.edge(*best).to;
    nodes.push_back(at);
  }
  return make_path(g, std::move(nodes));
}

RfdSolution solve_rfd(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const RfdParams& p,
                      const IterationObserver& observer) {
  p.validate();
  if (origin >= g.node_count()) throw UnknownNode(std::to_string(origin));
  Landscape land = init_landscape(g, dest, p);
  if (origin == dest) return {make_path(g, {origin}), SolveStats{.converged = true}, land};
  if (!std::isfinite(distances_to(g, dest)[origin]))
    throw Unreachable("no path from " + g.id(origin) + " to " + g.id(dest));

  SolveStats stats;
  std::optional<PathResult> last;
  std::size_t streak = 0;
  for (std::size_t it = 0; it < p.max_iterations; ++it) {
    const auto report = run_iteration(g, land, origin, p, it);
    ++stats.iterations;
    stats.drops += report.launched;
    stats.completions += report.completed;
    stats.deposits += report.deposits.size();
    stats.exhausted += report.exhausted;
    if (observer) observer(it, land, report);

    try {
      PathResult path = extract_steepest_path(g, land, origin);
      streak = (last && last->nodes == path.nodes) ? streak + 1 : 1;
      last = std::move(path);
    } catch (const NoDescent&) {
      streak = 0;
    }
    if (streak >= p.stable_path_iterations) {
      stats.converged = true;
      break;
    }
  }
  if (!last) {
    std::ostringstream msg;
    msg << "rfd: no descent path from " << g.id(origin) << " to " << g.id(dest) << " after "
        << stats.iterations << " iterations (" << stats.completions << " of " << stats.drops
        << " drops completed, " << stats.deposits << " deposits)";
    throw NotConverged(msg.str());
  }
  return {std::move(*last), stats, std::move(land)};
}

void dump_landscape(const RoadGraph& g, const Landscape& land, std::ostream& out) {
  for (NodeIndex v = 0; v < g.node_count(); ++v) out << g.id(v) << ',' << format_number(land.altitude(v)) << '\n';
}

}  // namespace rfd
