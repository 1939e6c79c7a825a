#include "rfd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rfd/errors.hpp"
#include "rfd/parallel.hpp"

namespace rfd {

namespace {

void check_endpoints(const RoadGraph& g, NodeIndex origin, NodeIndex dest) {
  if (origin >= g.node_count()) throw UnknownNode(std::to_string(origin));
  if (dest >= g.node_count()) throw UnknownNode(std::to_string(dest));
}

void check_reachable(const RoadGraph& g, NodeIndex origin, NodeIndex dest) {
  if (!std::isfinite(distances_to(g, dest)[origin]))
    throw Unreachable("no path from " + g.id(origin) + " to " + g.id(dest));
}

}  // namespace

// ---- ant colony -------------------------------------------------------------

void AcoParams::validate() const {
  auto fail = [](const char* what) { throw InfeasibleParams(std::string("aco: ") + what); };
  if (ants == 0) fail("ants must be positive");
  if (!(alpha >= 0.0)) fail("alpha must be non-negative");
  if (!(beta >= 0.0)) fail("beta must be non-negative");
  if (!(evaporation > 0.0 && evaporation < 1.0)) fail("evaporation must be in (0,1)");
  if (!(deposit_q > 0.0)) fail("deposit_q must be positive");
  if (!(initial_pheromone > 0.0)) fail("initial_pheromone must be positive");
  if (max_iterations == 0) fail("max_iterations must be positive");
  if (stable_iterations == 0) fail("stable_iterations must be positive");
  if (workers == 0) fail("workers must be positive");
}

PheromoneField::PheromoneField(std::size_t edges, double initial) : tau_(edges, initial) {
  if (!(initial > 0.0)) throw InfeasibleParams("pheromone must start positive");
}

void PheromoneField::evaporate(double rho) {
  // Floor at the smallest normal double so a long run cannot underflow to 0.
  for (double& t : tau_) t = std::max(t * (1.0 - rho), std::numeric_limits<double>::min());
}

void PheromoneField::deposit(std::span<const EdgeIndex> edges, double amount) {
  for (EdgeIndex e : edges) tau_[e] += amount;
}

AntWalk build_ant_walk(const RoadGraph& g, const PheromoneField& field, NodeIndex origin,
                       NodeIndex dest, const AcoParams& p, bool tabu, Rng& rng) {
  AntWalk w;
  w.nodes.push_back(origin);
  std::vector<bool> visited(g.node_count(), false);
  visited[origin] = true;
  const std::size_t cap = p.step_cap(g);
  std::vector<double> weight;
  NodeIndex at = origin;
  while (at != dest && w.edges.size() < cap) {
    const auto out = g.out_edges(at);
    weight.assign(out.size(), 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto& e = g.edge(out[k]);
      if (tabu && visited[e.to]) continue;
      weight[k] = std::pow(field.tau(out[k]), p.alpha) * std::pow(1.0 / e.cost, p.beta);
      total += weight[k];
    }
    if (!(total > 0.0)) break;
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = 0;
    double acc = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (weight[k] <= 0.0) continue;
      pick = k;
      acc += weight[k];
      if (u < acc) break;
    }
    const auto& e = g.edge(out[pick]);
    w.edges.push_back(out[pick]);
    w.cost += e.cost;
    at = e.to;
    w.nodes.push_back(at);
    if (visited[at]) w.repeated = true;
    visited[at] = true;
  }
  w.completed = at == dest;
  return w;
}

void update_pheromone(PheromoneField& field, std::span<const AntWalk> walks, const AcoParams& p) {
  field.evaporate(p.evaporation);
  for (const auto& w : walks)
    if (w.completed && !w.edges.empty()) field.deposit(w.edges, p.deposit_q / w.cost);
}

namespace {

std::vector<AntWalk> launch_ants(const RoadGraph& g, const PheromoneField& field, NodeIndex origin,
                                 NodeIndex dest, const AcoParams& p, bool tabu, std::size_t iteration,
                                 std::size_t count) {
  std::vector<AntWalk> walks(count);
  parallel_for(count, p.workers, [&](std::size_t i) {
    Rng rng = make_rng(p.seed, iteration, i);
    walks[i] = build_ant_walk(g, field, origin, dest, p, tabu, rng);
  });
  return walks;
}

}  // namespace

AcoSolution aco_solve(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const AcoParams& p) {
  p.validate();
  check_endpoints(g, origin, dest);
  PheromoneField field(g.edge_count(), p.initial_pheromone);
  if (origin == dest) return {make_path(g, {origin}), SolveStats{.converged = true}, field};
  check_reachable(g, origin, dest);

  SolveStats stats;
  std::optional<AntWalk> best;
  std::vector<NodeIndex> last_iteration_best;
  std::size_t streak = 0;
  for (std::size_t it = 0; it < p.max_iterations; ++it) {
    const auto walks = launch_ants(g, field, origin, dest, p, true, it, p.ants);
    ++stats.iterations;
    stats.drops += walks.size();
    const AntWalk* round_best = nullptr;
    for (const auto& w : walks) {
      if (!w.completed) {
        if (w.edges.size() >= p.step_cap(g)) ++stats.exhausted;
        continue;
      }
      ++stats.completions;
      if (!round_best || w.cost < round_best->cost) round_best = &w;
    }
    update_pheromone(field, walks, p);
    if (!round_best) {
      streak = 0;
      continue;
    }
    if (!best || round_best->cost < best->cost) best = *round_best;
    streak = round_best->nodes == last_iteration_best ? streak + 1 : 1;
    last_iteration_best = round_best->nodes;
    if (streak >= p.stable_iterations) {
      stats.converged = true;
      break;
    }
  }
  if (!best) {
    std::ostringstream msg;
    msg << "aco: no ant reached " << g.id(dest) << " from " << g.id(origin) << " in "
        << stats.iterations << " iterations";
    throw NotConverged(msg.str());
  }
  return {make_path(g, best->nodes), stats, std::move(field)};
}

double aco_cycle_pressure(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const AcoParams& p,
                          std::size_t walks) {
  p.validate();
  check_endpoints(g, origin, dest);
  if (walks == 0) return 0.0;
  PheromoneField field(g.edge_count(), p.initial_pheromone);
  std::size_t built = 0, looped = 0;
  for (std::size_t it = 0; built < walks; ++it) {
    const auto batch = launch_ants(g, field, origin, dest, p, false, it, std::min(p.ants, walks - built));
    for (const auto& w : batch) looped += w.repeated;
    built += batch.size();
    update_pheromone(field, batch, p);
  }
  return static_cast<double>(looped) / static_cast<double>(built);
}

// ---- random walks -----------------------------------------------------------

void WalkParams::validate() const {
  if (walkers == 0) throw InfeasibleParams("walk: walkers must be positive");
  if (max_steps == 0) throw InfeasibleParams("walk: max_steps must be positive");
  if (workers == 0) throw InfeasibleParams("walk: workers must be positive");
}

std::optional<NodeIndex> uniform_successor(const RoadGraph& g, NodeIndex v, Rng& rng) {
  const auto out = g.out_edges(v);
  if (out.empty()) return std::nullopt;
  const auto k = std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng);
  return g.edge(out[k]).to;
}

std::vector<NodeIndex> random_walk(const RoadGraph& g, NodeIndex origin, std::optional<NodeIndex> dest,
                                   std::size_t max_steps, Rng& rng) {
  std::vector<NodeIndex> walk{origin};
  NodeIndex at = origin;
  for (std::size_t step = 0; step < max_steps && at != dest; ++step) {
    const auto next = uniform_successor(g, at, rng);
    if (!next) break;
    at = *next;
    walk.push_back(at);
  }
  return walk;
}

WalkResult random_walk_solve(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const WalkParams& p) {
  p.validate();
  check_endpoints(g, origin, dest);
  std::vector<std::vector<NodeIndex>> walks(p.walkers);
  parallel_for(walks.size(), p.workers, [&](std::size_t i) {
    Rng rng = make_rng(p.seed, 0, i);
    walks[i] = random_walk(g, origin, dest, p.max_steps, rng);
  });

  WalkResult result;
  std::vector<bool> seen(g.node_count(), false);
  std::optional<PathResult> best;
  for (const auto& w : walks) {
    for (NodeIndex v : w) seen[v] = true;
    if (w.back() != dest) continue;
    ++result.reached;
    PathResult candidate = make_path(g, loop_erase(w));
    if (!best || candidate.total_cost < best->total_cost) best = std::move(candidate);
  }
  result.coverage = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  if (!best) throw NotFound("no random walk from " + g.id(origin) + " reached " + g.id(dest));
  result.path = std::move(*best);
  return result;
}

std::size_t walk_coverage(const RoadGraph& g, NodeIndex origin, const WalkParams& p) {
  p.validate();
  if (origin >= g.node_count()) throw UnknownNode(std::to_string(origin));
  std::vector<std::vector<NodeIndex>> walks(p.walkers);
  parallel_for(walks.size(), p.workers, [&](std::size_t i) {
    Rng rng = make_rng(p.seed, 0, i);
    walks[i] = random_walk(g, origin, std::nullopt, p.max_steps, rng);
  });
  std::vector<bool> seen(g.node_count(), false);
  for (const auto& w : walks)
    for (NodeIndex v : w) seen[v] = true;
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

}  // namespace rfd
