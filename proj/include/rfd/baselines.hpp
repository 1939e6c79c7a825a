#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rfd/graph.hpp"
#include "rfd/random.hpp"
#include "rfd/river.hpp"

namespace rfd {

// ---- ant colony -------------------------------------------------------------

struct AcoParams {
  std::size_t ants = 32;
  double alpha = 1.0;
  double beta = 2.0;
  double evaporation = 0.5;  ///< rho, in (0,1)
  double deposit_q = 1.0;
  double initial_pheromone = 1.0;
  std::size_t max_steps = 0;  ///< per-ant move cap; 0 selects 4*|V|
  std::size_t max_iterations = 1000;
  std::size_t stable_iterations = 10;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
  std::size_t step_cap(const RoadGraph& g) const { return max_steps ? max_steps : 4 * g.node_count(); }
};

/// Per-edge pheromone levels, indexed like RoadGraph::edges().
class PheromoneField {
 public:
  PheromoneField(std::size_t edges, double initial);

  double tau(EdgeIndex e) const { return tau_[e]; }
  std::span<const double> values() const { return tau_; }

  /// tau <- (1 - rho) * tau on every edge. Levels never reach zero.
  void evaporate(double rho);
  void deposit(std::span<const EdgeIndex> edges, double amount);

  friend bool operator==(const PheromoneField&, const PheromoneField&) = default;

 private:
  std::vector<double> tau_;
};

struct AntWalk {
  std::vector<NodeIndex> nodes;
  std::vector<EdgeIndex> edges;
  double cost = 0.0;
  bool completed = false;
  bool repeated = false;  ///< revisited some node before stopping
};

/// One ant from origin. With `tabu` the ant never revisits a node and dies at
/// a node whose successors are all visited; without it the ant may loop until
/// it reaches dest or the step cap.
AntWalk build_ant_walk(const RoadGraph& g, const PheromoneField& field, NodeIndex origin,
                       NodeIndex dest, const AcoParams& p, bool tabu, Rng& rng);

/// Evaporation on every edge, then each completed walk (in order) deposits
/// deposit_q / cost on every edge it traversed.
void update_pheromone(PheromoneField& field, std::span<const AntWalk> walks, const AcoParams& p);

struct AcoSolution {
  PathResult path;
  SolveStats stats;  ///< `drops` counts ants launched
  PheromoneField pheromone;
};

/// Ant System with tabu lists. Returns the cheapest path any ant found; the
/// run stops once the iteration-best path has been identical for
/// stable_iterations consecutive iterations. Throws Unreachable (checked up
/// front) or NotConverged when no ant completed within max_iterations.
AcoSolution aco_solve(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const AcoParams& p);

/// Runs the colony without tabu lists until `walks` ant walks have been built
/// and returns the fraction that revisited a node before reaching dest or the
/// step cap.
double aco_cycle_pressure(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const AcoParams& p,
                          std::size_t walks = 1000);

// ---- random walks -----------------------------------------------------------

struct WalkParams {
  std::size_t walkers = 1;
  std::size_t max_steps = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

/// Uniform choice among the successors of v; nullopt at a dead end.
std::optional<NodeIndex> uniform_successor(const RoadGraph& g, NodeIndex v, Rng& rng);

/// Walk of at most max_steps moves from origin, stopping early at a dead end
/// or on reaching `dest` when given.
std::vector<NodeIndex> random_walk(const RoadGraph& g, NodeIndex origin, std::optional<NodeIndex> dest,
                                   std::size_t max_steps, Rng& rng);

struct WalkResult {
  PathResult path;          ///< cheapest loop-erased origin->dest walk
  std::size_t reached = 0;  ///< walks that hit dest
  std::size_t coverage = 0; ///< distinct nodes visited across all walks
};

/// Throws NotFound when no walk reaches dest.
WalkResult random_walk_solve(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const WalkParams& p);

/// Distinct nodes visited by p.walkers walks of p.max_steps moves from origin
/// (no destination; walks stop only at dead ends).
std::size_t walk_coverage(const RoadGraph& g, NodeIndex origin, const WalkParams& p);

}  // namespace rfd
