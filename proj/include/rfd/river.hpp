#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rfd/graph.hpp"
#include "rfd/random.hpp"

namespace rfd {

/// How a drop's passage reshapes the landscape.
enum class ErosionLaw {
  /// Every move erodes the departed node by erosion_rate * move weight, from
  /// every drop; contributions are summed at the barrier.
  gradient,
  /// Only drops that reach the destination reshape the terrain. Each move
  /// (i -> j) of such a drop removes erosion_rate times the part of the
  /// altitude drop exceeding the drop's mean slope over that edge, and
  /// deposits where the fall is gentler than the mean. A node's update is
  /// the mean of the contributions it received in the iteration. Rivers
  /// relax toward a uniform slope from origin to destination, so a cheaper
  /// route is steeper.
  graded,
};

/// Free parameters of the river formation dynamics solver.
struct RfdParams {
  ErosionLaw erosion_law = ErosionLaw::graded;
  double initial_altitude = 100.0;
  double erosion_rate = 0.5;
  double flat_weight = 2.0;
  double deposit_rate = 1.0;
  std::size_t drops_per_iteration = 32;
  std::size_t max_steps = 0;  ///< per-drop move cap; 0 selects 4*|V|
  std::size_t max_iterations = 1000;
  std::size_t stable_path_iterations = 10;
  double min_altitude = 1e-6;
  double flat_tolerance = 1e-9;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  /// Throws InfeasibleParams when a bound is violated.
  void validate() const;
  std::size_t step_cap(const RoadGraph& g) const { return max_steps ? max_steps : 4 * g.node_count(); }
};

struct ErosionDelta {
  NodeIndex node = 0;
  double delta = 0.0;  ///< negative erodes, positive deposits
};

/// Per-node altitude field. The destination is a hole pinned at zero; every
/// other node stays within [min_altitude, initial_altitude] after each barrier.
class Landscape {
 public:
  Landscape(std::vector<double> altitude, NodeIndex destination);

  double altitude(NodeIndex v) const { return altitude_[v]; }
  std::span<const double> altitudes() const { return altitude_; }
  NodeIndex destination() const { return destination_; }
  std::size_t size() const { return altitude_.size(); }

  /// Adds deltas in the given order, then clamps every non-destination node
  /// into [min_altitude, initial_altitude] and re-pins the hole.
  void apply(std::span<const ErosionDelta> deltas, const RfdParams& p);

  /// Direct write for tests and instrumentation; clamped like apply().
  void set_altitude(NodeIndex v, double value, const RfdParams& p);

  friend bool operator==(const Landscape&, const Landscape&) = default;

 private:
  std::vector<double> altitude_;
  NodeIndex destination_ = 0;
};

enum class DropFate {
  moving,
  completed,  ///< fell into the destination
  blocked,    ///< every neighbor strictly higher; deposited and died
  exhausted,  ///< hit the step cap
  stranded,   ///< node without outgoing edges
};

struct Drop {
  NodeIndex at = 0;
  std::vector<NodeIndex> path;
  DropFate fate = DropFate::moving;

  explicit Drop(NodeIndex origin) : at(origin), path{origin} {}
  bool alive() const { return fate == DropFate::moving; }
};

struct TransitionWeight {
  EdgeIndex edge = 0;
  NodeIndex target = 0;
  double weight = 0.0;
};

Landscape init_landscape(const RoadGraph& g, NodeIndex destination, const RfdParams& p);

/// Movement weights out of d.at: gradient for downhill edges, flat_weight/cost
/// for level edges, zero uphill. The edge back to the previous node is zeroed
/// unless it is the only positive one.
std::vector<TransitionWeight> transition_weights(const RoadGraph& g, const Landscape& land,
                                                 const Drop& d, const RfdParams& p);

/// One move of a live drop. Appends the move's erosion (gradient law only) or
/// the sediment deposit of a blocked drop to `deltas`; the landscape itself is
/// not modified.
void advance_drop(const RoadGraph& g, const Landscape& land, Drop& d, Rng& rng, const RfdParams& p,
                  std::vector<ErosionDelta>& deltas);

/// Sediment a blocked drop leaves at `node`: deposit_rate times the gap to the
/// lowest outgoing neighbor. Throws NotBlocked if the node is not a blind alley.
ErosionDelta deposit_sediment(const RoadGraph& g, const Landscape& land, NodeIndex node,
                              const RfdParams& p);

/// Graded-law contributions of a drop that reached the destination, one per
/// move, in path order.
std::vector<ErosionDelta> settle_drop(const RoadGraph& g, const Landscape& land, const Drop& d,
                                      const RfdParams& p);

struct DepositEvent {
  NodeIndex node = 0;
  double lowest_neighbor = 0.0;  ///< lowest outgoing neighbor in the snapshot
  double delta = 0.0;
};

struct IterationReport {
  std::size_t launched = 0;
  std::size_t completed = 0;
  std::size_t blocked = 0;
  std::size_t exhausted = 0;
  std::size_t stranded = 0;
  std::vector<DepositEvent> deposits;
};

/// Launches drops_per_iteration drops at origin against the current landscape
/// and applies all their deltas at one barrier, reduced in (drop, emission)
/// order. A node filled by several blocked drops is filled once. Drops may run
/// on p.workers threads; the result does not depend on it.
IterationReport run_iteration(const RoadGraph& g, Landscape& land, NodeIndex origin,
                              const RfdParams& p, std::size_t iteration);

/// Greedy steepest descent from origin. Throws NoDescent when a node on the
/// walk has no strictly downhill edge.
PathResult extract_steepest_path(const RoadGraph& g, const Landscape& land, NodeIndex origin);

struct SolveStats {
  std::size_t iterations = 0;
  std::size_t drops = 0;
  std::size_t completions = 0;
  std::size_t deposits = 0;
  std::size_t exhausted = 0;
  bool converged = false;

  friend bool operator==(const SolveStats&, const SolveStats&) = default;
};

struct RfdSolution {
  PathResult path;
  SolveStats stats;
  Landscape landscape;
};

using IterationObserver =
    std::function<void(std::size_t iteration, const Landscape&, const IterationReport&)>;

/// Iterates until the steepest path is identical for stable_path_iterations
/// consecutive iterations or max_iterations is reached, and returns the last
/// successfully extracted path. Throws Unreachable (checked up front) or
/// NotConverged when no extraction ever succeeded.
RfdSolution solve_rfd(const RoadGraph& g, NodeIndex origin, NodeIndex dest, const RfdParams& p,
                      const IterationObserver& observer = {});

/// One "nodeId,altitude" line per node.
void dump_landscape(const RoadGraph& g, const Landscape& land, std::ostream& out);

}  // namespace rfd
