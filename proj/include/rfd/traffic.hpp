#pragma once

#include <cstddef>
#include <vector>

#include "rfd/graph.hpp"

namespace rfd {

/// Static geometry of one road unit (directed edge).
struct UnitGeometry {
  double length_m = 0.0;
  int lanes = 1;
  double free_flow_s = 0.0;

  friend bool operator==(const UnitGeometry&, const UnitGeometry&) = default;
};

/// ceil(jam_density * length * lanes), guarded against representation error
/// (0.15 * 100 * 2 is 30.000000000000004 in binary).
std::size_t jam_capacity(const UnitGeometry& u, double jam_density);

/// chi = min(1, vehicles / (length * lanes) / jam_density), in [0, 1].
double congestion_index(std::size_t vehicles, const UnitGeometry& u, double jam_density);

/// BPR-shaped delay: free_flow * (1 + alpha * chi^beta).
double travel_time(const UnitGeometry& u, double chi, double alpha, double beta);

/// Green time per approach at one intersection.
struct SignalPlan {
  NodeIndex intersection = 0;
  double cycle_s = 60.0;
  double lost_s = 0.0;
  std::vector<double> green_s;  ///< one per approach (in-edge), in in_edges order
};

/// Splits cycle - lost proportionally to queue lengths (equal split when all
/// queues are empty), then raises short greens to min_green and rescales the
/// rest among the unfloored approaches. The last unfloored approach absorbs
/// rounding so the greens sum to cycle - lost. Throws InfeasibleCycle when
/// cycle - lost < min_green * approaches.
SignalPlan adjust_signal_splits(const SignalPlan& plan, const std::vector<std::size_t>& queues,
                                double min_green);

}  // namespace rfd
