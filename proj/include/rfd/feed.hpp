#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rfd/sim.hpp"
#include "rfd/telemetry.hpp"

namespace rfd {

/// Simulated sensors: one reading per unit per simulator tick. Also keeps the
/// ground truth the server should reconstruct, computed straight from the
/// simulator's counts without going through the wire format or the agents.
class SensorFeed {
 public:
  SensorFeed(const Network& net, const SimConfig& cfg);

  /// Readings for the state's current tick, in edge order.
  std::vector<SensorReading> sample(const SimState& s);

  /// Expected chi per unit for every window seen so far, by window start.
  std::map<std::int64_t, std::vector<double>> truth() const;

 private:
  struct Sum {
    std::int64_t total = 0;
    std::int64_t n = 0;
  };
  const Network* net_;
  double jam_density_;
  std::int64_t window_ms_;
  std::map<std::int64_t, std::vector<Sum>> sums_;
};

struct PipelineCheck {
  std::size_t windows = 0;
  std::optional<std::string> mismatch;  ///< first difference, if any

  bool ok() const { return !mismatch; }
};

/// Replays the agents' reports window by window into a fresh server and
/// compares the map after each window with the feed's ground truth, exactly.
PipelineCheck check_pipeline(const Network& net, double jam_density, const std::vector<AgentReport>& reports,
                             const SensorFeed& feed);

}  // namespace rfd
