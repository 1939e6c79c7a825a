#include "rfd/feed.hpp"

#include <cmath>

namespace rfd {

SensorFeed::SensorFeed(const Network& net, const SimConfig& cfg)
    : net_(&net), jam_density_(cfg.jam_density), window_ms_(cfg.telemetry_window_ms) {}

std::vector<SensorReading> SensorFeed::sample(const SimState& s) {
  const auto& g = net_->graph;
  const auto t_ms = static_cast<std::int64_t>(std::llround(s.time_s * 1000.0));
  auto& window = sums_[(t_ms / window_ms_) * window_ms_];
  window.resize(g.edge_count());
  std::vector<SensorReading> out;
  out.reserve(g.edge_count());
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) {
    const auto count = static_cast<std::int64_t>(s.count[e]);
    window[e].total += count;
    ++window[e].n;
    out.push_back({g.unit_id(e), t_ms, count, net_->units[e].length_m / s.travel_s[e]});
  }
  return out;
}

std::map<std::int64_t, std::vector<double>> SensorFeed::truth() const {
  std::map<std::int64_t, std::vector<double>> out;
  for (const auto& [start, units] : sums_) {
    auto& chi = out[start];
    chi.resize(units.size());
    for (std::size_t e = 0; e < units.size(); ++e) {
      const double mean = static_cast<double>(units[e].total) / static_cast<double>(units[e].n);
      chi[e] = congestion_index(static_cast<std::size_t>(std::llround(mean)), net_->units[e], jam_density_);
    }
  }
  return out;
}

PipelineCheck check_pipeline(const Network& net, double jam_density, const std::vector<AgentReport>& reports,
                             const SensorFeed& feed) {
  std::map<std::int64_t, std::vector<const AgentReport*>> by_window;
  for (const auto& r : reports) by_window[r.window_start_ms].push_back(&r);

  PipelineCheck check;
  CongestionServer server(net.graph, net.units, jam_density);
  const auto truth = feed.truth();
  if (by_window.size() != truth.size()) {
    check.mismatch = "pipeline closed " + std::to_string(by_window.size()) + " windows, ground truth has " +
                     std::to_string(truth.size());
    return check;
  }
  for (const auto& [start, expected] : truth) {
    const auto found = by_window.find(start);
    if (found == by_window.end()) {
      check.mismatch = "no reports for window starting at " + std::to_string(start) + " ms";
      return check;
    }
    for (const AgentReport* r : found->second) server.ingest(*r);
    const auto map = server.map();
    ++check.windows;
    for (EdgeIndex e = 0; e < expected.size(); ++e) {
      if (map.chi[e] != expected[e] || map.stale[e]) {
        check.mismatch = "window " + std::to_string(start) + " ms, unit " + net.graph.unit_id(e) + ": pipeline chi " +
                         format_number(map.chi[e]) + ", ground truth " + format_number(expected[e]);
        return check;
      }
    }
  }
  return check;
}

}  // namespace rfd
