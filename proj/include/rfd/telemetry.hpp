#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rfd/graph.hpp"
#include "rfd/traffic.hpp"

namespace rfd {

struct SensorReading {
  std::string unit;  ///< "from>to"
  std::int64_t timestamp_ms = 0;
  std::int64_t vehicle_count = 0;
  double mean_speed_mps = 0.0;

  friend bool operator==(const SensorReading&, const SensorReading&) = default;
};

/// "v1,<unit>,<timestampMs>,<vehicleCount>,<meanSpeedMps>" without the newline.
/// Doubles use the shortest representation that reads back exactly.
std::string encode_reading(const SensorReading& r);

/// Inverse of encode_reading; a trailing "\n" or "\r\n" is accepted. Throws
/// MalformedRecord on a wrong version, field count, number syntax or range.
SensorReading decode_reading(std::string_view line);

struct AgentReport {
  std::string agent;
  std::string unit;
  std::int64_t window_start_ms = 0;
  std::int64_t window_end_ms = 0;
  double mean_count = 0.0;
  std::size_t readings = 0;

  friend bool operator==(const AgentReport&, const AgentReport&) = default;
};

/// Road agent: tumbling windows [k*W, (k+1)*W) per unit. Window k closes once
/// a reading at or after (k+2)*W arrives, so out-of-order readings up to one
/// window late are still counted; older ones are stragglers.
class RoadAgent {
 public:
  RoadAgent(std::string id, std::int64_t window_ms);

  /// Returns the reports of the windows this reading closed, ordered by
  /// (window start, unit).
  std::vector<AgentReport> push(const SensorReading& r);
  /// Closes every open window.
  std::vector<AgentReport> flush();

  std::size_t accepted() const { return accepted_; }
  std::size_t stragglers() const { return stragglers_; }
  const std::string& id() const { return id_; }

 private:
  struct Window {
    std::int64_t sum = 0;
    std::size_t n = 0;
  };
  std::vector<AgentReport> close_before(std::int64_t window_start);

  std::string id_;
  std::int64_t window_ms_;
  std::int64_t watermark_ = -1;
  std::int64_t closed_below_ = 0;  ///< every window starting before this is closed
  std::map<std::pair<std::int64_t, std::string>, Window> open_;
  std::size_t accepted_ = 0;
  std::size_t stragglers_ = 0;
};

std::vector<AgentReport> agent_aggregate(const std::vector<SensorReading>& readings, std::int64_t window_ms,
                                         std::size_t* stragglers = nullptr);

struct CongestionMap {
  std::vector<double> chi;       ///< per edge index
  std::vector<bool> stale;       ///< no report seen for the unit
  std::int64_t as_of_ms = 0;     ///< max window end seen

  friend bool operator==(const CongestionMap&, const CongestionMap&) = default;
};

/// Central server: keeps the latest window per unit and turns its rounded mean
/// count into chi.
class CongestionServer {
 public:
  CongestionServer(const RoadGraph& g, std::vector<UnitGeometry> units, double jam_density);

  void ingest(const AgentReport& report);
  CongestionMap map() const;

  std::size_t unknown_units() const { return unknown_; }

 private:
  std::vector<UnitGeometry> units_;
  double jam_density_;
  std::unordered_map<std::string, EdgeIndex> unit_index_;
  std::vector<std::int64_t> latest_end_;
  std::vector<double> chi_;
  std::int64_t as_of_ = 0;
  std::size_t unknown_ = 0;
};

CongestionMap server_ingest(const std::vector<AgentReport>& reports, const RoadGraph& g,
                            const std::vector<UnitGeometry>& units, double jam_density,
                            std::size_t* unknown = nullptr);

struct TelemetryCounters {
  std::size_t parsed = 0;
  std::size_t malformed = 0;
  std::size_t stragglers = 0;
  std::size_t unknown_unit = 0;

  friend bool operator==(const TelemetryCounters&, const TelemetryCounters&) = default;
};

/// Line stream -> decode -> one agent per crossing (the unit's downstream
/// node) -> server. Reports reach the server as agents close windows.
class TelemetryPipeline {
 public:
  TelemetryPipeline(const RoadGraph& g, std::vector<UnitGeometry> units, double jam_density,
                    std::int64_t window_ms);

  void push_line(std::string_view line);
  void push(const SensorReading& r);
  /// End of stream: closes all windows and forwards them.
  void finish();

  const CongestionServer& server() const { return server_; }
  CongestionMap map() const { return server_.map(); }
  TelemetryCounters counters() const;
  /// Every report forwarded so far, in forwarding order.
  const std::vector<AgentReport>& reports() const { return reports_; }

 private:
  void forward(std::vector<AgentReport> reports);

  std::int64_t window_ms_;
  CongestionServer server_;
  std::map<std::string, RoadAgent> agents_;
  std::vector<AgentReport> reports_;
  std::size_t parsed_ = 0;
  std::size_t malformed_ = 0;
};

}  // namespace rfd
