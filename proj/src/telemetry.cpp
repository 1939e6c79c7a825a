#include "rfd/telemetry.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "rfd/errors.hpp"

namespace rfd {

namespace {

template <typename T>
void append_number(std::string& out, T value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), end);
}

template <typename T>
T parse_number(std::string_view field, const char* name) {
  T value{};
  if (field.empty()) throw MalformedRecord(std::string("empty ") + name);
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size())
    throw MalformedRecord(std::string("bad ") + name + " '" + std::string(field) + "'");
  return value;
}

std::int64_t window_start(std::int64_t t, std::int64_t w) { return (t / w) * w; }

}  // namespace

std::string encode_reading(const SensorReading& r) {
  std::string out = "v1,";
  out += r.unit;
  out += ',';
  append_number(out, r.timestamp_ms);
  out += ',';
  append_number(out, r.vehicle_count);
  out += ',';
  append_number(out, r.mean_speed_mps);
  return out;
}

SensorReading decode_reading(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, 5> fields;
  std::size_t n = 0;
  while (true) {
    const auto comma = line.find(',');
    if (n == fields.size()) throw MalformedRecord("too many fields");
    fields[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (n != fields.size()) throw MalformedRecord("expected 5 fields, got " + std::to_string(n));
  if (fields[0] != "v1") throw MalformedRecord("unknown version '" + std::string(fields[0]) + "'");
  if (fields[1].empty()) throw MalformedRecord("empty unit id");

  SensorReading r;
  r.unit = std::string(fields[1]);
  r.timestamp_ms = parse_number<std::int64_t>(fields[2], "timestamp");
  r.vehicle_count = parse_number<std::int64_t>(fields[3], "vehicle count");
  r.mean_speed_mps = parse_number<double>(fields[4], "mean speed");
  if (r.timestamp_ms < 0) throw MalformedRecord("negative timestamp");
  if (r.vehicle_count < 0) throw MalformedRecord("negative vehicle count");
  if (!std::isfinite(r.mean_speed_mps) || r.mean_speed_mps < 0.0) throw MalformedRecord("mean speed out of range");
  return r;
}

// ---- agents -----------------------------------------------------------------

RoadAgent::RoadAgent(std::string id, std::int64_t window_ms) : id_(std::move(id)), window_ms_(window_ms) {
  if (window_ms_ <= 0) throw InfeasibleParams("window_ms must be positive");
}

std::vector<AgentReport> RoadAgent::push(const SensorReading& r) {
  const std::int64_t start = window_start(r.timestamp_ms, window_ms_);
  if (start < closed_below_) {
    ++stragglers_;
    return {};
  }
  auto& w = open_[{start, r.unit}];
  w.sum += r.vehicle_count;
  ++w.n;
  ++accepted_;
  watermark_ = std::max(watermark_, r.timestamp_ms);
  return close_before(window_start(watermark_, window_ms_) - window_ms_);
}

std::vector<AgentReport> RoadAgent::flush() {
  if (open_.empty()) return {};
  return close_before(open_.rbegin()->first.first + window_ms_);
}

std::vector<AgentReport> RoadAgent::close_before(std::int64_t bound) {
  std::vector<AgentReport> out;
  if (bound <= closed_below_) return out;
  closed_below_ = bound;
  auto it = open_.begin();
  while (it != open_.end() && it->first.first < bound) {
    const auto& [key, w] = *it;
    out.push_back({id_, key.second, key.first, key.first + window_ms_,
                   static_cast<double>(w.sum) / static_cast<double>(w.n), w.n});
    it = open_.erase(it);
  }
  return out;
}

std::vector<AgentReport> agent_aggregate(const std::vector<SensorReading>& readings, std::int64_t window_ms,
                                         std::size_t* stragglers) {
  RoadAgent agent("agent", window_ms);
  std::vector<AgentReport> out;
  for (const auto& r : readings) {
    auto closed = agent.push(r);
    out.insert(out.end(), closed.begin(), closed.end());
  }
  auto rest = agent.flush();
  out.insert(out.end(), rest.begin(), rest.end());
  if (stragglers) *stragglers = agent.stragglers();
  return out;
}

// ---- server -----------------------------------------------------------------

CongestionServer::CongestionServer(const RoadGraph& g, std::vector<UnitGeometry> units, double jam_density)
    : units_(std::move(units)), jam_density_(jam_density) {
  if (units_.size() != g.edge_count()) throw ValidationError("unit geometry count does not match edges");
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) unit_index_.emplace(g.unit_id(e), e);
  latest_end_.assign(g.edge_count(), -1);
  chi_.assign(g.edge_count(), 0.0);
}

void CongestionServer::ingest(const AgentReport& report) {
  const auto found = unit_index_.find(report.unit);
  if (found == unit_index_.end()) {
    ++unknown_;
    return;
  }
  const EdgeIndex e = found->second;
  as_of_ = std::max(as_of_, report.window_end_ms);
  if (report.window_end_ms < latest_end_[e]) return;
  latest_end_[e] = report.window_end_ms;
  const auto count = static_cast<std::size_t>(std::llround(report.mean_count));
  chi_[e] = congestion_index(count, units_[e], jam_density_);
}

CongestionMap CongestionServer::map() const {
  CongestionMap m;
  m.chi = chi_;
  m.stale.resize(chi_.size());
  for (std::size_t e = 0; e < chi_.size(); ++e) m.stale[e] = latest_end_[e] < 0;
  m.as_of_ms = as_of_;
  return m;
}

CongestionMap server_ingest(const std::vector<AgentReport>& reports, const RoadGraph& g,
                            const std::vector<UnitGeometry>& units, double jam_density, std::size_t* unknown) {
  CongestionServer server(g, units, jam_density);
  for (const auto& r : reports) server.ingest(r);
  if (unknown) *unknown = server.unknown_units();
  return server.map();
}

// ---- pipeline ---------------------------------------------------------------

TelemetryPipeline::TelemetryPipeline(const RoadGraph& g, std::vector<UnitGeometry> units, double jam_density,
                                     std::int64_t window_ms)
    : window_ms_(window_ms), server_(g, std::move(units), jam_density) {
  if (window_ms_ <= 0) throw InfeasibleParams("window_ms must be positive");
}

void TelemetryPipeline::push_line(std::string_view line) {
  SensorReading r;
  try {
    r = decode_reading(line);
  } catch (const MalformedRecord&) {
    ++malformed_;
    return;
  }
  push(r);
}

void TelemetryPipeline::push(const SensorReading& r) {
  ++parsed_;
  // The agent at the crossing a unit feeds into.
  const auto sep = r.unit.rfind('>');
  const std::string crossing = sep == std::string::npos ? r.unit : r.unit.substr(sep + 1);
  auto it = agents_.try_emplace(crossing, crossing, window_ms_).first;
  forward(it->second.push(r));
}

void TelemetryPipeline::finish() {
  for (auto& [id, agent] : agents_) forward(agent.flush());
}

void TelemetryPipeline::forward(std::vector<AgentReport> reports) {
  for (auto& r : reports) {
    server_.ingest(r);
    reports_.push_back(std::move(r));
  }
}

TelemetryCounters TelemetryPipeline::counters() const {
  TelemetryCounters c;
  c.parsed = parsed_;
  c.malformed = malformed_;
  for (const auto& [id, agent] : agents_) c.stragglers += agent.stragglers();
  c.unknown_unit = server_.unknown_units();
  return c;
}

}  // namespace rfd
