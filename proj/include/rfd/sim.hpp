#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfd/baselines.hpp"
#include "rfd/graph.hpp"
#include "rfd/river.hpp"
#include "rfd/traffic.hpp"

namespace rfd {

// ---- network ----------------------------------------------------------------

struct SignalSpec {
  double cycle_s = 60.0;
  double lost_s = 0.0;
  std::optional<double> min_green_s;  ///< falls back to SimConfig::min_green_s

  friend bool operator==(const SignalSpec&, const SignalSpec&) = default;
};

/// Road network: graph plus per-unit geometry and optional signal timing per
/// intersection. Graph edge costs are the free-flow times unless the file
/// gives explicit costs.
struct Network {
  RoadGraph graph;
  std::vector<UnitGeometry> units;               ///< per edge index
  std::vector<std::optional<SignalSpec>> signals; ///< per node index

  friend bool operator==(const Network&, const Network&) = default;
};

/// Graph document whose edges add "lengthM", "lanes" and "freeFlowTimeS" and
/// whose nodes may add "cycleS", "lostTimeS" and "minGreenS". An edge without
/// "cost" costs its free-flow time. Throws ParseError / ValidationError.
Network network_from_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const Network& net);
Network load_network(std::istream& in);
Network load_network_file(const std::string& path);

/// rows x cols grid, nodes "r<i>c<j>", a two-way unit between 4-neighbors,
/// every intersection signalized.
Network grid_network(int rows, int cols, UnitGeometry unit, SignalSpec signal);

// ---- scenario ---------------------------------------------------------------

enum class RouterKind { rfd, aco, dijkstra, fixed };

std::string_view to_string(RouterKind r);
RouterKind parse_router(std::string_view name);

struct SpawnFlow {
  NodeIndex origin = 0;
  NodeIndex dest = 0;
  double rate = 0.0;  ///< vehicles per second, Poisson
  double start_s = 0.0;
  double end_s = std::numeric_limits<double>::infinity();
};

struct LaneEvent {
  double at_s = 0.0;
  EdgeIndex unit = 0;
  int lanes = 1;
};

struct SimConfig {
  double duration_s = 3600.0;
  double step_s = 1.0;
  double reroute_every_s = 30.0;
  double jam_density = 0.15;
  double delay_alpha = 4.0;
  double delay_beta = 4.0;
  double saturation_flow = 0.5;  ///< vehicles per second per lane at full green
  double min_green_s = 7.0;
  std::int64_t telemetry_window_ms = 5000;
  std::vector<SpawnFlow> spawns;
  std::vector<LaneEvent> lane_events;  ///< applied in at_s order
  RouterKind router = RouterKind::rfd;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  RfdParams rfd;
  AcoParams aco;

  /// Throws InfeasibleParams / InfeasibleCycle / Unreachable.
  void validate(const Network& net) const;
};

/// Scenario document: camelCase SimConfig fields, "spawns" as
/// [{origin, dest, rate, startS?, endS?}], "laneEvents" as [{atS, unit, lanes}]
/// with unit "from>to", and optional "rfd" / "aco" parameter objects.
/// Unknown keys are rejected.
SimConfig scenario_from_json(const nlohmann::json& doc, const Network& net);
SimConfig load_scenario_file(const std::string& path, const Network& net);
nlohmann::json scenario_to_json(const SimConfig& cfg, const Network& net);

// ---- state ------------------------------------------------------------------

struct Vehicle {
  std::size_t id = 0;
  NodeIndex origin = 0;
  NodeIndex dest = 0;
  /// Full route from origin; route[leg] -> route[leg+1] is the current unit.
  std::vector<NodeIndex> route;
  std::size_t leg = 0;
  bool entered = false;   ///< left the origin entry queue
  bool queued = false;    ///< at the end of its unit, waiting to cross
  double remaining_s = 0.0;
  double spawned_at_s = 0.0;
  std::optional<double> arrived_at_s;
  std::size_t reroutes = 0;

  EdgeIndex unit(const RoadGraph& g) const { return *g.find_edge(route[leg], route[leg + 1]); }
};

struct SimState {
  std::size_t tick = 0;
  double time_s = 0.0;
  std::vector<Vehicle> vehicles;  ///< indexed by id
  std::vector<std::size_t> count;             ///< vehicles on each unit
  std::vector<std::deque<std::size_t>> queue; ///< per unit, FIFO at its downstream end
  std::vector<std::deque<std::size_t>> entry; ///< per node, spawned but not yet on a unit
  std::vector<double> credit;                 ///< per unit discharge credit
  std::vector<int> lanes;                     ///< current lanes per unit
  std::vector<double> chi;
  std::vector<double> travel_s;
  std::vector<SignalPlan> signals;
  std::vector<int> signal_of;                 ///< per node, index into signals or -1
  std::size_t next_lane_event = 0;
  std::size_t spawned = 0;
  std::size_t arrived = 0;
  std::size_t reroute_rounds = 0;
  std::size_t router_failures = 0;
  std::size_t switches = 0;
  /// Unit costs routers see: free-flow times at start, refreshed from
  /// travel_s at each reroute round. Routes are cached per snapshot.
  std::vector<double> route_costs;
  std::map<std::pair<NodeIndex, NodeIndex>, std::optional<PathResult>> routes;

  std::size_t in_network() const { return spawned - arrived; }
  std::size_t capacity(const Network& net, const SimConfig& cfg, EdgeIndex e) const;
};

SimState initial_state(const Network& net, const SimConfig& cfg);

/// One step_s tick: lane events, Poisson spawns, unit traversal, signal-gated
/// discharge, origin entry, signal re-splits once per cycle, then chi and
/// travel times. Checks the invariants before returning.
void sim_step(SimState& s, const Network& net, const SimConfig& cfg);

struct RerouteReport {
  std::size_t considered = 0;
  std::size_t switched = 0;
  std::size_t failures = 0;
};

/// Routes every vehicle still travelling from its next intersection (origin if
/// not yet entered) with cfg.router on the current travel times, and switches
/// only to a strictly cheaper remaining route. Router failures keep the old
/// route. Identity for RouterKind::fixed.
RerouteReport reroute(SimState& s, const Network& net, const SimConfig& cfg);

/// Path under cfg.router on the state's cost snapshot (cached); nullopt when
/// the router fails.
const std::optional<PathResult>& plan_route(SimState& s, const Network& net, const SimConfig& cfg,
                                            NodeIndex from, NodeIndex to);

// ---- metrics ----------------------------------------------------------------

struct NetworkSample {
  double time_s = 0.0;
  double mean_chi = 0.0;
  std::size_t vehicles = 0;
};

struct ScenarioResult {
  std::vector<Vehicle> vehicles;
  std::vector<NetworkSample> network;
  std::size_t reroute_rounds = 0;
  std::size_t router_failures = 0;
  std::size_t switches = 0;

  std::size_t arrived() const;
  /// Mean travelS over arrived vehicles; 0 when none arrived.
  double mean_travel_s() const;
};

using StepObserver = std::function<void(const SimState&)>;

/// Runs duration_s / step_s ticks, rerouting every reroute_every_s. The
/// observer sees the state after each tick.
ScenarioResult run_scenario(const Network& net, const SimConfig& cfg, const StepObserver& observer = {});

void write_vehicles_csv(const ScenarioResult& r, std::ostream& out);
void write_network_csv(const ScenarioResult& r, std::ostream& out);

}  // namespace rfd
