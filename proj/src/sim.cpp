#include "rfd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "rfd/errors.hpp"
#include "rfd/parallel.hpp"
#include "rfd/params.hpp"
#include "rfd/random.hpp"

namespace rfd {

using nlohmann::json;

namespace {

double number_field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) throw ParseError(where + ": missing number '" + key + "'");
  return it->get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (!it->is_number()) throw ParseError(where + ": '" + key + "' must be a number");
  return it->get<double>();
}

std::size_t ticks_of(double seconds, double step) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / step)));
}

}  // namespace

// ---- network ----------------------------------------------------------------

Network network_from_json(const json& doc) {
  Network net;
  try {
    if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array())
      throw ParseError("network document needs an 'edges' array");
    json graph_doc = doc;
    for (auto& e : graph_doc["edges"]) {
      if (!e.is_object()) throw ParseError("edge entries must be objects");
      if (!e.contains("cost") && e.contains("freeFlowTimeS")) e["cost"] = e["freeFlowTimeS"];
    }
    net.graph = graph_from_json(graph_doc);

    net.units.resize(net.graph.edge_count());
    for (const auto& e : doc["edges"]) {
      const std::string where = "edge " + e.value("from", std::string{}) + ">" + e.value("to", std::string{});
      const auto idx = net.graph.find_edge(net.graph.index(e["from"].get<std::string>()),
                                           net.graph.index(e["to"].get<std::string>()));
      UnitGeometry u;
      u.length_m = number_field(e, "lengthM", where);
      const double lanes = number_field(e, "lanes", where);
      u.free_flow_s = number_field(e, "freeFlowTimeS", where);
      if (!(u.length_m > 0.0) || !std::isfinite(u.length_m)) throw ValidationError(where + ": lengthM must be positive");
      if (!(lanes >= 1.0) || lanes != std::floor(lanes) || lanes > 64)
        throw ValidationError(where + ": lanes must be an integer in [1, 64]");
      if (!(u.free_flow_s > 0.0) || !std::isfinite(u.free_flow_s))
        throw ValidationError(where + ": freeFlowTimeS must be positive");
      u.lanes = static_cast<int>(lanes);
      net.units[*idx] = u;
    }

    net.signals.resize(net.graph.node_count());
    for (const auto& n : doc["nodes"]) {
      const std::string id = n["id"].get<std::string>();
      const std::string where = "node " + id;
      const auto cycle = optional_number(n, "cycleS", where);
      const auto lost = optional_number(n, "lostTimeS", where);
      const auto min_green = optional_number(n, "minGreenS", where);
      if (!cycle) {
        if (lost || min_green) throw ValidationError(where + ": lostTimeS/minGreenS need cycleS");
        continue;
      }
      SignalSpec s;
      s.cycle_s = *cycle;
      s.lost_s = lost.value_or(0.0);
      s.min_green_s = min_green;
      if (!(s.cycle_s > 0.0)) throw ValidationError(where + ": cycleS must be positive");
      if (!(s.lost_s >= 0.0 && s.lost_s < s.cycle_s)) throw ValidationError(where + ": lostTimeS must be in [0, cycleS)");
      if (s.min_green_s && !(*s.min_green_s >= 0.0)) throw ValidationError(where + ": minGreenS must be non-negative");
      net.signals[net.graph.index(id)] = s;
    }
  } catch (const json::exception& ex) {
    throw ParseError(ex.what());
  }
  return net;
}

json network_to_json(const Network& net) {
  json doc = graph_to_json(net.graph);
  for (NodeIndex v = 0; v < net.graph.node_count(); ++v) {
    if (!net.signals[v]) continue;
    auto& node = doc["nodes"][v];
    node["cycleS"] = net.signals[v]->cycle_s;
    node["lostTimeS"] = net.signals[v]->lost_s;
    if (net.signals[v]->min_green_s) node["minGreenS"] = *net.signals[v]->min_green_s;
  }
  for (EdgeIndex e = 0; e < net.graph.edge_count(); ++e) {
    auto& edge = doc["edges"][e];
    edge["lengthM"] = net.units[e].length_m;
    edge["lanes"] = net.units[e].lanes;
    edge["freeFlowTimeS"] = net.units[e].free_flow_s;
  }
  return doc;
}

Network load_network(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError(ex.what());
  }
  return network_from_json(doc);
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file '" + path + "'");
  return load_network(in);
}

Network grid_network(int rows, int cols, UnitGeometry unit, SignalSpec signal) {
  if (rows < 1 || cols < 1 || rows * cols < 2) throw InfeasibleParams("grid needs at least two nodes");
  auto name = [](int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); };
  std::vector<std::string> ids;
  std::vector<EdgeSpec> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      ids.push_back(name(r, c));
      const int dr[] = {-1, 0, 0, 1};
      const int dc[] = {0, -1, 1, 0};
      for (int k = 0; k < 4; ++k) {
        const int rr = r + dr[k], cc = c + dc[k];
        if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
        edges.push_back({name(r, c), name(rr, cc), unit.free_flow_s});
      }
    }
  Network net;
  net.graph = RoadGraph::build(ids, edges);
  net.units.assign(net.graph.edge_count(), unit);
  net.signals.assign(net.graph.node_count(), signal);
  return net;
}

// ---- scenario ---------------------------------------------------------------

std::string_view to_string(RouterKind r) {
  switch (r) {
    case RouterKind::rfd: return "rfd";
    case RouterKind::aco: return "aco";
    case RouterKind::dijkstra: return "dijkstra";
    case RouterKind::fixed: return "static";
  }
  return "?";
}

RouterKind parse_router(std::string_view name) {
  if (name == "rfd") return RouterKind::rfd;
  if (name == "aco") return RouterKind::aco;
  if (name == "dijkstra") return RouterKind::dijkstra;
  if (name == "static") return RouterKind::fixed;
  throw InfeasibleParams("router must be one of rfd, aco, dijkstra, static; got '" + std::string(name) + "'");
}

void SimConfig::validate(const Network& net) const {
  auto fail = [](const std::string& what) { throw InfeasibleParams("scenario: " + what); };
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) fail("durationS must be non-negative");
  if (!(step_s > 0.0) || !std::isfinite(step_s)) fail("stepS must be positive");
  if (!(reroute_every_s > 0.0)) fail("rerouteEveryS must be positive");
  if (!(jam_density > 0.0)) fail("jamDensity must be positive");
  if (!(delay_alpha >= 0.0) || !(delay_beta >= 0.0)) fail("delayAlpha and delayBeta must be non-negative");
  if (!(saturation_flow > 0.0)) fail("saturationFlow must be positive");
  if (!(min_green_s >= 0.0)) fail("minGreenS must be non-negative");
  if (telemetry_window_ms <= 0) fail("telemetryWindowMs must be positive");
  if (workers == 0) fail("workers must be positive");
  const auto& g = net.graph;
  for (const auto& f : spawns) {
    if (f.origin >= g.node_count() || f.dest >= g.node_count()) fail("spawn references an unknown node");
    if (f.origin == f.dest) fail("spawn origin equals dest (" + g.id(f.origin) + ")");
    if (!(f.rate >= 0.0) || !std::isfinite(f.rate)) fail("spawn rates must be finite and non-negative");
    if (!(f.start_s <= f.end_s)) fail("spawn startS must not exceed endS");
    if (!std::isfinite(distances_to(g, f.dest)[f.origin]))
      throw Unreachable("scenario: no route from " + g.id(f.origin) + " to " + g.id(f.dest));
  }
  for (const auto& ev : lane_events) {
    if (ev.unit >= g.edge_count()) fail("lane event references an unknown unit");
    if (ev.lanes < 1) fail("lane events must leave at least one lane");
    if (!(ev.at_s >= 0.0)) fail("lane event times must be non-negative");
  }
  for (std::size_t i = 1; i < lane_events.size(); ++i)
    if (lane_events[i].at_s < lane_events[i - 1].at_s) fail("lane events must be sorted by atS");
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const auto& sig = net.signals.at(v);
    if (!sig || g.in_edges(v).empty()) continue;
    const double min_green = sig->min_green_s.value_or(min_green_s);
    if (sig->cycle_s - sig->lost_s < min_green * static_cast<double>(g.in_edges(v).size()))
      throw InfeasibleCycle("signal at " + g.id(v) + ": cycle too short for " +
                            std::to_string(g.in_edges(v).size()) + " approaches at minimum green");
  }
  rfd.validate();
  aco.validate();
}

SimConfig scenario_from_json(const json& doc, const Network& net) {
  SimConfig cfg;
  const auto& g = net.graph;
  try {
    if (!doc.is_object()) throw ParseError("scenario must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
      auto num = [&] {
        if (!value.is_number()) throw ParseError("scenario: '" + key + "' must be a number");
        return value.get<double>();
      };
      auto count = [&] {
        if (!value.is_number_integer() && !value.is_number_unsigned())
          throw ParseError("scenario: '" + key + "' must be an integer");
        if (value.get<std::int64_t>() < 0) throw ParseError("scenario: '" + key + "' must be non-negative");
        return value.get<std::uint64_t>();
      };
      if (key == "durationS") cfg.duration_s = num();
      else if (key == "stepS") cfg.step_s = num();
      else if (key == "rerouteEveryS") cfg.reroute_every_s = num();
      else if (key == "jamDensity") cfg.jam_density = num();
      else if (key == "delayAlpha") cfg.delay_alpha = num();
      else if (key == "delayBeta") cfg.delay_beta = num();
      else if (key == "saturationFlow") cfg.saturation_flow = num();
      else if (key == "minGreenS") cfg.min_green_s = num();
      else if (key == "telemetryWindowMs") cfg.telemetry_window_ms = static_cast<std::int64_t>(count());
      else if (key == "seed") cfg.seed = count();
      else if (key == "workers") cfg.workers = count();
      else if (key == "router") cfg.router = parse_router(value.get<std::string>());
      else if (key == "rfd") apply_json(cfg.rfd, value, "rfd");
      else if (key == "aco") apply_json(cfg.aco, value, "aco");
      else if (key == "spawns") {
        for (const auto& s : value) {
          SpawnFlow f;
          f.origin = g.index(s.at("origin").get<std::string>());
          f.dest = g.index(s.at("dest").get<std::string>());
          f.rate = number_field(s, "rate", "spawn");
          f.start_s = optional_number(s, "startS", "spawn").value_or(0.0);
          f.end_s = optional_number(s, "endS", "spawn").value_or(std::numeric_limits<double>::infinity());
          for (const auto& [k, v] : s.items())
            if (k != "origin" && k != "dest" && k != "rate" && k != "startS" && k != "endS")
              throw ParseError("scenario: unknown spawn field '" + k + "'");
          cfg.spawns.push_back(f);
        }
      } else if (key == "laneEvents") {
        for (const auto& ev : value) {
          LaneEvent l;
          l.at_s = number_field(ev, "atS", "lane event");
          const auto unit = ev.at("unit").get<std::string>();
          const auto sep = unit.find('>');
          if (sep == std::string::npos) throw ParseError("scenario: lane event unit must be 'from>to'");
          const auto e = g.find_edge(g.index(unit.substr(0, sep)), g.index(unit.substr(sep + 1)));
          if (!e) throw ValidationError("scenario: no unit " + unit);
          l.unit = *e;
          const double lanes = number_field(ev, "lanes", "lane event");
          if (lanes != std::floor(lanes) || lanes < 1 || lanes > 64)
            throw ValidationError("scenario: lane event lanes must be an integer in [1, 64]");
          l.lanes = static_cast<int>(lanes);
          cfg.lane_events.push_back(l);
        }
        std::stable_sort(cfg.lane_events.begin(), cfg.lane_events.end(),
                         [](const LaneEvent& a, const LaneEvent& b) { return a.at_s < b.at_s; });
      } else {
        throw ParseError("scenario: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("scenario: ") + ex.what());
  }
  cfg.validate(net);
  return cfg;
}

SimConfig load_scenario_file(const std::string& path, const Network& net) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError(ex.what());
  }
  return scenario_from_json(doc, net);
}

json scenario_to_json(const SimConfig& cfg, const Network& net) {
  const auto& g = net.graph;
  json spawns = json::array();
  for (const auto& f : cfg.spawns) {
    json s = {{"origin", g.id(f.origin)}, {"dest", g.id(f.dest)}, {"rate", f.rate}, {"startS", f.start_s}};
    if (std::isfinite(f.end_s)) s["endS"] = f.end_s;
    spawns.push_back(s);
  }
  json events = json::array();
  for (const auto& ev : cfg.lane_events)
    events.push_back({{"atS", ev.at_s}, {"unit", g.unit_id(ev.unit)}, {"lanes", ev.lanes}});
  return {{"durationS", cfg.duration_s},
          {"stepS", cfg.step_s},
          {"rerouteEveryS", cfg.reroute_every_s},
          {"jamDensity", cfg.jam_density},
          {"delayAlpha", cfg.delay_alpha},
          {"delayBeta", cfg.delay_beta},
          {"saturationFlow", cfg.saturation_flow},
          {"minGreenS", cfg.min_green_s},
          {"telemetryWindowMs", cfg.telemetry_window_ms},
          {"router", to_string(cfg.router)},
          {"seed", cfg.seed},
          {"workers", cfg.workers},
          {"spawns", spawns},
          {"laneEvents", events},
          {"rfd", to_json(cfg.rfd)},
          {"aco", to_json(cfg.aco)}};
}

// ---- state ------------------------------------------------------------------

std::size_t SimState::capacity(const Network& net, const SimConfig& cfg, EdgeIndex e) const {
  UnitGeometry u = net.units[e];
  u.lanes = lanes[e];
  return jam_capacity(u, cfg.jam_density);
}

namespace {

void refresh_costs(SimState& s, const Network& net, const SimConfig& cfg) {
  for (EdgeIndex e = 0; e < net.graph.edge_count(); ++e) {
    UnitGeometry u = net.units[e];
    u.lanes = s.lanes[e];
    s.chi[e] = congestion_index(s.count[e], u, cfg.jam_density);
    s.travel_s[e] = travel_time(u, s.chi[e], cfg.delay_alpha, cfg.delay_beta);
  }
}

void take_snapshot(SimState& s, const Network& net, const SimConfig& cfg) {
  if (cfg.router == RouterKind::fixed) {
    s.route_costs.resize(net.units.size());
    for (std::size_t e = 0; e < net.units.size(); ++e) s.route_costs[e] = net.units[e].free_flow_s;
  } else {
    s.route_costs = s.travel_s;
  }
  s.routes.clear();
}

std::optional<PathResult> run_router(const RoadGraph& costed, const SimConfig& cfg, std::size_t round,
                                     NodeIndex from, NodeIndex to) {
  const std::uint64_t seed = stream_seed(cfg.seed, round, std::uint64_t{from} * costed.node_count() + to);
  try {
    switch (cfg.router) {
      case RouterKind::rfd: {
        RfdParams p = cfg.rfd;
        p.seed = seed;
        p.workers = 1;
        return solve_rfd(costed, from, to, p).path;
      }
      case RouterKind::aco: {
        AcoParams p = cfg.aco;
        p.seed = seed;
        p.workers = 1;
        return aco_solve(costed, from, to, p).path;
      }
      case RouterKind::dijkstra:
      case RouterKind::fixed:
        return dijkstra_shortest_path(costed, from, to);
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

void check_invariants(const SimState& s, const Network& net) {
  std::size_t placed = s.arrived;
  for (std::size_t c : s.count) placed += c;
  for (const auto& q : s.entry) placed += q.size();
  if (placed != s.spawned || s.vehicles.size() != s.spawned)
    throw InvariantBreach("vehicle conservation broken at t=" + format_number(s.time_s) + ": spawned " +
                            std::to_string(s.spawned) + ", placed " + std::to_string(placed));
  for (EdgeIndex e = 0; e < s.chi.size(); ++e) {
    if (!(s.chi[e] >= 0.0 && s.chi[e] <= 1.0)) throw InvariantBreach("chi out of [0,1] on " + net.graph.unit_id(e));
    if (s.travel_s[e] < net.units[e].free_flow_s)
      throw InvariantBreach("travel time below free flow on " + net.graph.unit_id(e));
  }
}

void admit(SimState& s, const Network& net, const SimConfig& cfg, Vehicle& v, EdgeIndex e) {
  if (s.count[e] >= s.capacity(net, cfg, e))
    throw InvariantBreach("admission beyond jam capacity on " + net.graph.unit_id(e));
  ++s.count[e];
  v.queued = false;
  v.remaining_s = s.travel_s[e];
}

}  // namespace

SimState initial_state(const Network& net, const SimConfig& cfg) {
  cfg.validate(net);
  const auto& g = net.graph;
  SimState s;
  s.count.assign(g.edge_count(), 0);
  s.queue.resize(g.edge_count());
  s.entry.resize(g.node_count());
  s.credit.assign(g.edge_count(), 0.0);
  s.lanes.resize(g.edge_count());
  for (EdgeIndex e = 0; e < g.edge_count(); ++e) s.lanes[e] = net.units[e].lanes;
  s.chi.assign(g.edge_count(), 0.0);
  s.travel_s.assign(g.edge_count(), 0.0);
  s.signal_of.assign(g.node_count(), -1);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const auto& sig = net.signals[v];
    const std::size_t approaches = g.in_edges(v).size();
    if (!sig || approaches == 0) continue;
    SignalPlan plan;
    plan.intersection = v;
    plan.cycle_s = sig->cycle_s;
    plan.lost_s = sig->lost_s;
    plan = adjust_signal_splits(plan, std::vector<std::size_t>(approaches, 0),
                                sig->min_green_s.value_or(cfg.min_green_s));
    s.signal_of[v] = static_cast<int>(s.signals.size());
    s.signals.push_back(std::move(plan));
  }
  refresh_costs(s, net, cfg);
  take_snapshot(s, net, cfg);
  return s;
}

const std::optional<PathResult>& plan_route(SimState& s, const Network& net, const SimConfig& cfg,
                                            NodeIndex from, NodeIndex to) {
  const auto key = std::make_pair(from, to);
  auto it = s.routes.find(key);
  if (it == s.routes.end()) {
    const RoadGraph costed = net.graph.with_costs(s.route_costs);
    it = s.routes.emplace(key, run_router(costed, cfg, s.reroute_rounds, from, to)).first;
  }
  return it->second;
}

void sim_step(SimState& s, const Network& net, const SimConfig& cfg) {
  const auto& g = net.graph;
  const double t = s.time_s;

  bool lanes_changed = false;
  while (s.next_lane_event < cfg.lane_events.size() && cfg.lane_events[s.next_lane_event].at_s <= t) {
    const auto& ev = cfg.lane_events[s.next_lane_event++];
    s.lanes[ev.unit] = ev.lanes;
    lanes_changed = true;
  }
  if (lanes_changed) refresh_costs(s, net, cfg);

  // Spawns.
  for (std::size_t f = 0; f < cfg.spawns.size(); ++f) {
    const auto& flow = cfg.spawns[f];
    if (!(flow.rate > 0.0) || t < flow.start_s || t >= flow.end_s) continue;
    Rng rng = make_rng(mix64(cfg.seed ^ 0x5350415753ULL), s.tick, f);
    const auto arrivals = std::poisson_distribution<std::size_t>(flow.rate * cfg.step_s)(rng);
    for (std::size_t k = 0; k < arrivals; ++k) {
      Vehicle v;
      v.id = s.vehicles.size();
      v.origin = flow.origin;
      v.dest = flow.dest;
      v.spawned_at_s = t;
      const auto& planned = plan_route(s, net, cfg, flow.origin, flow.dest);
      if (planned) {
        v.route = planned->nodes;
      } else {
        ++s.router_failures;
        v.route = dijkstra_shortest_path(g, flow.origin, flow.dest).nodes;
      }
      s.entry[flow.origin].push_back(v.id);
      s.vehicles.push_back(std::move(v));
      ++s.spawned;
    }
  }

  // Traversal.
  for (auto& v : s.vehicles) {
    if (!v.entered || v.arrived_at_s || v.queued) continue;
    v.remaining_s -= cfg.step_s;
    if (v.remaining_s > 1e-9) continue;
    v.remaining_s = 0.0;
    v.queued = true;
    s.queue[v.unit(g)].push_back(v.id);
  }

  // Discharge across intersections, gated by green share and downstream room.
  // Vehicles whose unit ends at their destination leave the network here.
  for (NodeIndex node = 0; node < g.node_count(); ++node) {
    const int sig = s.signal_of[node];
    const auto approaches = g.in_edges(node);
    for (std::size_t k = 0; k < approaches.size(); ++k) {
      const EdgeIndex e = approaches[k];
      double share = 1.0;
      if (sig >= 0) share = s.signals[sig].green_s[k] / s.signals[sig].cycle_s;
      const double rate = cfg.saturation_flow * s.lanes[e] * share * cfg.step_s;
      s.credit[e] = std::min(s.credit[e] + rate, std::max(1.0, rate));
      auto& q = s.queue[e];
      while (!q.empty() && s.credit[e] >= 1.0) {
        Vehicle& v = s.vehicles[q.front()];
        if (v.route[v.leg + 1] == v.dest) {
          q.pop_front();
          --s.count[e];
          v.queued = false;
          v.arrived_at_s = t + cfg.step_s;
          ++s.arrived;
        } else {
          const EdgeIndex next = *g.find_edge(v.route[v.leg + 1], v.route[v.leg + 2]);
          if (s.count[next] >= s.capacity(net, cfg, next)) break;
          q.pop_front();
          --s.count[e];
          ++v.leg;
          admit(s, net, cfg, v, next);
        }
        s.credit[e] -= 1.0;
      }
    }
  }

  // Origin entry.
  for (NodeIndex node = 0; node < g.node_count(); ++node) {
    auto& q = s.entry[node];
    while (!q.empty()) {
      Vehicle& v = s.vehicles[q.front()];
      const EdgeIndex first = *g.find_edge(v.route[0], v.route[1]);
      if (s.count[first] >= s.capacity(net, cfg, first)) break;
      q.pop_front();
      v.entered = true;
      v.leg = 0;
      admit(s, net, cfg, v, first);
    }
  }

  ++s.tick;
  s.time_s = static_cast<double>(s.tick) * cfg.step_s;

  for (auto& plan : s.signals) {
    if (s.tick % ticks_of(plan.cycle_s, cfg.step_s) != 0) continue;
    const auto approaches = g.in_edges(plan.intersection);
    std::vector<std::size_t> queues(approaches.size());
    for (std::size_t k = 0; k < approaches.size(); ++k) queues[k] = s.queue[approaches[k]].size();
    const auto& spec = *net.signals[plan.intersection];
    plan = adjust_signal_splits(plan, queues, spec.min_green_s.value_or(cfg.min_green_s));
  }

  refresh_costs(s, net, cfg);
  check_invariants(s, net);
}

RerouteReport reroute(SimState& s, const Network& net, const SimConfig& cfg) {
  RerouteReport report;
  if (cfg.router == RouterKind::fixed) return report;
  const auto& g = net.graph;
  ++s.reroute_rounds;
  take_snapshot(s, net, cfg);

  // Where each travelling vehicle would be routed from.
  struct Job {
    std::size_t vehicle;
    NodeIndex from;
  };
  std::vector<Job> jobs;
  std::set<std::pair<NodeIndex, NodeIndex>> wanted;
  for (const auto& v : s.vehicles) {
    if (v.arrived_at_s) continue;
    const NodeIndex from = v.entered ? v.route[v.leg + 1] : v.origin;
    if (from == v.dest) continue;
    jobs.push_back({v.id, from});
    wanted.emplace(from, v.dest);
  }

  const std::vector<std::pair<NodeIndex, NodeIndex>> queries(wanted.begin(), wanted.end());
  std::vector<std::optional<PathResult>> answers(queries.size());
  const RoadGraph costed = g.with_costs(s.route_costs);
  parallel_for(queries.size(), cfg.workers, [&](std::size_t i) {
    answers[i] = run_router(costed, cfg, s.reroute_rounds, queries[i].first, queries[i].second);
  });
  for (std::size_t i = 0; i < queries.size(); ++i) s.routes.emplace(queries[i], std::move(answers[i]));

  for (const auto& job : jobs) {
    Vehicle& v = s.vehicles[job.vehicle];
    ++report.considered;
    const auto& candidate = s.routes.at({job.from, v.dest});
    if (!candidate) {
      ++report.failures;
      ++s.router_failures;
      continue;
    }
    const std::size_t keep = v.entered ? v.leg + 1 : 0;  // nodes already committed
    double current = 0.0;
    for (std::size_t k = keep; k + 1 < v.route.size(); ++k)
      current += s.route_costs[*g.find_edge(v.route[k], v.route[k + 1])];
    if (!(candidate->total_cost < current - 1e-9)) continue;
    // A detour through a node already behind the vehicle would make the route revisit it.
    const bool revisits = std::any_of(v.route.begin(), v.route.begin() + static_cast<std::ptrdiff_t>(keep),
                                      [&](NodeIndex n) {
                                        return std::find(candidate->nodes.begin(), candidate->nodes.end(), n) !=
                                               candidate->nodes.end();
                                      });
    if (revisits) continue;
    std::vector<NodeIndex> route(v.route.begin(), v.route.begin() + static_cast<std::ptrdiff_t>(keep));
    route.insert(route.end(), candidate->nodes.begin(), candidate->nodes.end());
    v.route = std::move(route);
    ++v.reroutes;
    ++report.switched;
    ++s.switches;
  }
  return report;
}

// ---- scenario runs ----------------------------------------------------------

std::size_t ScenarioResult::arrived() const {
  return static_cast<std::size_t>(
      std::count_if(vehicles.begin(), vehicles.end(), [](const Vehicle& v) { return v.arrived_at_s.has_value(); }));
}

double ScenarioResult::mean_travel_s() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : vehicles) {
    if (!v.arrived_at_s) continue;
    sum += *v.arrived_at_s - v.spawned_at_s;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

ScenarioResult run_scenario(const Network& net, const SimConfig& cfg, const StepObserver& observer) {
  SimState s = initial_state(net, cfg);
  ScenarioResult result;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.duration_s / cfg.step_s));
  const std::size_t reroute_ticks = ticks_of(cfg.reroute_every_s, cfg.step_s);
  result.network.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    sim_step(s, net, cfg);
    if (s.tick % reroute_ticks == 0) reroute(s, net, cfg);
    const double mean_chi =
        s.chi.empty() ? 0.0 : std::accumulate(s.chi.begin(), s.chi.end(), 0.0) / static_cast<double>(s.chi.size());
    result.network.push_back({s.time_s, mean_chi, s.in_network()});
    if (observer) observer(s);
  }
  result.vehicles = std::move(s.vehicles);
  result.reroute_rounds = s.reroute_rounds;
  result.router_failures = s.router_failures;
  result.switches = s.switches;
  return result;
}

void write_vehicles_csv(const ScenarioResult& r, std::ostream& out) {
  out << "id,spawnedAtS,arrivedAtS,travelS,reroutes\n";
  for (const auto& v : r.vehicles) {
    out << v.id << ',' << format_number(v.spawned_at_s) << ',';
    if (v.arrived_at_s)
      out << format_number(*v.arrived_at_s) << ',' << format_number(*v.arrived_at_s - v.spawned_at_s);
    else
      out << ',';
    out << ',' << v.reroutes << '\n';
  }
}

void write_network_csv(const ScenarioResult& r, std::ostream& out) {
  out << "timeS,meanChi,vehiclesInNetwork\n";
  for (const auto& n : r.network)
    out << format_number(n.time_s) << ',' << format_number(n.mean_chi) << ',' << n.vehicles << '\n';
}

}  // namespace rfd
