#include "rfd/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfd/baselines.hpp"
#include "rfd/errors.hpp"
#include "rfd/feed.hpp"
#include "rfd/graph.hpp"
#include "rfd/params.hpp"
#include "rfd/river.hpp"
#include "rfd/sim.hpp"
#include "rfd/telemetry.hpp"

namespace rfd {

namespace {

using nlohmann::json;

struct Settings {
  RfdParams rfd;
  AcoParams aco;
  WalkParams walk;
};

// "--set key=value"; key is "rfd.x", "aco.x", "walk.x", or bare "x" for the
// block named by `fallback`.
void apply_sets(Settings& s, const std::vector<std::string>& sets, const std::string& fallback) {
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InfeasibleParams("--set expects key=value, got '" + item + "'");
    std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    std::string block = fallback;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      block = key.substr(0, dot);
      key = key.substr(dot + 1);
    }
    bool known = false;
    if (block == "rfd") known = set_param(s.rfd, key, value);
    else if (block == "aco") known = set_param(s.aco, key, value);
    else if (block == "walk") known = set_param(s.walk, key, value);
    if (!known) throw InfeasibleParams("unknown setting '" + item.substr(0, eq) + "'");
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw ParseError("cannot write " + (dir / name).string());
  return out;
}

void write_stanza(const std::filesystem::path& dir, const json& stanza) {
  auto out = open_output(dir, "run.json");
  out << stanza.dump(2) << '\n';
}

struct GraphSource {
  RoadGraph graph;
  json description;
};

GraphSource read_graph_source(const std::string& spec) {
  if (spec.rfind("random:", 0) == 0) {
    std::istringstream fields(spec.substr(7));
    std::size_t n = 0, m = 0;
    std::uint64_t seed = 0;
    char c1 = 0, c2 = 0;
    if (!(fields >> n >> c1 >> m >> c2 >> seed) || c1 != ',' || c2 != ',' || !fields.eof())
      throw ParseError("random graph spec must be random:n,m,seed");
    return {random_graph(n, m, {1, 10}, seed), {{"random", {{"n", n}, {"m", m}, {"seed", seed}, {"costs", {1, 10}}}}}};
  }
  return {load_graph_file(spec), {{"file", spec}}};
}

// ---- route ------------------------------------------------------------------

struct RouteArgs {
  std::string graph, origin, dest, algo = "rfd", out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::vector<std::string> sets;
};

struct RouteOutcome {
  PathResult path;
  std::size_t iterations = 0;
  std::size_t agents = 0;
  std::size_t completions = 0;
  std::size_t deposits = 0;
  bool converged = true;
  std::size_t coverage = 0;
};

RouteOutcome solve_with(const std::string& algo, const RoadGraph& g, NodeIndex o, NodeIndex d, const Settings& s) {
  RouteOutcome r;
  if (algo == "rfd") {
    auto sol = solve_rfd(g, o, d, s.rfd);
    r.path = std::move(sol.path);
    r.iterations = sol.stats.iterations;
    r.agents = sol.stats.drops;
    r.completions = sol.stats.completions;
    r.deposits = sol.stats.deposits;
    r.converged = sol.stats.converged;
  } else if (algo == "aco") {
    auto sol = aco_solve(g, o, d, s.aco);
    r.path = std::move(sol.path);
    r.iterations = sol.stats.iterations;
    r.agents = sol.stats.drops;
    r.completions = sol.stats.completions;
    r.converged = sol.stats.converged;
  } else if (algo == "walk") {
    auto sol = random_walk_solve(g, o, d, s.walk);
    r.path = std::move(sol.path);
    r.agents = s.walk.walkers;
    r.completions = sol.reached;
    r.coverage = sol.coverage;
  } else if (algo == "dijkstra") {
    r.path = dijkstra_shortest_path(g, o, d);
  } else {
    throw InfeasibleParams("unknown algorithm '" + algo + "' (rfd, aco, walk, dijkstra)");
  }
  return r;
}

int route_cmd(const RouteArgs& a, std::ostream& out) {
  Settings s;
  if (a.seed) s.rfd.seed = s.aco.seed = s.walk.seed = *a.seed;
  if (a.workers) s.rfd.workers = s.aco.workers = s.walk.workers = *a.workers;
  apply_sets(s, a.sets, a.algo);
  const RoadGraph g = load_graph_file(a.graph);
  const NodeIndex o = g.index(a.origin), d = g.index(a.dest);
  const RouteOutcome r = solve_with(a.algo, g, o, d, s);

  out << "path " << format_path(g, r.path) << '\n';
  out << "cost " << format_number(r.path.total_cost) << '\n';
  out << "iterations " << r.iterations << "\nagents " << r.agents << "\ncompletions " << r.completions
      << "\ndeposits " << r.deposits << "\nconverged " << (r.converged ? "true" : "false") << '\n';

  if (!a.out_dir.empty()) {
    auto csv = open_output(a.out_dir, "route.csv");
    csv << "algo,origin,dest,path,cost,iterations,agents,completions,deposits,converged\n";
    csv << a.algo << ',' << csv_field(a.origin) << ',' << csv_field(a.dest) << ','
        << csv_field(format_path(g, r.path)) << ',' << format_number(r.path.total_cost) << ',' << r.iterations << ','
        << r.agents << ',' << r.completions << ',' << r.deposits << ',' << (r.converged ? "true" : "false") << '\n';
    write_stanza(a.out_dir, {{"command", "route"},
                             {"graph", a.graph},
                             {"origin", a.origin},
                             {"dest", a.dest},
                             {"algo", a.algo},
                             {"rfd", to_json(s.rfd)},
                             {"aco", to_json(s.aco)},
                             {"walk", to_json(s.walk)}});
  }
  return kExitOk;
}

// ---- compare ----------------------------------------------------------------

struct CompareArgs {
  std::string graph, origin, dest, algos, out_dir;
  std::size_t trials = 1;
  std::uint64_t seed0 = 0;
  std::size_t cycle_walks = 1000;
  std::vector<std::string> sets;
};

int compare_cmd(const CompareArgs& a, std::ostream& out) {
  std::vector<std::string> algos;
  {
    std::istringstream list(a.algos);
    for (std::string item; std::getline(list, item, ',');)
      if (!item.empty()) algos.push_back(item);
  }
  if (algos.empty()) throw InfeasibleParams("--algos lists no algorithm");
  for (const auto& algo : algos)
    if (algo != "rfd" && algo != "aco" && algo != "walk" && algo != "dijkstra")
      throw InfeasibleParams("unknown algorithm '" + algo + "'");
  if (a.trials == 0) throw InfeasibleParams("--trials must be positive");

  Settings base;
  apply_sets(base, a.sets, "rfd");
  const GraphSource src = read_graph_source(a.graph);
  const RoadGraph& g = src.graph;
  const NodeIndex o = a.origin.empty() ? 0 : g.index(a.origin);
  const NodeIndex d = a.dest.empty() ? farthest_node(g, o) : g.index(a.dest);
  const double optimal = dijkstra_shortest_path(g, o, d).total_cost;

  std::ostringstream csv;
  csv << "algo,trial,seed,success,cost,optimalCost,gap,iterations,agents,cyclePressure,coverage\n";
  for (const auto& algo : algos) {
    for (std::size_t t = 0; t < a.trials; ++t) {
      Settings s = base;
      const std::uint64_t seed = a.seed0 + t;
      s.rfd.seed = s.aco.seed = s.walk.seed = seed;
      csv << algo << ',' << t << ',' << seed << ',';
      std::optional<RouteOutcome> r;
      try {
        r = solve_with(algo, g, o, d, s);
      } catch (const NotConverged&) {
      } catch (const NotFound&) {
      }
      std::string pressure;
      if (algo == "aco") pressure = format_number(aco_cycle_pressure(g, o, d, s.aco, a.cycle_walks));
      if (algo == "rfd" && r) {
        // Steepest-descent paths never repeat a node; report the measured fraction anyway.
        const auto simple = loop_erase(r->path.nodes).size() == r->path.nodes.size();
        pressure = simple ? "0" : "1";
      }
      std::string coverage;
      if (algo == "walk") coverage = std::to_string(r ? r->coverage : walk_coverage(g, o, s.walk));
      if (r) {
        csv << "true," << format_number(r->path.total_cost) << ',' << format_number(optimal) << ','
            << format_number(r->path.total_cost - optimal) << ',' << r->iterations << ',' << r->agents;
      } else {
        csv << "false,," << format_number(optimal) << ",,,";
      }
      csv << ',' << pressure << ',' << coverage << '\n';
    }
  }
  out << csv.str();
  if (!a.out_dir.empty()) {
    open_output(a.out_dir, "compare.csv") << csv.str();
    write_stanza(a.out_dir, {{"command", "compare"},
                             {"graph", src.description},
                             {"origin", g.id(o)},
                             {"dest", g.id(d)},
                             {"algos", algos},
                             {"trials", a.trials},
                             {"seed0", a.seed0},
                             {"cycleWalks", a.cycle_walks},
                             {"rfd", to_json(base.rfd)},
                             {"aco", to_json(base.aco)},
                             {"walk", to_json(base.walk)}});
  }
  return kExitOk;
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string network, scenario, router, out_dir = ".", telemetry_log;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::vector<std::string> sets;
};

int simulate_cmd(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const Network net = load_network_file(a.network);
  SimConfig cfg = load_scenario_file(a.scenario, net);
  if (!a.router.empty()) cfg.router = parse_router(a.router);
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  Settings s{cfg.rfd, cfg.aco, {}};
  apply_sets(s, a.sets, "rfd");
  cfg.rfd = s.rfd;
  cfg.aco = s.aco;
  cfg.validate(net);

  std::optional<SensorFeed> feed;
  std::optional<TelemetryPipeline> pipeline;
  std::ofstream log;
  if (!a.telemetry_log.empty()) {
    log.open(a.telemetry_log);
    if (!log) throw ParseError("cannot write telemetry log '" + a.telemetry_log + "'");
    feed.emplace(net, cfg);
    pipeline.emplace(net.graph, net.units, cfg.jam_density, cfg.telemetry_window_ms);
  }
  StepObserver observer;
  if (feed) {
    observer = [&](const SimState& state) {
      for (const auto& reading : feed->sample(state)) {
        const std::string line = encode_reading(reading);
        log << line << '\n';
        pipeline->push_line(line);
      }
    };
  }

  const ScenarioResult result = run_scenario(net, cfg, observer);
  {
    auto vehicles = open_output(a.out_dir, "vehicles.csv");
    write_vehicles_csv(result, vehicles);
    auto network = open_output(a.out_dir, "network.csv");
    write_network_csv(result, network);
  }
  write_stanza(a.out_dir, {{"command", "simulate"},
                           {"network", a.network},
                           {"scenario", a.scenario},
                           {"resolved", scenario_to_json(cfg, net)},
                           {"telemetryLog", a.telemetry_log}});

  out << "router " << to_string(cfg.router) << "\nseed " << cfg.seed << "\nvehicles " << result.vehicles.size()
      << "\narrived " << result.arrived() << "\nmeanTravelS " << format_number(result.mean_travel_s())
      << "\nreroutes " << result.switches << "\nrouterFailures " << result.router_failures << '\n';

  if (pipeline) {
    pipeline->finish();
    const auto c = pipeline->counters();
    out << "telemetry parsed " << c.parsed << " malformed " << c.malformed << " stragglers " << c.stragglers
        << " unknownUnit " << c.unknown_unit << '\n';
    const auto check = check_pipeline(net, cfg.jam_density, pipeline->reports(), *feed);
    if (!check.ok()) {
      err << "error: telemetry pipeline disagrees with ground truth: " << *check.mismatch << '\n';
      return kExitInvariant;
    }
    out << "telemetry windows " << check.windows << " match ground truth\n";
  }
  return kExitOk;
}

// ---- replay -----------------------------------------------------------------

struct ReplayArgs {
  std::string network, readings;
  std::int64_t window_ms = 5000;
  double jam_density = 0.15;
};

int replay_cmd(const ReplayArgs& a, std::ostream& out) {
  const Network net = load_network_file(a.network);
  std::ifstream in(a.readings);
  if (!in) throw ParseError("cannot open readings log '" + a.readings + "'");
  TelemetryPipeline pipeline(net.graph, net.units, a.jam_density, a.window_ms);
  for (std::string line; std::getline(in, line);) pipeline.push_line(line);
  pipeline.finish();

  const auto map = pipeline.map();
  out << "unit,chi,stale\n";
  for (EdgeIndex e = 0; e < net.graph.edge_count(); ++e)
    out << csv_field(net.graph.unit_id(e)) << ',' << format_number(map.chi[e]) << ','
        << (map.stale[e] ? "true" : "false") << '\n';
  const auto c = pipeline.counters();
  out << "# asOfMs " << map.as_of_ms << " parsed " << c.parsed << " malformed " << c.malformed << " stragglers "
      << c.stragglers << " unknownUnit " << c.unknown_unit << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"River formation dynamics routing, baselines, traffic simulation and telemetry replay", "rfd"};
  app.require_subcommand(1);

  RouteArgs route;
  auto* route_cmd_ = app.add_subcommand("route", "Solve one origin-destination query");
  route_cmd_->add_option("--graph", route.graph, "Graph JSON file")->required();
  route_cmd_->add_option("--origin", route.origin)->required();
  route_cmd_->add_option("--dest", route.dest)->required();
  route_cmd_->add_option("--algo", route.algo, "rfd, aco, walk or dijkstra")->capture_default_str();
  route_cmd_->add_option("--seed", route.seed);
  route_cmd_->add_option("--workers", route.workers);
  route_cmd_->add_option("--set", route.sets, "Parameter override key=value (rfd.*, aco.*, walk.*)");
  route_cmd_->add_option("--out-dir", route.out_dir, "Write route.csv and run.json here");

  CompareArgs compare;
  auto* compare_cmd_ = app.add_subcommand("compare", "Compare solvers against the Dijkstra oracle");
  compare_cmd_->add_option("--graph", compare.graph, "Graph JSON file or random:n,m,seed")->required();
  compare_cmd_->add_option("--origin", compare.origin, "Default: first node");
  compare_cmd_->add_option("--dest", compare.dest, "Default: farthest node from origin");
  compare_cmd_->add_option("--algos", compare.algos, "Comma-separated list")->required();
  compare_cmd_->add_option("--trials", compare.trials)->capture_default_str();
  compare_cmd_->add_option("--seeds", compare.seed0, "First seed; trial i uses seed+i")->capture_default_str();
  compare_cmd_->add_option("--cycle-walks", compare.cycle_walks, "Ant walks per cycle-pressure estimate")
      ->capture_default_str();
  compare_cmd_->add_option("--set", compare.sets);
  compare_cmd_->add_option("--out-dir", compare.out_dir, "Write compare.csv and run.json here");

  SimulateArgs simulate;
  auto* simulate_cmd_ = app.add_subcommand("simulate", "Run a traffic scenario");
  simulate_cmd_->add_option("--network", simulate.network)->required();
  simulate_cmd_->add_option("--scenario", simulate.scenario)->required();
  simulate_cmd_->add_option("--router", simulate.router, "rfd, aco, dijkstra or static");
  simulate_cmd_->add_option("--seed", simulate.seed);
  simulate_cmd_->add_option("--workers", simulate.workers);
  simulate_cmd_->add_option("--set", simulate.sets);
  simulate_cmd_->add_option("--out-dir", simulate.out_dir)->capture_default_str();
  simulate_cmd_->add_option("--telemetry-log", simulate.telemetry_log,
                            "Write the sensor stream here and check the telemetry pipeline against ground truth");

  ReplayArgs replay;
  auto* replay_cmd_ = app.add_subcommand("replay", "Rebuild the congestion map from a sensor log");
  replay_cmd_->add_option("--network", replay.network)->required();
  replay_cmd_->add_option("--readings", replay.readings)->required();
  replay_cmd_->add_option("--window-ms", replay.window_ms)->capture_default_str();
  replay_cmd_->add_option("--jam-density", replay.jam_density)->capture_default_str();

  std::vector<const char*> argv{"rfd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (route_cmd_->parsed()) return route_cmd(route, out);
    if (compare_cmd_->parsed()) return compare_cmd(compare, out);
    if (simulate_cmd_->parsed()) return simulate_cmd(simulate, out, err);
    if (replay_cmd_->parsed()) return replay_cmd(replay, out);
  } catch (const NotConverged& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoResult;
  } catch (const NotFound& e) {
    err << "error: " << e.what() << '\n';
    return kExitNoResult;
  } catch (const Unreachable& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnreachable;
  } catch (const InvariantBreach& e) {
    err << "error: invariant breach: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace rfd
