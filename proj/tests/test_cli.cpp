#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "rfd/cli.hpp"
#include "rfd/feed.hpp"

using namespace rfd;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rfd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return (dir_ / name).string();
  }

  fs::path dir_;
  const std::string g1_ = test::data_file("g1.json");
  const std::string grid_ = test::data_file("grid3x3_network.json");
  const std::string shock_ = test::data_file("grid_shock_scenario.json");
  const std::string idle_ = test::data_file("zero_demand_scenario.json");
};

}  // namespace

TEST_F(Cli, RouteG1) {
  const auto r = cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--algo", "rfd", "--seed", "1",
                      "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("path S,M,D\n"), std::string::npos);
  EXPECT_NE(r.out.find("cost 2\n"), std::string::npos);
  const auto csv = lines_of(slurp(dir_ / "route.csv"));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].rfind("algo,origin,dest,path,cost", 0), 0u);
  EXPECT_EQ(csv[1].rfind("rfd,S,D,\"S,M,D\",2,", 0), 0u);
  const auto stanza = nlohmann::json::parse(slurp(dir_ / "run.json"));
  EXPECT_EQ(stanza["rfd"]["seed"], 1);
  EXPECT_EQ(stanza["algo"], "rfd");
}

TEST_F(Cli, RouteEveryAlgorithm) {
  for (const std::string algo : {"aco", "dijkstra"}) {
    const auto r = cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--algo", algo});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_NE(r.out.find("path S,M,D\n"), std::string::npos) << algo;
  }
  const auto walk = cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--algo", "walk", "--set",
                         "walkers=32"});
  EXPECT_EQ(walk.code, kExitOk) << walk.err;
  EXPECT_NE(walk.out.find("path S,M,D\n"), std::string::npos);
}

TEST_F(Cli, RouteExitCodes) {
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "D", "--dest", "S"}).code, kExitUnreachable);
  const auto bad = cli({"route", "--graph", write("bad.json", "{\"nodes\": ["), "--origin", "S", "--dest", "D"});
  EXPECT_EQ(bad.code, kExitInput);
  EXPECT_NE(bad.err.find("parse error"), std::string::npos);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S", "--dest", "Q"}).code, kExitInput);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--algo", "bfs"}).code, kExitInput);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--set", "erosionRate"}).code, kExitInput);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--set", "rfd.bogus=1"}).code, kExitInput);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S", "--dest", "D", "--set", "rfd.erosionRate=2"}).code,
            kExitInput);
  EXPECT_EQ(cli({"route", "--graph", g1_, "--origin", "S"}).code, kExitInput);
  EXPECT_EQ(cli({"launch"}).code, kExitInput);
  EXPECT_EQ(cli({}).code, kExitInput);

  const auto chain = write("chain.json", R"({"nodes":[{"id":"a"},{"id":"b"},{"id":"c"},{"id":"d"}],
    "edges":[{"from":"a","to":"b","cost":1},{"from":"b","to":"c","cost":1},{"from":"c","to":"d","cost":1}]})");
  EXPECT_EQ(cli({"route", "--graph", chain, "--origin", "a", "--dest", "d", "--algo", "walk", "--set",
                 "maxSteps=2"}).code,
            kExitNoResult);
  EXPECT_EQ(cli({"route", "--graph", chain, "--origin", "a", "--dest", "d", "--algo", "aco", "--set", "maxSteps=2",
                 "--set", "maxIterations=3"})
                .code,
            kExitNoResult);
}

TEST_F(Cli, Help) {
  const auto r = cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST_F(Cli, CompareGapsAgainstOracle) {
  const auto r = cli({"compare", "--graph", g1_, "--origin", "S", "--dest", "D", "--algos", "rfd,dijkstra", "--trials",
                      "5", "--seeds", "10", "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows[0], "algo,trial,seed,success,cost,optimalCost,gap,iterations,agents,cyclePressure,coverage");
  for (std::size_t k = 1; k <= 5; ++k) {
    EXPECT_EQ(rows[k].rfind("rfd," + std::to_string(k - 1) + "," + std::to_string(9 + k) + ",true,2,2,0,", 0), 0u)
        << rows[k];
  }
  EXPECT_EQ(slurp(dir_ / "compare.csv"), r.out);
  EXPECT_TRUE(fs::exists(dir_ / "run.json"));
}

TEST_F(Cli, CompareWalkCoverage) {
  for (const std::string walkers : {"1", "8"}) {
    const std::string steps = walkers == "1" ? "800" : "100";
    const auto r = cli({"compare", "--graph", "random:20,50,3", "--algos", "walk", "--trials", "3", "--set",
                        "walk.walkers=" + walkers, "--set", "walk.maxSteps=" + steps});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const auto coverage = rows[k].substr(rows[k].rfind(',') + 1);
      ASSERT_FALSE(coverage.empty()) << rows[k];
      EXPECT_GE(std::stoi(coverage), 1);
      EXPECT_LE(std::stoi(coverage), 20);
    }
  }
}

TEST_F(Cli, CompareCyclePressureColumn) {
  const auto back = write("back.json", R"({"nodes":[{"id":"S"},{"id":"M"},{"id":"D"}],
    "edges":[{"from":"S","to":"M","cost":1},{"from":"M","to":"D","cost":1},{"from":"S","to":"D","cost":3},
             {"from":"M","to":"S","cost":1}]})");
  const auto r = cli({"compare", "--graph", back, "--origin", "S", "--dest", "D", "--algos", "aco,rfd", "--seeds", "1"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), 3u);
  const auto aco_pressure = std::stod(rows[1].substr(rows[1].rfind(',', rows[1].size() - 2) + 1));
  EXPECT_GT(aco_pressure, 0.0);
  EXPECT_EQ(rows[2].substr(rows[2].size() - 3), ",0,");
}

TEST_F(Cli, CompareInputErrors) {
  EXPECT_EQ(cli({"compare", "--graph", g1_, "--algos", ""}).code, kExitInput);
  EXPECT_EQ(cli({"compare", "--graph", g1_, "--algos", ","}).code, kExitInput);
  EXPECT_EQ(cli({"compare", "--graph", g1_, "--algos", "rfd,magic"}).code, kExitInput);
  EXPECT_EQ(cli({"compare", "--graph", "random:5,x,1", "--algos", "rfd"}).code, kExitInput);
  EXPECT_EQ(cli({"compare", "--graph", g1_, "--algos", "rfd", "--trials", "0"}).code, kExitInput);
}

TEST_F(Cli, SimulateZeroDemand) {
  const auto r = cli({"simulate", "--network", grid_, "--scenario", idle_, "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(slurp(dir_ / "vehicles.csv"), "id,spawnedAtS,arrivedAtS,travelS,reroutes\n");
  const auto net = lines_of(slurp(dir_ / "network.csv"));
  EXPECT_EQ(net[0], "timeS,meanChi,vehiclesInNetwork");
  EXPECT_EQ(net.size(), 601u);
  EXPECT_EQ(net[1], "1,0,0");
  const auto stanza = nlohmann::json::parse(slurp(dir_ / "run.json"));
  EXPECT_EQ(stanza["resolved"]["durationS"], 600);
  EXPECT_TRUE(stanza["resolved"].contains("seed"));
}

TEST_F(Cli, SimulateIsReproducibleAndChecksTelemetry) {
  const std::vector<std::string> base{"simulate", "--network", grid_, "--scenario", shock_, "--router", "static"};
  auto with = [&](const std::string& name) {
    auto args = base;
    for (const auto& a : {std::string("--out-dir"), (dir_ / name).string(), std::string("--telemetry-log"),
                          (dir_ / (name + ".log")).string()})
      args.push_back(a);
    return cli(args);
  };
  const auto a = with("a");
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("match ground truth"), std::string::npos);
  EXPECT_NE(a.out.find("router static"), std::string::npos);
  ASSERT_EQ(with("b").code, kExitOk);
  for (const auto* f : {"vehicles.csv", "network.csv"}) EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  EXPECT_EQ(slurp(dir_ / "a.log"), slurp(dir_ / "b.log"));
  EXPECT_GT(lines_of(slurp(dir_ / "a" / "vehicles.csv")).size(), 100u);
}

TEST_F(Cli, SimulateInputErrors) {
  EXPECT_EQ(cli({"simulate", "--network", grid_, "--scenario", "/nonexistent.json"}).code, kExitInput);
  EXPECT_EQ(cli({"simulate", "--network", grid_, "--scenario", write("s.json", R"({"durationS":-1})")}).code,
            kExitInput);
  EXPECT_EQ(cli({"simulate", "--network", grid_, "--scenario", idle_, "--router", "teleport"}).code, kExitInput);
  EXPECT_EQ(cli({"simulate", "--network", grid_, "--scenario", idle_, "--set", "aco.evaporation=1",
                 "--out-dir", dir_.string()})
                .code,
            kExitInput);
}

TEST_F(Cli, ReplayMatchesFinalGroundTruth) {
  const auto log = (dir_ / "sensors.log").string();
  ASSERT_EQ(cli({"simulate", "--network", grid_, "--scenario", shock_, "--out-dir", dir_.string(), "--telemetry-log",
                 log})
                .code,
            kExitOk);

  // Independent ground truth: the same run's counts, straight from the simulator.
  const auto net = load_network_file(grid_);
  const auto cfg = load_scenario_file(shock_, net);
  SensorFeed feed(net, cfg);
  run_scenario(net, cfg, [&](const SimState& s) { feed.sample(s); });
  const auto truth = feed.truth().rbegin()->second;

  const auto r = cli({"replay", "--network", grid_, "--readings", log, "--window-ms", "5000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines_of(r.out);
  ASSERT_EQ(rows.size(), net.graph.edge_count() + 2);
  EXPECT_EQ(rows[0], "unit,chi,stale");
  for (EdgeIndex e = 0; e < net.graph.edge_count(); ++e)
    EXPECT_EQ(rows[e + 1], net.graph.unit_id(e) + "," + format_number(truth[e]) + ",false");
  EXPECT_NE(rows.back().find("malformed 0"), std::string::npos);

  // Same log with garbage lines mixed in.
  std::ifstream in(log);
  std::ofstream dirty(dir_ / "dirty.log");
  std::size_t k = 0;
  for (std::string line; std::getline(in, line); ++k) {
    if (k % 10 == 3) dirty << "v9,garbage,,\n";
    dirty << line << '\n';
  }
  dirty.close();
  const auto d = cli({"replay", "--network", grid_, "--readings", (dir_ / "dirty.log").string()});
  ASSERT_EQ(d.code, kExitOk);
  const auto drows = lines_of(d.out);
  ASSERT_EQ(drows.size(), rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) EXPECT_EQ(drows[i], rows[i]);
  EXPECT_EQ(drows.back().find("malformed 0"), std::string::npos);
  EXPECT_NE(drows.back().find("malformed "), std::string::npos);
}

TEST_F(Cli, ReplayEmptyAndMissing) {
  const auto r = cli({"replay", "--network", grid_, "--readings", write("empty.log", "")});
  ASSERT_EQ(r.code, kExitOk);
  const auto rows = lines_of(r.out);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].find(',')), ",0,true");
  EXPECT_EQ(cli({"replay", "--network", grid_, "--readings", "/nonexistent.log"}).code, kExitInput);
  EXPECT_EQ(cli({"replay", "--network", "/nonexistent.json", "--readings", "/nonexistent.log"}).code, kExitInput);
  EXPECT_EQ(cli({"replay", "--network", grid_, "--readings", write("x.log", ""), "--window-ms", "0"}).code, kExitInput);
}
