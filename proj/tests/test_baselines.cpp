#include <gtest/gtest.h>

#include <array>
#include <set>

#include "helpers.hpp"
#include "rfd/baselines.hpp"
#include "rfd/errors.hpp"

using namespace rfd;
using rfd::test::g1;

namespace {

RoadGraph g1_back_edge() {
  return RoadGraph::build({"S", "M", "D"}, {{"S", "M", 1}, {"M", "D", 1}, {"S", "D", 3}, {"M", "S", 1}});
}

}  // namespace

TEST(Aco, G1) {
  const auto g = g1();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AcoParams p;
    p.seed = seed;
    const auto sol = aco_solve(g, 0, 2, p);
    EXPECT_EQ(format_path(g, sol.path), "S,M,D");
    EXPECT_EQ(sol.path.total_cost, 2.0);
    EXPECT_EQ(sol.stats.drops, sol.stats.iterations * p.ants);
  }
}

TEST(Aco, OriginIsDestAndUnreachable) {
  const auto g = g1();
  EXPECT_EQ(aco_solve(g, 1, 1, AcoParams{}).path.nodes, std::vector<NodeIndex>{1});
  EXPECT_THROW(aco_solve(g, 2, 0, AcoParams{}), Unreachable);
  EXPECT_THROW(aco_solve(g, 0, 9, AcoParams{}), UnknownNode);
}

TEST(Aco, NotConvergedWhenNoAntArrives) {
  // The only route needs more moves than the step cap allows.
  const auto g = RoadGraph::build({"a", "b", "c", "d"}, {{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}});
  AcoParams p;
  p.max_steps = 2;
  p.max_iterations = 3;
  EXPECT_THROW(aco_solve(g, 0, 3, p), NotConverged);
}

TEST(Pheromone, EvaporationOnly) {
  PheromoneField f(1, 1.0);
  AcoParams p;
  p.evaporation = 0.5;
  update_pheromone(f, std::vector<AntWalk>{}, p);
  EXPECT_DOUBLE_EQ(f.tau(0), 0.5);
  AntWalk lost;
  lost.edges = {0};
  lost.cost = 2.0;
  update_pheromone(f, std::vector<AntWalk>{lost}, p);
  EXPECT_DOUBLE_EQ(f.tau(0), 0.25);
}

TEST(Pheromone, DepositAfterEvaporation) {
  PheromoneField f(2, 1.0);
  AcoParams p;
  p.evaporation = 0.5;
  p.deposit_q = 1.0;
  AntWalk w;
  w.edges = {0};
  w.cost = 2.0;
  w.completed = true;
  update_pheromone(f, std::vector<AntWalk>{w}, p);
  EXPECT_DOUBLE_EQ(f.tau(0), 1.0);
  EXPECT_DOUBLE_EQ(f.tau(1), 0.5);
}

TEST(Pheromone, StaysPositive) {
  PheromoneField f(3, 1.0);
  for (int i = 0; i < 5000; ++i) f.evaporate(0.9);
  for (double t : f.values()) EXPECT_GT(t, 0.0);
  EXPECT_THROW(PheromoneField(2, 0.0), InfeasibleParams);
}

TEST(Pheromone, PositiveThroughoutARun) {
  const auto g = random_graph(12, 30, {1, 10}, 4);
  AcoParams p;
  p.evaporation = 0.9;
  PheromoneField f(g.edge_count(), p.initial_pheromone);
  for (std::size_t it = 0; it < 200; ++it) {
    std::vector<AntWalk> walks;
    for (std::size_t a = 0; a < 8; ++a) {
      Rng rng = make_rng(5, it, a);
      walks.push_back(build_ant_walk(g, f, 0, 11, p, true, rng));
    }
    update_pheromone(f, walks, p);
    for (double t : f.values()) ASSERT_GT(t, 0.0);
  }
}

TEST(AntWalk, TabuWalksAreSimple) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = random_graph(15, 45, {1, 10}, seed);
    AcoParams p;
    PheromoneField f(g.edge_count(), 1.0);
    for (std::size_t a = 0; a < 20; ++a) {
      Rng rng = make_rng(seed, 0, a);
      const auto w = build_ant_walk(g, f, 0, 14, p, true, rng);
      EXPECT_FALSE(w.repeated);
      EXPECT_EQ(std::set<NodeIndex>(w.nodes.begin(), w.nodes.end()).size(), w.nodes.size());
      if (w.completed) {
        EXPECT_FALSE(check_path(g, make_path(g, w.nodes), 0, 14).has_value());
      }
    }
    p.seed = seed;
    EXPECT_FALSE(check_path(g, aco_solve(g, 0, 14, p).path, 0, 14).has_value());
  }
}

TEST(CyclePressure, ZeroOnDag) {
  const auto g = g1();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AcoParams p;
    p.seed = seed;
    EXPECT_EQ(aco_cycle_pressure(g, 0, 2, p, 1000), 0.0);
  }
}

TEST(CyclePressure, PositiveWithBackEdge) {
  AcoParams p;
  p.seed = 1;
  const double pressure = aco_cycle_pressure(g1_back_edge(), 0, 2, p, 1000);
  EXPECT_GT(pressure, 0.0);
  EXPECT_LE(pressure, 1.0);
}

TEST(CyclePressure, RfdPathsNeverRepeat) {
  const auto g = g1_back_edge();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RfdParams p;
    p.seed = seed;
    const auto path = solve_rfd(g, 0, 2, p).path.nodes;
    EXPECT_EQ(std::set<NodeIndex>(path.begin(), path.end()).size(), path.size());
  }
}

TEST(RandomWalk, UniformSuccessorChiSquared) {
  const auto g = RoadGraph::build({"x", "a", "b", "c"}, {{"x", "a", 5}, {"x", "b", 1}, {"x", "c", 2}});
  Rng rng = make_rng(42);
  std::array<double, 3> counts{};
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) ++counts[*uniform_successor(g, 0, rng) - 1];
  const double expected = samples / 3.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 0.999 quantile of chi-squared with 2 degrees of freedom: -2 ln(0.001).
  EXPECT_LT(chi2, -2.0 * std::log(0.001));
}

TEST(RandomWalk, DeadEnd) {
  const auto g = test::two_node();
  Rng rng = make_rng(1);
  EXPECT_FALSE(uniform_successor(g, 1, rng).has_value());
  EXPECT_EQ(random_walk(g, 1, std::nullopt, 10, rng), std::vector<NodeIndex>{1});
}

TEST(RandomWalk, TwoNodeGraph) {
  const auto g = test::two_node();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    WalkParams p;
    p.seed = seed;
    const auto r = random_walk_solve(g, 0, 1, p);
    EXPECT_EQ(r.path.nodes, (std::vector<NodeIndex>{0, 1}));
    EXPECT_EQ(r.reached, 1u);
    EXPECT_EQ(r.coverage, 2u);
  }
}

TEST(RandomWalk, NotFound) {
  const auto g = RoadGraph::build({"a", "b", "c", "d"}, {{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}});
  WalkParams p;
  p.max_steps = 2;
  EXPECT_THROW(random_walk_solve(g, 0, 3, p), NotFound);
}

TEST(RandomWalk, PathsAreLoopErased) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = random_graph(12, 30, {1, 10}, seed);
    WalkParams p;
    p.walkers = 8;
    p.seed = seed;
    try {
      const auto r = random_walk_solve(g, 0, 11, p);
      EXPECT_FALSE(check_path(g, r.path, 0, 11).has_value());
      EXPECT_GE(r.path.total_cost, dijkstra_shortest_path(g, 0, 11).total_cost);
    } catch (const NotFound&) {
    }
  }
}

TEST(RandomWalk, CoverageIsBoundedAndCountsOrigin) {
  const auto g = random_graph(20, 50, {1, 10}, 3);
  WalkParams p;
  p.walkers = 8;
  p.max_steps = 100;
  const auto c = walk_coverage(g, 0, p);
  EXPECT_GE(c, 1u);
  EXPECT_LE(c, 20u);
  p.max_steps = 1;
  p.walkers = 1;
  EXPECT_EQ(walk_coverage(g, 0, p), 2u);
}

TEST(CrossSolver, AllAgreeOnG1) {
  const auto g = g1();
  const auto oracle = dijkstra_shortest_path(g, 0, 2);
  EXPECT_EQ(solve_rfd(g, 0, 2, RfdParams{}).path, oracle);
  EXPECT_EQ(aco_solve(g, 0, 2, AcoParams{}).path, oracle);
  WalkParams w;
  w.walkers = 64;
  EXPECT_EQ(random_walk_solve(g, 0, 2, w).path, oracle);
}

TEST(Determinism, IndependentOfWorkers) {
  const auto g = random_graph(18, 50, {1, 10}, 8);
  AcoParams a1;
  a1.seed = 3;
  auto a4 = a1;
  a4.workers = 4;
  const auto s1 = aco_solve(g, 0, 17, a1), s4 = aco_solve(g, 0, 17, a4);
  EXPECT_EQ(s1.path, s4.path);
  EXPECT_EQ(s1.stats, s4.stats);
  EXPECT_TRUE(s1.pheromone == s4.pheromone);
  EXPECT_EQ(aco_cycle_pressure(g, 0, 17, a1), aco_cycle_pressure(g, 0, 17, a4));

  WalkParams w1;
  w1.walkers = 16;
  w1.seed = 3;
  auto w4 = w1;
  w4.workers = 4;
  const auto r1 = random_walk_solve(g, 0, 17, w1), r4 = random_walk_solve(g, 0, 17, w4);
  EXPECT_EQ(r1.path, r4.path);
  EXPECT_EQ(r1.reached, r4.reached);
  EXPECT_EQ(r1.coverage, r4.coverage);
  EXPECT_EQ(walk_coverage(g, 0, w1), walk_coverage(g, 0, w4));
}

TEST(Params, Validation) {
  auto bad_aco = [](auto mutate) {
    AcoParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), InfeasibleParams);
  };
  bad_aco([](AcoParams& p) { p.ants = 0; });
  bad_aco([](AcoParams& p) { p.alpha = -1; });
  bad_aco([](AcoParams& p) { p.evaporation = 0; });
  bad_aco([](AcoParams& p) { p.evaporation = 1; });
  bad_aco([](AcoParams& p) { p.deposit_q = 0; });
  bad_aco([](AcoParams& p) { p.initial_pheromone = 0; });
  bad_aco([](AcoParams& p) { p.stable_iterations = 0; });
  WalkParams w;
  w.walkers = 0;
  EXPECT_THROW(w.validate(), InfeasibleParams);
  w.walkers = 1;
  w.max_steps = 0;
  EXPECT_THROW(random_walk_solve(g1(), 0, 2, w), InfeasibleParams);
}
