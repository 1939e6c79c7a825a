#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "rfd/errors.hpp"
#include "rfd/traffic.hpp"

using namespace rfd;

namespace {

const UnitGeometry kUnit{100.0, 2, 10.0};

SignalPlan plan(std::size_t approaches, double cycle = 60.0, double lost = 0.0) {
  SignalPlan p;
  p.cycle_s = cycle;
  p.lost_s = lost;
  p.green_s.assign(approaches, 0.0);
  return p;
}

}  // namespace

TEST(CongestionIndex, Examples) {
  EXPECT_EQ(congestion_index(0, kUnit, 0.15), 0.0);
  EXPECT_DOUBLE_EQ(congestion_index(30, kUnit, 0.15), 1.0);
  EXPECT_DOUBLE_EQ(congestion_index(15, kUnit, 0.15), 0.5);
}

TEST(CongestionIndex, SaturatesAtOne) {
  EXPECT_EQ(congestion_index(31, kUnit, 0.15), 1.0);
  EXPECT_EQ(congestion_index(1000, kUnit, 0.15), 1.0);
}

TEST(JamCapacity, IgnoresRepresentationError) {
  // 0.15 * 100 * 2 is not exactly 30 in binary.
  EXPECT_EQ(jam_capacity(kUnit, 0.15), 30u);
  EXPECT_EQ(jam_capacity({200.0, 2, 15.0}, 0.15), 60u);
  EXPECT_EQ(jam_capacity({10.0, 1, 1.0}, 0.15), 2u);  // 1.5 rounds up
}

TEST(TravelTime, Examples) {
  EXPECT_DOUBLE_EQ(travel_time(kUnit, 0.0, 4, 4), 10.0);
  EXPECT_DOUBLE_EQ(travel_time(kUnit, 1.0, 4, 4), 50.0);
  EXPECT_DOUBLE_EQ(travel_time(kUnit, 0.5, 4, 4), 12.5);
}

TEST(TravelTime, MonotoneAndAboveFreeFlow) {
  double last = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double t = travel_time(kUnit, k / 100.0, 4, 4);
    EXPECT_GE(t, kUnit.free_flow_s);
    EXPECT_GE(t, last);
    last = t;
  }
}

TEST(SignalSplits, Proportional) {
  const auto p = adjust_signal_splits(plan(2), {10, 30}, 7);
  EXPECT_DOUBLE_EQ(p.green_s[0], 15.0);
  EXPECT_DOUBLE_EQ(p.green_s[1], 45.0);
}

TEST(SignalSplits, EqualWhenIdle) {
  const auto p = adjust_signal_splits(plan(2), {0, 0}, 7);
  EXPECT_DOUBLE_EQ(p.green_s[0], 30.0);
  EXPECT_DOUBLE_EQ(p.green_s[1], 30.0);
}

TEST(SignalSplits, FloorThenRebalance) {
  const auto p = adjust_signal_splits(plan(2), {58, 2}, 7);
  EXPECT_DOUBLE_EQ(p.green_s[0], 53.0);
  EXPECT_DOUBLE_EQ(p.green_s[1], 7.0);
}

TEST(SignalSplits, LostTimeComesOffTheTop) {
  const auto p = adjust_signal_splits(plan(2, 60, 4), {1, 1}, 7);
  EXPECT_DOUBLE_EQ(p.green_s[0] + p.green_s[1], 56.0);
}

TEST(SignalSplits, InfeasibleCycle) {
  EXPECT_THROW(adjust_signal_splits(plan(4, 30, 4), {1, 1, 1, 1}, 7), InfeasibleCycle);
}

TEST(SignalSplits, RandomQueuesKeepInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const double min_green = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    const double lost = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    const double cycle = lost + min_green * static_cast<double>(n) +
                         std::uniform_real_distribution<double>(0.0, 90.0)(rng);
    std::vector<std::size_t> queues(n);
    for (auto& q : queues) q = std::uniform_int_distribution<std::size_t>(0, 60)(rng);
    const auto p = adjust_signal_splits(plan(n, cycle, lost), queues, min_green);
    ASSERT_EQ(p.green_s.size(), n);
    EXPECT_NEAR(std::accumulate(p.green_s.begin(), p.green_s.end(), 0.0), cycle - lost, 1e-9);
    for (double gsec : p.green_s) EXPECT_GE(gsec, min_green - 1e-9);
  }
}
