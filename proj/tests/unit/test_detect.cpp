#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "powertrace/detect.hpp"
#include "powertrace/error.hpp"

namespace pt = powertrace;
using namespace powertrace::detect;

TEST(ZScore, SpecExample) {
  const std::vector<double> x{1, 2, 3, 4, 100};
  const auto s = modified_zscore(x);
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_DOUBLE_EQ(s.mad, 1.0);
  EXPECT_NEAR(s.scores[4], 65.4265, 1e-4);
  EXPECT_NEAR(s.scores[0], -1.349, 1e-9);
  const auto r = detect_anomalies(x);
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{4}));
  EXPECT_NEAR(r.spike_threshold_v, 3.0 / 0.6745, 1e-12);
  EXPECT_NEAR(r.spike_threshold_v, 4.448, 5e-4);
}

TEST(ZScore, ConstantSeriesIsDegenerate) {
  const std::vector<double> x(50, 7.2);
  const auto r = detect_anomalies(x);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.indices.empty());
  for (double z : r.scores) EXPECT_EQ(z, 0.0);
}

TEST(ZScore, MatchesSortingOracle) {
  pt::testing::Gen gen(31);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = gen.index(1, 300);
    const auto x = gen.coin(0.3) ? gen.ties(n, 4) : gen.noise(n, gen.uniform(0.1, 10));
    const auto got = modified_zscore(x).scores;
    const auto want = pt::testing::brute_zscores(x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(got[i], want[i], 1e-9);
    EXPECT_NEAR(median(x), pt::testing::brute_median(x), 1e-12);
  }
}

TEST(ZScore, ScaleAndShiftInvariant) {
  pt::testing::Gen gen(32);
  for (int c = 0; c < 100; ++c) {
    const auto x = gen.noise(gen.index(5, 200));
    const double a = gen.uniform(0.1, 50), b = gen.uniform(-100, 100);
    std::vector<double> y(x);
    for (auto& v : y) v = a * v + b;
    const auto zx = modified_zscore(x).scores, zy = modified_zscore(y).scores;
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(zx[i], zy[i], 1e-7);
    EXPECT_EQ(detect_anomalies(x).indices, detect_anomalies(y).indices);
  }
}

TEST(ZScore, Errors) {
  EXPECT_THROW(modified_zscore(std::vector<double>{}), pt::Error);
  EXPECT_THROW(detect_anomalies(std::vector<double>{}), pt::Error);
}

TEST(SegmentCost, SpecExample) {
  const std::vector<double> x{0, 0, 5, 5};
  const PrefixSums p(x);
  EXPECT_NEAR(segment_cost_l2(p, 0, 4), 25.0, 1e-12);
  EXPECT_NEAR(segment_cost_l2(p, 0, 2), 0.0, 1e-12);
}

TEST(SegmentCost, MatchesDirectSum) {
  pt::testing::Gen gen(33);
  const auto x = gen.steps(300, 5, 10, 1);
  std::vector<double> shifted(x);
  for (auto& v : shifted) v += 1e4;  // large offset to stress cancellation
  const PrefixSums p(shifted);
  for (int c = 0; c < 200; ++c) {
    const std::size_t a = gen.index(0, 298);
    const std::size_t b = gen.index(a + 1, 300);
    const double want = pt::testing::brute_l2_cost(shifted, a, b);
    ASSERT_NEAR(segment_cost_l2(p, a, b), want, 1e-7 * std::max(1.0, want));
  }
}

TEST(Pelt, SingleStep) {
  std::vector<double> x(50, 0.0);
  x.resize(100, 5.0);
  const auto r = pelt(x, 10.0);
  EXPECT_EQ(r.change_points, (std::vector<std::size_t>{50}));
  ASSERT_EQ(r.segment_means.size(), 2u);
  EXPECT_DOUBLE_EQ(r.segment_means[1], 5.0);
}

TEST(Pelt, TwoSteps) {
  std::vector<double> x(30, 0.0);
  x.resize(60, 5.0);
  x.resize(90, 0.0);
  EXPECT_EQ(pelt(x, 10.0).change_points, (std::vector<std::size_t>{30, 60}));
}

TEST(Pelt, HugePenaltyGivesNoChangePoints) {
  pt::testing::Gen gen(34);
  const auto x = gen.steps(200, 4, 3, 1);
  EXPECT_TRUE(pelt(x, 1e12).change_points.empty());
}

TEST(Pelt, Errors) {
  EXPECT_THROW(pelt(std::vector<double>{1.0}, 1.0), pt::Error);
  EXPECT_THROW(pelt(std::vector<double>{1, 2, 3}, -1.0), pt::Error);
  EXPECT_THROW(optimal_partition_oracle(std::vector<double>(kOracleMaxLength + 1, 0.0), 1.0),
               pt::Error);
}

TEST(Pelt, MatchesOracleExactly) {
  pt::testing::Gen gen(35);
  for (int c = 0; c < 150; ++c) {
    const std::size_t n = gen.index(2, 150);
    const auto x = gen.coin(0.2) ? gen.ties(n, 3) : gen.steps(n, 6, gen.uniform(0.5, 8), 1.0);
    const double penalty = gen.uniform(0.0, 30.0);
    const auto a = pelt(x, penalty);
    const auto b = optimal_partition_oracle(x, penalty);
    ASSERT_EQ(a.change_points, b.change_points) << "case " << c;
    ASSERT_NEAR(a.total_cost, b.total_cost, 1e-9 * std::max(1.0, b.total_cost));
  }
}

TEST(Pelt, CostEqualsExhaustiveMinimum) {
  pt::testing::Gen gen(36);
  for (int c = 0; c < 60; ++c) {
    const std::size_t n = gen.index(2, 13);
    const auto x = gen.steps(n, 3, 5, 1);
    const double penalty = gen.uniform(0.0, 10.0);
    const auto r = pelt(x, penalty);
    const double brute = pt::testing::brute_best_cost(x, penalty, kMinSegmentLength);
    ASSERT_NEAR(r.total_cost, brute, 1e-9 * std::max(1.0, brute)) << "case " << c;
    ASSERT_NEAR(pt::testing::cost_of(x, r.change_points, penalty), r.total_cost,
                1e-9 * std::max(1.0, brute));
  }
}

TEST(Pelt, ChangePointCountNonIncreasingInPenalty) {
  pt::testing::Gen gen(37);
  for (int c = 0; c < 30; ++c) {
    const auto x = gen.steps(gen.index(20, 200), 8, 4, 1);
    std::size_t prev = x.size();
    for (double pen : {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 200.0}) {
      const auto k = pelt(x, pen).change_points.size();
      ASSERT_LE(k, prev);
      prev = k;
    }
  }
}

TEST(Pelt, SegmentsRespectMinimumLength) {
  pt::testing::Gen gen(38);
  for (int c = 0; c < 50; ++c) {
    const auto x = gen.noise(gen.index(4, 120), 3.0);
    const auto cps = pelt(x, 0.0).change_points;
    std::size_t start = 0;
    for (std::size_t cp : cps) {
      ASSERT_GE(cp - start, kMinSegmentLength);
      start = cp;
    }
    ASSERT_GE(x.size() - start, kMinSegmentLength);
  }
}

TEST(Penalty, DefaultScalesWithNoise) {
  pt::testing::Gen gen(39);
  const auto quiet = gen.noise(500, 0.1);
  const auto loud = gen.noise(500, 1.0);
  const auto pq = default_penalty(quiet), pl = default_penalty(loud);
  EXPECT_GT(pl.penalty, 50.0 * pq.penalty);
  EXPECT_NEAR(pl.sigma, 1.0, 0.15);
  EXPECT_NEAR(pl.penalty, 2.0 * pl.sigma * pl.sigma * std::log(500.0), 1e-9);
  EXPECT_TRUE(default_penalty(std::vector<double>(20, 1.0)).degenerate);
}

TEST(Detect, JsonLines) {
  const std::vector<double> x{1, 2, 3, 4, 100};
  const auto line = to_json_line(detect_anomalies(x), "voltage");
  EXPECT_NE(line.find("\"indices\":[4]"), std::string::npos) << line;
  EXPECT_EQ(line.find('\n'), line.size() - 1);
}
