#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "powertrace/error.hpp"
#include "powertrace/sigproc.hpp"

namespace pt = powertrace;
using namespace powertrace::sigproc;

TEST(Sma, SpecExample) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = sma(x, 2);
  EXPECT_EQ(s.values, (std::vector<double>{1.5, 2.5, 3.5}));
  EXPECT_EQ(s.start_index, 1u);
  EXPECT_EQ(s.window, 2u);
}

TEST(Sma, WindowOneIsIdentityAndFullWindowIsMean) {
  const std::vector<double> x{3, -1, 4, 1, 5};
  EXPECT_EQ(sma(x, 1).values, x);
  const auto full = sma(x, 5);
  ASSERT_EQ(full.values.size(), 1u);
  EXPECT_DOUBLE_EQ(full.values[0], 12.0 / 5.0);
}

TEST(Sma, Errors) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(sma(x, 0), pt::Error);
  EXPECT_THROW(sma(x, 4), pt::Error);
  EXPECT_THROW(sma(std::vector<double>{}, 1), pt::Error);
}

TEST(Sma, MatchesBruteForce) {
  pt::testing::Gen gen(21);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = gen.index(1, 400);
    auto x = gen.noise(n, gen.uniform(0.01, 100.0));
    const double offset = gen.uniform(-1e3, 1e3);
    for (auto& v : x) v += offset;
    const std::size_t w = gen.index(1, n);
    const auto got = sma(x, w).values;
    const auto want = pt::testing::brute_sma(x, w);
    ASSERT_EQ(got.size(), n - w + 1);
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_NEAR(got[i], want[i], 1e-9 * std::max(1.0, std::fabs(want[i])));
    }
  }
}

TEST(Sma, ConstantInputStaysConstant) {
  const std::vector<double> x(200, 7.25);
  for (double v : sma(x, 17).values) EXPECT_DOUBLE_EQ(v, 7.25);
}

TEST(Sma, PresetWindows) {
  using pt::telemetry::Throttle;
  EXPECT_EQ(preset_window(Throttle::P50), 17u);
  EXPECT_EQ(preset_window(Throttle::Dynamic), 50u);
}

TEST(Pearson, SpecExample) {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 7};
  EXPECT_NEAR(pearson(x, y), 0.9934, 5e-5);
  EXPECT_NEAR(pearson(x, y), pt::testing::brute_pearson(x, y), 1e-12);
}

TEST(Pearson, LinearAndErrors) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> down{8, 6, 4, 2};
  EXPECT_NEAR(pearson(x, down), -1.0, 1e-12);
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), pt::Error);
  EXPECT_THROW(pearson(x, std::vector<double>{5, 5, 5, 5}), pt::Error);
}

TEST(Pearson, PropertiesOnRandomPairs) {
  pt::testing::Gen gen(22);
  for (int c = 0; c < 300; ++c) {
    const std::size_t n = gen.index(3, 300);
    auto x = gen.noise(n);
    auto y = gen.noise(n);
    const double mix = gen.uniform(-1, 1);
    for (std::size_t i = 0; i < n; ++i) y[i] += mix * 3.0 * x[i];
    const double r = pearson(x, y);
    ASSERT_NEAR(r, pt::testing::brute_pearson(x, y), 1e-9);
    ASSERT_LE(std::fabs(r), 1.0 + 1e-12);
    ASSERT_NEAR(r, pearson(y, x), 1e-12);
    // invariant under positive affine maps of either argument
    std::vector<double> ax(x);
    for (auto& v : ax) v = 2.5 * v + 40.0;
    ASSERT_NEAR(pearson(ax, y), r, 1e-9);
  }
}

TEST(Correlation, MatrixIsSymmetricWithUnitDiagonal) {
  pt::testing::Gen gen(23);
  const auto recs = gen.records(300);
  const auto m = correlation_matrix(recs);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(m.r[i][i], 1.0, 1e-12);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(m.r[i][j], m.r[j][i], 1e-12);
  }
}

TEST(Correlation, ConstantChannelIsFlagged) {
  std::vector<pt::telemetry::TelemetryRecord> recs;
  for (int i = 0; i < 10; ++i) {
    recs.push_back(pt::telemetry::make_record(i * 121, 7.0 + 0.01 * i, 1.0 + 0.1 * (i % 3), 22.0));
  }
  const auto m = correlation_matrix(recs);
  EXPECT_TRUE(m.zero_variance[3]);
  EXPECT_FALSE(m.defined(0, 3));
  EXPECT_TRUE(m.defined(0, 1));
  EXPECT_NE(correlation_table_row("x", m).find("ZeroVariance"), std::string::npos);
}

TEST(Correlation, TableRowLayout) {
  CorrelationMatrix m;
  auto set = [&](std::size_t i, std::size_t j, double v) { m.r[i][j] = m.r[j][i] = v; };
  set(0, 1, -0.381);
  set(0, 2, -0.306);
  set(1, 2, 0.993);
  set(0, 3, 0.450);
  EXPECT_EQ(correlation_table_header(), "Scenario,V-I,V-P,I-P,V-T\n");
  EXPECT_EQ(correlation_table_row("Towing (Battery)", m),
            "Towing (Battery),-0.381,-0.306,0.993,0.450\n");
}
