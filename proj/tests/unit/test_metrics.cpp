#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "powertrace/error.hpp"
#include "powertrace/metrics.hpp"

namespace pt = powertrace;
using namespace powertrace::metrics;

TEST(Metrics, RegressionExample) {
  const std::vector<double> t{2, 4}, p{1, 2};
  EXPECT_DOUBLE_EQ(mae(t, p), 1.5);
  EXPECT_DOUBLE_EQ(rmse(t, p), std::sqrt(2.5));
  EXPECT_THROW(mae(t, std::vector<double>{1}), pt::Error);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), pt::Error);
}

TEST(Metrics, RmseDominatesMae) {
  pt::testing::Gen gen(41);
  for (int c = 0; c < 200; ++c) {
    const auto a = gen.noise(gen.index(1, 100)), b = gen.noise(a.size());
    ASSERT_LE(mae(a, b), rmse(a, b) + 1e-12);
    ASSERT_EQ(mae(a, a), 0.0);
  }
}

TEST(Metrics, ClassificationExample) {
  const std::vector<int> t{0, 0, 1, 1}, p{0, 1, 1, 1};
  const auto r = classification_report(t, p, 2);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
  EXPECT_NEAR(r.per_class[0].f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.per_class[1].precision, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
  EXPECT_NEAR(r.per_class[1].f1, 0.8, 1e-12);
  EXPECT_EQ(r.confusion.at(0, 1), 1u);
  EXPECT_EQ(r.confusion.total(), 4u);
}

TEST(Metrics, AbsentClassHasZeroDenominatorFlag) {
  const std::vector<int> t{0, 0, 1}, p{0, 0, 1};
  const auto r = classification_report(t, p, 4);
  EXPECT_TRUE(r.per_class[3].zero_denominator);
  EXPECT_EQ(r.per_class[3].support, 0u);
  EXPECT_THROW(classification_report(t, std::vector<int>{0, 5, 1}, 4), pt::Error);
}

TEST(Metrics, ConfusionTotalsAndAccuracy) {
  pt::testing::Gen gen(42);
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = gen.index(1, 200);
    std::vector<int> t(n), p(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(gen.index(0, 3));
      p[i] = gen.coin(0.7) ? t[i] : static_cast<int>(gen.index(0, 3));
      hits += t[i] == p[i];
    }
    const auto r = classification_report(t, p);
    ASSERT_EQ(r.confusion.total(), n);
    ASSERT_DOUBLE_EQ(r.accuracy, static_cast<double>(hits) / static_cast<double>(n));
    for (std::size_t k = 0; k < 4; ++k) {
      ASSERT_EQ(r.confusion.row_sum(k), r.per_class[k].support);
      const auto& m = r.per_class[k];
      if (!m.zero_denominator && m.precision + m.recall > 0) {
        ASSERT_NEAR(m.f1, 2 * m.precision * m.recall / (m.precision + m.recall), 1e-12);
      }
    }
  }
}

TEST(Metrics, TableLayouts) {
  const std::vector<int> t{0, 1, 2, 3}, p{0, 1, 2, 3};
  const auto r = classification_report(t, p);
  const auto rows = classification_table_rows("RF", r);
  EXPECT_NE(classification_table_header().find("25%,50%,75%,100%"), std::string::npos);
  EXPECT_NE(rows.find("RF"), std::string::npos);
  const std::vector<ForecastRow> f{{"drive", 0.01, 0.02}};
  EXPECT_NE(forecast_table(f).find("drive"), std::string::npos);
}
