#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace powertrace::metrics {

double mae(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::size_t> counts;  // row-major classes x classes

  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * classes + predicted];
  }
  std::size_t total() const;
  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t predicted) const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when a 0/0 ratio was resolved to 0 for this class.
  bool zero_denominator = false;
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

ClassificationReport classification_report(std::span<const int> y_true,
                                           std::span<const int> y_pred,
                                           std::size_t classes = 4);

// Throttle class column headers: "25%,50%,75%,100%".
inline constexpr std::string_view kThrottleColumns = "25%,50%,75%,100%";

std::string classification_table_header();
// Three rows (Precision, Recall, F1-score) for one classifier, two decimals per cell.
std::string classification_table_rows(std::string_view classifier,
                                      const ClassificationReport& report);
std::string confusion_csv(const ConfusionMatrix& m);

struct ForecastRow {
  std::string scenario;
  double mae = 0.0;
  double rmse = 0.0;
};

// "Scenario,MAE,RMSE" followed by one row per scenario, four decimals.
std::string forecast_table(std::span<const ForecastRow> rows);

}  // namespace powertrace::metrics
