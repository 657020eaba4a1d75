#include "powertrace/metrics.hpp"

#include <cmath>

#include "powertrace/error.hpp"
#include "powertrace/format.hpp"

namespace powertrace::metrics {

namespace {

void check_pair(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::LengthMismatch, "metrics",
                "length mismatch (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw Error(Errc::EmptySeries, "metrics", "metrics need at least one sample");
}

double ratio(std::size_t num, std::size_t den, bool& flag) {
  if (den == 0) {
    flag = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true.size(), y_pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += std::abs(y_true[i] - y_pred[i]);
  return sum / static_cast<double>(y_true.size());
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true.size(), y_pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_true[i] - y_pred[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(y_true.size()));
}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t t = 0;
  for (std::size_t p = 0; p < classes; ++p) t += at(truth, p);
  return t;
}

std::size_t ConfusionMatrix::column_sum(std::size_t predicted) const {
  std::size_t t = 0;
  for (std::size_t r = 0; r < classes; ++r) t += at(r, predicted);
  return t;
}

ClassificationReport classification_report(std::span<const int> y_true,
                                           std::span<const int> y_pred, std::size_t classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(Errc::LengthMismatch, "metrics", "label vectors differ in length");
  }
  ClassificationReport report;
  report.confusion.classes = classes;
  report.confusion.counts.assign(classes * classes, 0);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= classes ||
        static_cast<std::size_t>(p) >= classes) {
      throw Error(Errc::InvalidParams, "metrics", "label outside [0, classes)");
    }
    ++report.confusion.counts[static_cast<std::size_t>(t) * classes + static_cast<std::size_t>(p)];
  }

  std::size_t correct = 0;
  report.per_class.resize(classes);
  for (std::size_t k = 0; k < classes; ++k) {
    auto& m = report.per_class[k];
    const std::size_t tp = report.confusion.at(k, k);
    correct += tp;
    m.support = report.confusion.row_sum(k);
    m.precision = ratio(tp, report.confusion.column_sum(k), m.zero_denominator);
    m.recall = ratio(tp, m.support, m.zero_denominator);
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.f1 = 0.0;
      m.zero_denominator = true;
    }
  }
  bool unused = false;
  report.accuracy = ratio(correct, y_true.size(), unused);
  return report;
}

std::string classification_table_header() {
  return "Classifier,Metric," + std::string(kThrottleColumns) + "\n";
}

std::string classification_table_rows(std::string_view classifier,
                                      const ClassificationReport& report) {
  std::string out;
  auto row = [&](std::string_view metric, auto field) {
    out += classifier;
    out += ',';
    out += metric;
    for (const auto& m : report.per_class) {
      out += ',';
      out += format_fixed(field(m), 2);
    }
    out += '\n';
  };
  row("Precision", [](const ClassMetrics& m) { return m.precision; });
  row("Recall", [](const ClassMetrics& m) { return m.recall; });
  row("F1-score", [](const ClassMetrics& m) { return m.f1; });
  return out;
}

std::string confusion_csv(const ConfusionMatrix& m) {
  std::string out = "true\\predicted";
  for (std::size_t p = 0; p < m.classes; ++p) out += "," + std::to_string(p);
  out += '\n';
  for (std::size_t t = 0; t < m.classes; ++t) {
    out += std::to_string(t);
    for (std::size_t p = 0; p < m.classes; ++p) out += "," + std::to_string(m.at(t, p));
    out += '\n';
  }
  return out;
}

std::string forecast_table(std::span<const ForecastRow> rows) {
  std::string out = "Scenario,MAE,RMSE\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + format_fixed(r.mae, 4) + "," + format_fixed(r.rmse, 4) + "\n";
  }
  return out;
}

}  // namespace powertrace::metrics
