#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powertrace/telemetry.hpp"

namespace powertrace::sigproc {

// Window presets in samples: ~1-minute static runs and ~10-minute dynamic runs.
inline constexpr std::size_t kStaticWindow = 17;
inline constexpr std::size_t kDynamicWindow = 50;

std::size_t preset_window(telemetry::Throttle throttle);

struct SmoothedSeries {
  std::size_t window = 1;
  std::size_t start_index = 0;  // raw index aligned with values[0]
  std::vector<double> values;
};

// Trailing (causal) simple moving average; values[k] = mean(series[k .. k+window-1]).
SmoothedSeries sma(std::span<const double> series, std::size_t window);

// Sample Pearson correlation, clamped to [-1, 1]. Throws ZeroVariance for a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

inline constexpr std::array<std::string_view, 4> kChannelLabels{"V", "I", "P", "T"};

struct CorrelationMatrix {
  std::array<std::string_view, 4> labels = kChannelLabels;
  // NaN wherever either channel has zero variance.
  std::array<std::array<double, 4>, 4> r{};
  std::array<bool, 4> zero_variance{};

  bool defined(std::size_t i, std::size_t j) const {
    return !zero_variance[i] && !zero_variance[j];
  }
};

CorrelationMatrix correlation_matrix(const std::vector<telemetry::TelemetryRecord>& records);

// Full 4x4 matrix as CSV with a label column; undefined cells are written as "ZeroVariance".
std::string correlation_csv(const CorrelationMatrix& m);

// Header for the scenario comparison table: "Scenario,V-I,V-P,I-P,V-T".
std::string correlation_table_header();
// One table row, three decimals per cell, e.g. "Towing (Battery),-0.381,-0.306,0.993,0.450".
std::string correlation_table_row(std::string_view scenario, const CorrelationMatrix& m);

// CSV "t_ms,raw,sma" with the smoothed column empty until the window fills.
std::string smoothed_csv(const std::vector<telemetry::TelemetryRecord>& records,
                         std::span<const double> raw, const SmoothedSeries& smoothed);

}  // namespace powertrace::sigproc
