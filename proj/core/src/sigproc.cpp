#include "powertrace/sigproc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "powertrace/error.hpp"
#include "powertrace/format.hpp"

namespace powertrace::sigproc {

std::size_t preset_window(telemetry::Throttle throttle) {
  return telemetry::is_static(throttle) ? kStaticWindow : kDynamicWindow;
}

SmoothedSeries sma(std::span<const double> series, std::size_t window) {
  if (series.empty()) throw Error(Errc::EmptySeries, "sigproc", "cannot smooth an empty series");
  if (window == 0 || window > series.size()) {
    throw Error(Errc::WindowTooLarge, "window " + std::to_string(window) +
                                          " not in [1, " + std::to_string(series.size()) + "]");
  }
  SmoothedSeries out;
  out.window = window;
  out.start_index = window - 1;
  out.values.resize(series.size() - window + 1);
  const double inv = 1.0 / static_cast<double>(window);
  // Each window is summed directly so no rounding drift accumulates along long logs.
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    double sum = 0.0;
    for (std::size_t j = k; j < k + window; ++j) sum += series[j];
    out.values[k] = sum * inv;
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::LengthMismatch, "sigproc",
                "pearson inputs differ in length (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(Errc::SeriesTooShort, "sigproc", "pearson needs >= 2 samples");

  auto constant = [](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo == *hi;
  };
  if (constant(x) || constant(y)) {
    throw Error(Errc::ZeroVariance, "pearson input channel is constant");
  }

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const std::vector<telemetry::TelemetryRecord>& records) {
  if (records.size() < 2) {
    throw Error(Errc::SeriesTooShort, "sigproc", "correlation needs >= 2 records");
  }
  using telemetry::Channel;
  const std::array<std::vector<double>, 4> channels{
      telemetry::channel_values(records, Channel::Voltage),
      telemetry::channel_values(records, Channel::Current),
      telemetry::channel_values(records, Channel::Power),
      telemetry::channel_values(records, Channel::Temperature)};

  CorrelationMatrix m;
  for (std::size_t c = 0; c < 4; ++c) {
    const auto [lo, hi] = std::minmax_element(channels[c].begin(), channels[c].end());
    m.zero_variance[c] = *lo == *hi;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i; j < 4; ++j) {
      double v = nan;
      if (m.defined(i, j)) v = i == j ? 1.0 : pearson(channels[i], channels[j]);
      m.r[i][j] = v;
      m.r[j][i] = v;
    }
  }
  return m;
}

std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "channel";
  for (auto l : m.labels) {
    out += ',';
    out += l;
  }
  out += '\n';
  for (std::size_t i = 0; i < 4; ++i) {
    out += m.labels[i];
    for (std::size_t j = 0; j < 4; ++j) {
      out += ',';
      out += m.defined(i, j) ? format_fixed(m.r[i][j], 6) : "ZeroVariance";
    }
    out += '\n';
  }
  return out;
}

std::string correlation_table_header() { return "Scenario,V-I,V-P,I-P,V-T\n"; }

std::string correlation_table_row(std::string_view scenario, const CorrelationMatrix& m) {
  constexpr std::array<std::array<std::size_t, 2>, 4> pairs{{{0, 1}, {0, 2}, {1, 2}, {0, 3}}};
  std::string out(scenario);
  for (const auto& [i, j] : pairs) {
    out += ',';
    out += m.defined(i, j) ? format_fixed(m.r[i][j], 3) : "ZeroVariance";
  }
  out += '\n';
  return out;
}

std::string smoothed_csv(const std::vector<telemetry::TelemetryRecord>& records,
                         std::span<const double> raw, const SmoothedSeries& smoothed) {
  if (raw.size() != records.size()) {
    throw Error(Errc::LengthMismatch, "sigproc", "raw channel and records differ in length");
  }
  std::string out = "t_ms,raw,sma\n";
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out += std::to_string(records[i].t_ms);
    out += ',';
    out += format_shortest(raw[i]);
    out += ',';
    if (i >= smoothed.start_index) out += format_shortest(smoothed.values[i - smoothed.start_index]);
    out += '\n';
  }
  return out;
}

}  // namespace powertrace::sigproc
