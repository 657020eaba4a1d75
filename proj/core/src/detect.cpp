#include "powertrace/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "powertrace/error.hpp"

namespace powertrace::detect {

namespace {

void check_penalty(double penalty) {
  if (!(penalty >= 0.0) || !std::isfinite(penalty)) {
    throw Error(Errc::InvalidParams, "detect", "penalty must be finite and >= 0");
  }
}

// Optimal partitioning recursion F[s] = min_t F[t] + C(t, s) + penalty, F[0] = -penalty.
// With `prune`, candidate t is dropped once F[t] + C(t, s) > F[s]; because of the minimum
// segment length the drop takes effect two steps later (s + 1 may still need t).
ChangePointReport solve(std::span<const double> series, double penalty, bool prune) {
  const std::size_t n = series.size();
  if (n < kMinSegmentLength) {
    throw Error(Errc::SeriesTooShort, "detect", "segmentation needs at least 2 samples");
  }
  check_penalty(penalty);

  const PrefixSums prefix(series);
  const double inf = std::numeric_limits<double>::infinity();
  const double margin = 1e-9 * (1.0 + prefix.sum_sq(0, n) + penalty);
  constexpr std::size_t never = std::numeric_limits<std::size_t>::max();

  std::vector<double> best(n + 1, inf);
  std::vector<std::size_t> last(n + 1, 0);
  std::vector<std::size_t> flagged_at(n + 1, never);
  best[0] = -penalty;

  std::vector<std::size_t> candidates{0};
  candidates.reserve(n + 1);

  for (std::size_t s = kMinSegmentLength; s <= n; ++s) {
    if (prune) {
      std::erase_if(candidates,
                    [&](std::size_t t) { return flagged_at[t] != never && flagged_at[t] + 2 <= s; });
    }
    double f = inf;
    std::size_t arg = 0;
    for (const std::size_t t : candidates) {
      if (s - t < kMinSegmentLength) continue;
      const double v = best[t] + segment_cost_l2(prefix, t, s) + penalty;
      if (v < f) {
        f = v;
        arg = t;
      }
    }
    best[s] = f;
    last[s] = arg;

    if (prune) {
      for (const std::size_t t : candidates) {
        if (s - t < kMinSegmentLength || flagged_at[t] != never) continue;
        if (best[t] + segment_cost_l2(prefix, t, s) > f + margin) flagged_at[t] = s;
      }
    }
    candidates.push_back(s);
  }

  ChangePointReport report;
  report.penalty = penalty;
  report.total_cost = best[n];
  for (std::size_t s = n; s > 0; s = last[s]) {
    if (last[s] > 0) report.change_points.push_back(last[s]);
  }
  std::reverse(report.change_points.begin(), report.change_points.end());

  std::size_t start = 0;
  for (const std::size_t cp : report.change_points) {
    report.segment_means.push_back(prefix.mean(start, cp));
    start = cp;
  }
  report.segment_means.push_back(prefix.mean(start, n));
  return report;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::EmptySeries, "detect", "median of an empty series");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

RobustScores modified_zscore(std::span<const double> series) {
  if (series.empty()) throw Error(Errc::EmptySeries, "detect", "cannot score an empty series");
  RobustScores out;
  out.median = median(std::vector<double>(series.begin(), series.end()));
  std::vector<double> deviations(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) deviations[i] = std::abs(series[i] - out.median);
  out.mad = median(std::move(deviations));
  out.scores.assign(series.size(), 0.0);
  if (out.mad == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    out.scores[i] = kMadScale * (series[i] - out.median) / out.mad;
  }
  return out;
}

AnomalyReport detect_anomalies(std::span<const double> series, double threshold) {
  const RobustScores scored = modified_zscore(series);
  AnomalyReport report;
  report.threshold = threshold;
  report.median = scored.median;
  report.mad = scored.mad;
  report.degenerate = scored.degenerate;
  report.spike_threshold_v = threshold * scored.mad / kMadScale;
  for (std::size_t i = 0; i < scored.scores.size(); ++i) {
    if (std::abs(scored.scores[i]) > threshold) {
      report.indices.push_back(i);
      report.scores.push_back(scored.scores[i]);
    }
  }
  return report;
}

PrefixSums::PrefixSums(std::span<const double> series)
    : sum_(series.size() + 1, 0.0), sum_sq_(series.size() + 1, 0.0) {
  if (!series.empty()) {
    double total = 0.0;
    for (double x : series) total += x;
    center_ = total / static_cast<double>(series.size());
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double x = series[i] - center_;
    sum_[i + 1] = sum_[i] + x;
    sum_sq_[i + 1] = sum_sq_[i] + x * x;
  }
}

double PrefixSums::mean(std::size_t i, std::size_t j) const {
  return center_ + sum(i, j) / static_cast<double>(j - i);
}

double segment_cost_l2(const PrefixSums& prefix, std::size_t i, std::size_t j) {
  const double s = prefix.sum(i, j);
  const double cost = prefix.sum_sq(i, j) - s * s / static_cast<double>(j - i);
  return cost > 0.0 ? cost : 0.0;
}

ChangePointReport pelt(std::span<const double> series, double penalty) {
  return solve(series, penalty, true);
}

ChangePointReport optimal_partition_oracle(std::span<const double> series, double penalty) {
  if (series.size() > kOracleMaxLength) {
    throw Error(Errc::SeriesTooLong, "detect",
                "oracle is limited to " + std::to_string(kOracleMaxLength) + " samples");
  }
  return solve(series, penalty, false);
}

PenaltyEstimate default_penalty(std::span<const double> series) {
  if (series.size() < 3) {
    throw Error(Errc::SeriesTooShort, "detect", "default penalty needs at least 3 samples");
  }
  std::vector<double> diffs(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) diffs[i - 1] = series[i] - series[i - 1];
  const double med = median(diffs);
  for (double& d : diffs) d = std::abs(d - med);
  const double mad = median(std::move(diffs));

  PenaltyEstimate est;
  est.sigma = mad / (kMadScale * std::sqrt(2.0));
  est.degenerate = est.sigma == 0.0;
  est.penalty = 2.0 * est.sigma * est.sigma * std::log(static_cast<double>(series.size()));
  return est;
}

std::string to_json_line(const AnomalyReport& report, const std::string& channel) {
  nlohmann::ordered_json j;
  j["kind"] = "anomalies";
  j["channel"] = channel;
  j["threshold"] = report.threshold;
  j["spike_threshold_v"] = report.spike_threshold_v;
  j["median"] = report.median;
  j["mad"] = report.mad;
  j["degenerate"] = report.degenerate;
  j["count"] = report.indices.size();
  j["indices"] = report.indices;
  j["scores"] = report.scores;
  return j.dump() + "\n";
}

std::string to_json_line(const ChangePointReport& report, const std::string& channel) {
  nlohmann::ordered_json j;
  j["kind"] = "change_points";
  j["channel"] = channel;
  j["penalty"] = report.penalty;
  j["total_cost"] = report.total_cost;
  j["count"] = report.change_points.size();
  j["change_points"] = report.change_points;
  j["segment_means"] = report.segment_means;
  return j.dump() + "\n";
}

}  // namespace powertrace::detect
