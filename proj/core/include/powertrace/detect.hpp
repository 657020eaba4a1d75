#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace powertrace::detect {

// Consistency constant of the modified Z-score: MAD / 0.6745 estimates sigma for normal data.
inline constexpr double kMadScale = 0.6745;
inline constexpr double kDefaultThreshold = 3.0;
inline constexpr std::size_t kMinSegmentLength = 2;
inline constexpr std::size_t kOracleMaxLength = 2000;

double median(std::vector<double> values);

struct RobustScores {
  std::vector<double> scores;
  double median = 0.0;
  double mad = 0.0;
  bool degenerate = false;  // MAD == 0: every score is reported as 0
};

RobustScores modified_zscore(std::span<const double> series);

struct AnomalyReport {
  std::vector<std::size_t> indices;
  std::vector<double> scores;
  double threshold = kDefaultThreshold;
  double spike_threshold_v = 0.0;  // threshold * MAD / 0.6745
  double median = 0.0;
  double mad = 0.0;
  bool degenerate = false;
};

AnomalyReport detect_anomalies(std::span<const double> series,
                               double threshold = kDefaultThreshold);

// Prefix sums of the mean-centred series and its square, for O(1) segment costs.
class PrefixSums {
 public:
  explicit PrefixSums(std::span<const double> series);

  std::size_t size() const { return sum_.size() - 1; }
  double sum(std::size_t i, std::size_t j) const { return sum_[j] - sum_[i]; }
  double sum_sq(std::size_t i, std::size_t j) const { return sum_sq_[j] - sum_sq_[i]; }
  double mean(std::size_t i, std::size_t j) const;

 private:
  double center_ = 0.0;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

// Sum of squared deviations from the segment mean over [i, j).
double segment_cost_l2(const PrefixSums& prefix, std::size_t i, std::size_t j);

struct ChangePointReport {
  std::vector<std::size_t> change_points;  // interior segment starts, sorted
  double penalty = 0.0;
  double total_cost = 0.0;  // segment costs + penalty * change_points.size()
  std::vector<double> segment_means;
};

// Exact penalized segmentation (L2 cost, minimum segment length 2) with PELT pruning.
ChangePointReport pelt(std::span<const double> series, double penalty);

// Unpruned optimal-partitioning dynamic program with the same objective; test oracle.
ChangePointReport optimal_partition_oracle(std::span<const double> series, double penalty);

struct PenaltyEstimate {
  double penalty = 0.0;
  double sigma = 0.0;  // robust noise scale from first differences
  bool degenerate = false;
};

// 2 * sigma^2 * ln(n), sigma = MAD(first differences) / (0.6745 * sqrt(2)).
PenaltyEstimate default_penalty(std::span<const double> series);

// One JSON object per line, stable key order.
std::string to_json_line(const AnomalyReport& report, const std::string& channel);
std::string to_json_line(const ChangePointReport& report, const std::string& channel);

}  // namespace powertrace::detect
