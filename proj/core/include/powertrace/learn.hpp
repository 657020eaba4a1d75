#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powertrace/telemetry.hpp"

namespace powertrace::learn {

inline constexpr std::size_t kThrottleClasses = 4;
inline constexpr std::size_t kFeatureCount = 5;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "voltage", "current", "temperature", "power", "config_flag"};

struct FeatureRow {
  double voltage = 0.0;
  double current = 0.0;
  double temperature = 0.0;
  double power = 0.0;
  double config_flag = 0.0;  // 0 = BatteryOnly, 1 = Hybrid

  std::array<double, kFeatureCount> values() const {
    return {voltage, current, temperature, power, config_flag};
  }
};

FeatureRow make_feature_row(const telemetry::TelemetryRecord& record,
                            telemetry::PowerConfig config);

// Throttle class encoding 0..3 for P25..P100.
int throttle_label(telemetry::Throttle throttle);

// Dense row-major matrix of features.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t cols = kFeatureCount) : cols_(cols) {}

  static FeatureMatrix from_rows(std::span<const FeatureRow> rows);

  std::size_t rows() const { return cols_ == 0 ? 0 : data_.size() / cols_; }
  std::size_t cols() const { return cols_; }
  void push_row(std::span<const double> values);
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  FeatureMatrix select(std::span<const std::size_t> indices) const;

 private:
  std::size_t cols_;
  std::vector<double> data_;
};

struct ThrottleDataset {
  std::vector<FeatureRow> rows;
  std::vector<int> labels;
};

// One row per sample of every static run; throws DynamicScenarioRejected otherwise.
ThrottleDataset build_dataset(std::span<const telemetry::Run> runs);

// A node either splits on `feature` (x[feature] <= threshold goes left) or is a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::size_t samples = 0;
  double gain = 0.0;          // weighted impurity decrease of this split
  std::vector<double> value;  // class distribution (classifier) or {score} (regressor)

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> x) const;
  int depth() const;
};

struct ForestParams {
  std::size_t n_estimators = 50;
  int max_depth = 10;
  std::size_t min_samples_split = 5;
  std::size_t max_features = 0;  // 0: ceil(sqrt(n_features))
  std::uint64_t seed = 42;
  std::size_t classes = kThrottleClasses;
};

struct BoostParams {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  std::size_t min_samples_split = 2;
  std::uint64_t seed = 42;
  std::size_t classes = kThrottleClasses;
};

struct ForestModel {
  ForestParams params;
  std::size_t n_features = 0;
  std::size_t feature_subset_size = 0;
  std::vector<std::uint64_t> tree_seeds;
  std::vector<DecisionTree> trees;
};

struct BoostModel {
  BoostParams params;
  std::size_t n_features = 0;
  std::vector<double> initial_scores;  // class log-priors
  std::vector<DecisionTree> stages;    // round-major: stages[round * classes + k]
};

ForestModel train_rf(const FeatureMatrix& x, std::span<const int> labels,
                     const ForestParams& params = {});
BoostModel train_gb(const FeatureMatrix& x, std::span<const int> labels,
                    const BoostParams& params = {});

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

// Ties between classes resolve to the lowest class index.
Prediction predict(const ForestModel& model, std::span<const double> x);
Prediction predict(const BoostModel& model, std::span<const double> x);

template <class Model>
std::vector<int> predict_labels(const Model& model, const FeatureMatrix& x) {
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(model, x.row(i)).label;
  return out;
}

struct FeatureImportance {
  std::vector<double> weights;  // sums to 1 unless no_splits
  bool no_splits = false;
};

FeatureImportance feature_importance(const ForestModel& model);
FeatureImportance feature_importance(const BoostModel& model);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffled holdout, test share rounded per class; index lists sorted ascending.
Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

// Fold id in [0, k) for every row, balanced within each class.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed);

template <class Params>
struct CvRow {
  Params params;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

template <class Params>
struct GridResult {
  Params best;
  std::size_t best_index = 0;
  std::vector<CvRow<Params>> table;
};

GridResult<ForestParams> grid_search(const FeatureMatrix& x, std::span<const int> labels,
                                     std::span<const ForestParams> grid, std::size_t k_folds = 5,
                                     std::uint64_t seed = 0);
GridResult<BoostParams> grid_search(const FeatureMatrix& x, std::span<const int> labels,
                                    std::span<const BoostParams> grid, std::size_t k_folds = 5,
                                    std::uint64_t seed = 0);

std::string cv_table_csv(const GridResult<ForestParams>& result);
std::string cv_table_csv(const GridResult<BoostParams>& result);
std::string importance_csv(const FeatureImportance& importance);

// Versioned JSON artifacts. Grids are objects of hyperparameter arrays, expanded as a
// cartesian product with the first key varying slowest.
std::string to_json(const ForestModel& model);
std::string to_json(const BoostModel& model);
ForestModel forest_from_json(std::string_view text);
BoostModel boost_from_json(std::string_view text);
// "forest" or "boost" for a model artifact.
std::string model_kind(std::string_view text);

std::vector<ForestParams> forest_grid_from_json(std::string_view text, const ForestParams& base);
std::vector<BoostParams> boost_grid_from_json(std::string_view text, const BoostParams& base);

}  // namespace powertrace::learn
