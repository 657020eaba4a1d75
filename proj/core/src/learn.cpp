#include "powertrace/learn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "powertrace/error.hpp"
#include "powertrace/format.hpp"

namespace powertrace::learn {

namespace {

using Index = std::uint32_t;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int argmax_lowest(std::span<const double> v) {
  int best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  return best;
}

void check_training_data(const FeatureMatrix& x, std::span<const int> labels,
                         std::size_t classes) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(Errc::EmptyData, "training set is empty");
  if (labels.size() != x.rows()) {
    throw Error(Errc::LengthMismatch, "learn", "labels and feature rows differ in count");
  }
  if (classes < 2) throw Error(Errc::InvalidParams, "need at least two classes");
  std::vector<bool> seen(classes, false);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw Error(Errc::InvalidParams, "label " + std::to_string(y) + " outside [0, classes)");
    }
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw Error(Errc::SingleClassData, "training labels contain a single class");
  }
}

// Rows sorted by each feature; ties keep row order.
std::vector<std::vector<Index>> presort(const FeatureMatrix& x) {
  std::vector<std::vector<Index>> order(x.cols());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order[f];
    o.resize(x.rows());
    std::iota(o.begin(), o.end(), Index{0});
    std::stable_sort(o.begin(), o.end(), [&](Index a, Index b) { return x(a, f) < x(b, f); });
  }
  return order;
}

enum class Criterion { Gini, SquaredError };

struct TreeSpec {
  Criterion criterion = Criterion::Gini;
  int max_depth = 1;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // >= n_features means all, in index order
  std::size_t classes = 2;
  double leaf_scale = 1.0;  // regression leaves: leaf_scale * sum(target) / sum(hessian)
};

// Grows one tree over "slots" (bootstrap copies of rows). Each feature keeps its own
// slot ordering; a node owns the same index range [begin, end) in every ordering.
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const TreeSpec& spec, std::vector<Index> slot_row,
              std::vector<std::vector<Index>> order, std::mt19937_64* rng)
      : x_(x),
        spec_(spec),
        slot_row_(std::move(slot_row)),
        order_(std::move(order)),
        rng_(rng),
        go_left_(slot_row_.size(), false),
        leaf_of_slot_(slot_row_.size(), -1) {}

  void set_labels(std::span<const int> labels) { labels_ = labels; }
  void set_targets(std::span<const double> target, std::span<const double> hessian) {
    target_ = target;
    hessian_ = hessian;
  }

  DecisionTree build() {
    tree_.nodes.clear();
    if (!slot_row_.empty()) grow(0, slot_row_.size(), 0);
    return std::move(tree_);
  }

  const std::vector<int>& leaf_of_slot() const { return leaf_of_slot_; }

 private:
  struct Candidate {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;
    std::size_t n_left = 0;
  };

  int label_of(Index slot) const { return labels_[slot_row_[slot]]; }
  double target_of(Index slot) const { return target_[slot_row_[slot]]; }
  double feature_of(Index slot, std::size_t f) const { return x_(slot_row_[slot], f); }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t n = end - begin;
    const auto& slots = order_[0];

    // Node statistics.
    std::vector<std::size_t> counts;
    std::size_t sum_sq_counts = 0;
    double sum = 0.0, sum_sq = 0.0, sum_h = 0.0;
    bool pure = true;
    if (spec_.criterion == Criterion::Gini) {
      counts.assign(spec_.classes, 0);
      for (std::size_t i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(label_of(slots[i]))];
      for (auto c : counts) {
        sum_sq_counts += c * c;
        if (c != 0 && c != n) pure = false;
      }
    } else {
      const double first = target_of(slots[begin]);
      for (std::size_t i = begin; i < end; ++i) {
        const double r = target_of(slots[i]);
        sum += r;
        sum_sq += r * r;
        sum_h += hessian_[slot_row_[slots[i]]];
        if (r != first) pure = false;
      }
    }

    {
      TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
      node.depth = depth;
      node.samples = n;
      if (spec_.criterion == Criterion::Gini) {
        node.value.resize(spec_.classes);
        for (std::size_t k = 0; k < spec_.classes; ++k) {
          node.value[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
        }
      } else {
        const double v = std::abs(sum_h) < 1e-150 ? 0.0 : spec_.leaf_scale * sum / sum_h;
        node.value = {v};
      }
    }

    const bool stop = depth >= spec_.max_depth || n < spec_.min_samples_split || n < 2 || pure;
    Candidate best;
    if (!stop) {
      for (std::size_t f : feature_subset()) {
        const Candidate c = spec_.criterion == Criterion::Gini
                                ? best_gini_split(f, begin, end, counts, sum_sq_counts)
                                : best_sse_split(f, begin, end, sum);
        if (c.valid && (!best.valid || c.score > best.score)) best = c;
      }
    }
    if (!best.valid) {
      for (std::size_t i = begin; i < end; ++i) leaf_of_slot_[slots[i]] = id;
      return id;
    }

    const double parent_term = spec_.criterion == Criterion::Gini
                                   ? static_cast<double>(sum_sq_counts) / static_cast<double>(n)
                                   : sum * sum / static_cast<double>(n);
    for (std::size_t i = begin; i < end; ++i) {
      const Index s = slots[i];
      go_left_[s] = feature_of(s, best.feature) <= best.threshold;
    }
    for (auto& o : order_) {
      std::stable_partition(o.begin() + static_cast<std::ptrdiff_t>(begin),
                            o.begin() + static_cast<std::ptrdiff_t>(end),
                            [&](Index s) { return go_left_[s]; });
    }

    const int left = grow(begin, begin + best.n_left, depth + 1);
    const int right = grow(begin + best.n_left, end, depth + 1);
    TreeNode& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    node.gain = std::max(0.0, best.score - parent_term);
    return id;
  }

  std::vector<std::size_t> feature_subset() {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    if (spec_.max_features == 0 || spec_.max_features >= d || rng_ == nullptr) return features;
    for (std::size_t i = 0; i < spec_.max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(features[i], features[pick(*rng_)]);
    }
    features.resize(spec_.max_features);
    return features;
  }

  static double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid >= hi ? lo : mid;
  }

  // Maximizes sum_k cL_k^2 / nL + sum_k cR_k^2 / nR (equivalently minimizes weighted Gini).
  Candidate best_gini_split(std::size_t f, std::size_t begin, std::size_t end,
                            const std::vector<std::size_t>& counts,
                            std::size_t sum_sq_counts) const {
    const auto& o = order_[f];
    std::vector<std::size_t> left(spec_.classes, 0);
    std::vector<std::size_t> right = counts;
    std::size_t sq_left = 0;
    std::size_t sq_right = sum_sq_counts;
    const std::size_t n = end - begin;
    Candidate best;
    for (std::size_t i = begin; i + 1 < end; ++i) {
      const auto c = static_cast<std::size_t>(label_of(o[i]));
      sq_left += 2 * left[c] + 1;
      ++left[c];
      sq_right -= 2 * right[c] - 1;
      --right[c];
      const double v = feature_of(o[i], f);
      const double next = feature_of(o[i + 1], f);
      if (!(v < next)) continue;
      const std::size_t n_left = i - begin + 1;
      const double score = static_cast<double>(sq_left) / static_cast<double>(n_left) +
                           static_cast<double>(sq_right) / static_cast<double>(n - n_left);
      if (!best.valid || score > best.score) best = {true, f, midpoint(v, next), score, n_left};
    }
    return best;
  }

  // Maximizes sL^2 / nL + sR^2 / nR (equivalently minimizes the children's squared error).
  Candidate best_sse_split(std::size_t f, std::size_t begin, std::size_t end, double sum) const {
    const auto& o = order_[f];
    double s_left = 0.0;
    const std::size_t n = end - begin;
    Candidate best;
    for (std::size_t i = begin; i + 1 < end; ++i) {
      s_left += target_of(o[i]);
      const double v = feature_of(o[i], f);
      const double next = feature_of(o[i + 1], f);
      if (!(v < next)) continue;
      const std::size_t n_left = i - begin + 1;
      const double s_right = sum - s_left;
      const double score = s_left * s_left / static_cast<double>(n_left) +
                           s_right * s_right / static_cast<double>(n - n_left);
      if (!best.valid || score > best.score) best = {true, f, midpoint(v, next), score, n_left};
    }
    return best;
  }

  const FeatureMatrix& x_;
  TreeSpec spec_;
  std::vector<Index> slot_row_;
  std::vector<std::vector<Index>> order_;
  std::mt19937_64* rng_;
  std::span<const int> labels_;
  std::span<const double> target_;
  std::span<const double> hessian_;
  std::vector<bool> go_left_;
  std::vector<int> leaf_of_slot_;
  DecisionTree tree_;
};

void check_features(std::size_t expected, std::span<const double> x) {
  if (x.size() != expected) {
    throw Error(Errc::ShapeMismatch, "learn",
                "expected " + std::to_string(expected) + " features, got " +
                    std::to_string(x.size()));
  }
}

FeatureImportance normalize_importance(std::vector<double> weights) {
  FeatureImportance out;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total > 0.0) {
    for (double& w : weights) w /= total;
  } else {
    std::fill(weights.begin(), weights.end(), 0.0);
    out.no_splits = true;
  }
  out.weights = std::move(weights);
  return out;
}

void accumulate_gains(const DecisionTree& tree, std::vector<double>& weights) {
  for (const auto& node : tree.nodes) {
    if (!node.is_leaf()) weights[static_cast<std::size_t>(node.feature)] += node.gain;
  }
}

double accuracy_of(std::span<const int> truth, std::span<const int> predicted) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

ForestModel train_model(const FeatureMatrix& x, std::span<const int> y, const ForestParams& p) {
  return train_rf(x, y, p);
}
BoostModel train_model(const FeatureMatrix& x, std::span<const int> y, const BoostParams& p) {
  return train_gb(x, y, p);
}

template <class Params>
GridResult<Params> run_grid(const FeatureMatrix& x, std::span<const int> labels,
                            std::span<const Params> grid, std::size_t k_folds,
                            std::uint64_t seed) {
  if (grid.empty()) throw Error(Errc::InvalidParams, "grid search needs at least one cell");
  if (labels.size() != x.rows()) {
    throw Error(Errc::LengthMismatch, "learn", "labels and feature rows differ in count");
  }
  const auto folds = stratified_folds(labels, k_folds, seed);

  std::vector<std::vector<std::size_t>> train_idx(k_folds), test_idx(k_folds);
  for (std::size_t i = 0; i < folds.size(); ++i) {
    for (std::size_t f = 0; f < k_folds; ++f) {
      (folds[i] == f ? test_idx[f] : train_idx[f]).push_back(i);
    }
  }

  GridResult<Params> result;
  for (const Params& cell : grid) {
    CvRow<Params> row;
    row.params = cell;
    for (std::size_t f = 0; f < k_folds; ++f) {
      const FeatureMatrix x_train = x.select(train_idx[f]);
      const FeatureMatrix x_test = x.select(test_idx[f]);
      std::vector<int> y_train, y_test;
      for (auto i : train_idx[f]) y_train.push_back(labels[i]);
      for (auto i : test_idx[f]) y_test.push_back(labels[i]);
      const auto model = train_model(x_train, y_train, cell);
      row.fold_accuracy.push_back(accuracy_of(y_test, predict_labels(model, x_test)));
    }
    row.mean_accuracy = std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
                        static_cast<double>(k_folds);
    result.table.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < result.table.size(); ++i) {
    if (result.table[i].mean_accuracy > result.table[result.best_index].mean_accuracy) {
      result.best_index = i;
    }
  }
  result.best = result.table[result.best_index].params;
  return result;
}

std::string fold_columns(std::size_t k) {
  std::string out;
  for (std::size_t f = 0; f < k; ++f) out += ",fold" + std::to_string(f);
  return out;
}

template <class Params>
std::string fold_values(const CvRow<Params>& row) {
  std::string out = "," + format_fixed(row.mean_accuracy, 6);
  for (double a : row.fold_accuracy) out += "," + format_fixed(a, 6);
  return out + "\n";
}

}  // namespace

FeatureRow make_feature_row(const telemetry::TelemetryRecord& record,
                            telemetry::PowerConfig config) {
  return FeatureRow{record.voltage, record.current, record.temperature,
                    record.voltage * record.current,
                    config == telemetry::PowerConfig::Hybrid ? 1.0 : 0.0};
}

int throttle_label(telemetry::Throttle throttle) {
  switch (throttle) {
    case telemetry::Throttle::P25: return 0;
    case telemetry::Throttle::P50: return 1;
    case telemetry::Throttle::P75: return 2;
    case telemetry::Throttle::P100: return 3;
    case telemetry::Throttle::Dynamic: break;
  }
  throw Error(Errc::DynamicScenarioRejected, "dynamic scenarios carry no throttle label");
}

FeatureMatrix FeatureMatrix::from_rows(std::span<const FeatureRow> rows) {
  FeatureMatrix m(kFeatureCount);
  m.data_.reserve(rows.size() * kFeatureCount);
  for (const auto& r : rows) {
    const auto v = r.values();
    m.data_.insert(m.data_.end(), v.begin(), v.end());
  }
  return m;
}

void FeatureMatrix::push_row(std::span<const double> values) {
  if (values.size() != cols_) {
    throw Error(Errc::ShapeMismatch, "learn", "row width does not match matrix");
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> indices) const {
  FeatureMatrix out(cols_);
  out.data_.reserve(indices.size() * cols_);
  for (auto i : indices) out.push_row(row(i));
  return out;
}

ThrottleDataset build_dataset(std::span<const telemetry::Run> runs) {
  ThrottleDataset ds;
  for (const auto& run : runs) {
    if (!telemetry::is_static(run.meta.throttle)) {
      throw Error(Errc::DynamicScenarioRejected,
                  "run '" + run.meta.id + "' is dynamic; only static throttle runs are labeled");
    }
    const int label = throttle_label(run.meta.throttle);
    for (const auto& r : run.records) {
      ds.rows.push_back(make_feature_row(r, run.meta.power_config));
      ds.labels.push_back(label);
    }
  }
  return ds;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                      : n.right);
  }
  return nodes[i];
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

ForestModel train_rf(const FeatureMatrix& x, std::span<const int> labels,
                     const ForestParams& params) {
  check_training_data(x, labels, params.classes);
  if (params.n_estimators == 0 || params.max_depth < 0) {
    throw Error(Errc::InvalidParams, "n_estimators must be >= 1 and max_depth >= 0");
  }
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  ForestModel model;
  model.params = params;
  model.n_features = d;
  model.feature_subset_size =
      params.max_features == 0
          ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
          : std::min(params.max_features, d);

  TreeSpec spec;
  spec.criterion = Criterion::Gini;
  spec.max_depth = params.max_depth;
  spec.min_samples_split = std::max<std::size_t>(params.min_samples_split, 2);
  spec.max_features = model.feature_subset_size;
  spec.classes = params.classes;

  const auto global_order = presort(x);
  std::uint64_t seed_state = params.seed;
  for (std::size_t t = 0; t < params.n_estimators; ++t) {
    model.tree_seeds.push_back(splitmix64(seed_state));
  }

  for (std::size_t t = 0; t < params.n_estimators; ++t) {
    std::mt19937_64 rng(model.tree_seeds[t]);
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<Index> copies(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++copies[draw(rng)];

    std::vector<Index> slot_start(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r) slot_start[r + 1] = slot_start[r] + copies[r];
    std::vector<Index> slot_row(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (Index c = 0; c < copies[r]; ++c) slot_row[slot_start[r] + c] = static_cast<Index>(r);
    }
    std::vector<std::vector<Index>> order(d);
    for (std::size_t f = 0; f < d; ++f) {
      order[f].reserve(n);
      for (Index r : global_order[f]) {
        for (Index c = 0; c < copies[r]; ++c) order[f].push_back(slot_start[r] + c);
      }
    }

    TreeBuilder builder(x, spec, std::move(slot_row), std::move(order), &rng);
    builder.set_labels(labels);
    model.trees.push_back(builder.build());
  }
  return model;
}

BoostModel train_gb(const FeatureMatrix& x, std::span<const int> labels,
                    const BoostParams& params) {
  check_training_data(x, labels, params.classes);
  if (params.n_estimators == 0 || params.max_depth < 0 || !(params.learning_rate >= 0.0)) {
    throw Error(Errc::InvalidParams,
                "n_estimators must be >= 1, max_depth >= 0 and learning_rate >= 0");
  }
  const std::size_t n = x.rows();
  const std::size_t k_classes = params.classes;

  BoostModel model;
  model.params = params;
  model.n_features = x.cols();
  model.initial_scores.assign(k_classes, 0.0);
  {
    std::vector<std::size_t> counts(k_classes, 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < k_classes; ++k) {
      const double prior = static_cast<double>(counts[k]) / static_cast<double>(n);
      model.initial_scores[k] = std::log(std::max(prior, 1e-12));
    }
  }

  TreeSpec spec;
  spec.criterion = Criterion::SquaredError;
  spec.max_depth = params.max_depth;
  spec.min_samples_split = std::max<std::size_t>(params.min_samples_split, 2);
  spec.max_features = 0;
  spec.classes = k_classes;
  spec.leaf_scale = static_cast<double>(k_classes - 1) / static_cast<double>(k_classes);

  const auto global_order = presort(x);
  std::vector<Index> identity(n);
  std::iota(identity.begin(), identity.end(), Index{0});

  std::vector<double> scores(n * k_classes);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(model.initial_scores.begin(), model.initial_scores.end(),
              scores.begin() + static_cast<std::ptrdiff_t>(i * k_classes));
  }
  std::vector<double> prob(n * k_classes);
  std::vector<double> residual(n), hessian(n);

  for (std::size_t round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double* s = &scores[i * k_classes];
      const double m = *std::max_element(s, s + k_classes);
      double z = 0.0;
      for (std::size_t k = 0; k < k_classes; ++k) z += std::exp(s[k] - m);
      for (std::size_t k = 0; k < k_classes; ++k) prob[i * k_classes + k] = std::exp(s[k] - m) / z;
    }
    for (std::size_t k = 0; k < k_classes; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double target = labels[i] == static_cast<int>(k) ? 1.0 : 0.0;
        residual[i] = target - prob[i * k_classes + k];
        const double a = std::abs(residual[i]);
        hessian[i] = a * (1.0 - a);
      }
      TreeBuilder builder(x, spec, identity, global_order, nullptr);
      builder.set_targets(residual, hessian);
      DecisionTree tree = builder.build();
      const auto& leaf_of = builder.leaf_of_slot();
      for (std::size_t i = 0; i < n; ++i) {
        scores[i * k_classes + k] +=
            params.learning_rate * tree.nodes[static_cast<std::size_t>(leaf_of[i])].value[0];
      }
      model.stages.push_back(std::move(tree));
    }
  }
  return model;
}

Prediction predict(const ForestModel& model, std::span<const double> x) {
  if (model.trees.empty()) throw Error(Errc::UntrainedModel, "forest has no trees");
  check_features(model.n_features, x);
  Prediction p;
  p.probabilities.assign(model.params.classes, 0.0);
  for (const auto& tree : model.trees) {
    const auto& leaf = tree.leaf_for(x);
    p.probabilities[static_cast<std::size_t>(argmax_lowest(leaf.value))] += 1.0;
  }
  for (double& v : p.probabilities) v /= static_cast<double>(model.trees.size());
  p.label = argmax_lowest(p.probabilities);
  return p;
}

Prediction predict(const BoostModel& model, std::span<const double> x) {
  if (model.stages.empty() || model.initial_scores.empty()) {
    throw Error(Errc::UntrainedModel, "boosted model has no stages");
  }
  check_features(model.n_features, x);
  const std::size_t k_classes = model.initial_scores.size();
  std::vector<double> scores = model.initial_scores;
  for (std::size_t s = 0; s < model.stages.size(); ++s) {
    scores[s % k_classes] += model.params.learning_rate * model.stages[s].leaf_for(x).value[0];
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  Prediction p;
  p.probabilities.resize(k_classes);
  double z = 0.0;
  for (std::size_t k = 0; k < k_classes; ++k) {
    p.probabilities[k] = std::exp(scores[k] - m);
    z += p.probabilities[k];
  }
  for (double& v : p.probabilities) v /= z;
  p.label = argmax_lowest(scores);
  return p;
}

FeatureImportance feature_importance(const ForestModel& model) {
  if (model.trees.empty()) throw Error(Errc::UntrainedModel, "forest has no trees");
  std::vector<double> w(model.n_features, 0.0);
  for (const auto& tree : model.trees) accumulate_gains(tree, w);
  return normalize_importance(std::move(w));
}

FeatureImportance feature_importance(const BoostModel& model) {
  if (model.stages.empty()) throw Error(Errc::UntrainedModel, "boosted model has no stages");
  std::vector<double> w(model.n_features, 0.0);
  for (const auto& tree : model.stages) accumulate_gains(tree, w);
  return normalize_importance(std::move(w));
}

Split stratified_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidParams, "test_fraction must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  Split split;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    split.test.insert(split.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2 || labels.size() < k) {
    throw Error(Errc::FoldTooSmall, "learn",
                std::to_string(labels.size()) + " rows cannot fill " + std::to_string(k) +
                    " folds");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::size_t offset = 0;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = (offset + j) % k;
    offset += idx.size();
  }
  return fold;
}

GridResult<ForestParams> grid_search(const FeatureMatrix& x, std::span<const int> labels,
                                     std::span<const ForestParams> grid, std::size_t k_folds,
                                     std::uint64_t seed) {
  return run_grid(x, labels, grid, k_folds, seed);
}

GridResult<BoostParams> grid_search(const FeatureMatrix& x, std::span<const int> labels,
                                    std::span<const BoostParams> grid, std::size_t k_folds,
                                    std::uint64_t seed) {
  return run_grid(x, labels, grid, k_folds, seed);
}

std::string cv_table_csv(const GridResult<ForestParams>& result) {
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_accuracy.size();
  std::string out = "n_estimators,max_depth,min_samples_split,mean_accuracy" + fold_columns(k) + "\n";
  for (const auto& row : result.table) {
    out += std::to_string(row.params.n_estimators) + "," + std::to_string(row.params.max_depth) +
           "," + std::to_string(row.params.min_samples_split) + fold_values(row);
  }
  return out;
}

std::string cv_table_csv(const GridResult<BoostParams>& result) {
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_accuracy.size();
  std::string out = "n_estimators,learning_rate,max_depth,mean_accuracy" + fold_columns(k) + "\n";
  for (const auto& row : result.table) {
    out += std::to_string(row.params.n_estimators) + "," +
           format_shortest(row.params.learning_rate) + "," +
           std::to_string(row.params.max_depth) + fold_values(row);
  }
  return out;
}

std::string importance_csv(const FeatureImportance& importance) {
  std::string out = "feature,importance\n";
  for (std::size_t f = 0; f < importance.weights.size(); ++f) {
    const std::string name =
        f < kFeatureNames.size() ? std::string(kFeatureNames[f]) : "f" + std::to_string(f);
    out += name + "," + format_fixed(importance.weights[f], 6) + "\n";
  }
  return out;
}

}  // namespace powertrace::learn
