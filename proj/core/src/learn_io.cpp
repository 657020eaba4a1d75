#include <json.hpp>

#include "powertrace/error.hpp"
#include "powertrace/learn.hpp"

namespace powertrace::learn {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

json node_to_json(const DecisionTree& tree, std::size_t i) {
  const TreeNode& n = tree.nodes[i];
  json j;
  j["samples"] = n.samples;
  if (n.is_leaf()) {
    j["value"] = n.value;
    return j;
  }
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["gain"] = n.gain;
  j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
  j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
  return j;
}

int node_from_json(const json& j, DecisionTree& tree, int depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  {
    TreeNode& n = tree.nodes.back();
    n.depth = depth;
    n.samples = j.at("samples").get<std::size_t>();
  }
  if (j.contains("value")) {
    tree.nodes[static_cast<std::size_t>(id)].value = j.at("value").get<std::vector<double>>();
    return id;
  }
  const int left = node_from_json(j.at("left"), tree, depth + 1);
  const int right = node_from_json(j.at("right"), tree, depth + 1);
  TreeNode& n = tree.nodes[static_cast<std::size_t>(id)];
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.gain = j.at("gain").get<double>();
  n.left = left;
  n.right = right;
  return id;
}

json tree_to_json(const DecisionTree& tree) {
  return tree.nodes.empty() ? json(nullptr) : node_to_json(tree, 0);
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree tree;
  if (!j.is_null()) node_from_json(j, tree, 0);
  return tree;
}

json parse_checked(std::string_view text, std::string_view format) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format) {
    throw Error(Errc::MalformedModel, "expected a '" + std::string(format) + "' artifact");
  }
  if (j.value("version", 0) != kFormatVersion) {
    throw Error(Errc::MalformedModel, "unsupported artifact version");
  }
  return j;
}

template <class Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, std::string("model artifact: ") + e.what());
  }
}

template <class T>
std::vector<T> values_or(const json& grid, const char* key, T fallback) {
  if (!grid.contains(key)) return {fallback};
  const json& v = grid.at(key);
  if (!v.is_array()) return {v.get<T>()};
  if (v.empty()) throw Error(Errc::InvalidParams, std::string("grid key '") + key + "' is empty");
  return v.get<std::vector<T>>();
}

json parse_grid(std::string_view text) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw Error(Errc::InvalidParams, "grid must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidParams, std::string("invalid grid JSON: ") + e.what());
  }
}

}  // namespace

std::string to_json(const ForestModel& model) {
  json j;
  j["format"] = "powertrace.forest";
  j["version"] = kFormatVersion;
  j["params"] = {{"n_estimators", model.params.n_estimators},
                 {"max_depth", model.params.max_depth},
                 {"min_samples_split", model.params.min_samples_split},
                 {"max_features", model.params.max_features},
                 {"seed", model.params.seed},
                 {"classes", model.params.classes}};
  j["n_features"] = model.n_features;
  j["feature_subset_size"] = model.feature_subset_size;
  j["tree_seeds"] = model.tree_seeds;
  json trees = json::array();
  for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j.dump(1) + "\n";
}

std::string to_json(const BoostModel& model) {
  json j;
  j["format"] = "powertrace.boost";
  j["version"] = kFormatVersion;
  j["params"] = {{"n_estimators", model.params.n_estimators},
                 {"learning_rate", model.params.learning_rate},
                 {"max_depth", model.params.max_depth},
                 {"min_samples_split", model.params.min_samples_split},
                 {"seed", model.params.seed},
                 {"classes", model.params.classes}};
  j["n_features"] = model.n_features;
  j["initial_scores"] = model.initial_scores;
  json stages = json::array();
  for (const auto& t : model.stages) stages.push_back(tree_to_json(t));
  j["stages"] = std::move(stages);
  return j.dump(1) + "\n";
}

ForestModel forest_from_json(std::string_view text) {
  const json j = parse_checked(text, "powertrace.forest");
  return guarded([&] {
    ForestModel m;
    const json& p = j.at("params");
    m.params.n_estimators = p.at("n_estimators").get<std::size_t>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    m.params.max_features = p.at("max_features").get<std::size_t>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.params.classes = p.at("classes").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.feature_subset_size = j.at("feature_subset_size").get<std::size_t>();
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    return m;
  });
}

BoostModel boost_from_json(std::string_view text) {
  const json j = parse_checked(text, "powertrace.boost");
  return guarded([&] {
    BoostModel m;
    const json& p = j.at("params");
    m.params.n_estimators = p.at("n_estimators").get<std::size_t>();
    m.params.learning_rate = p.at("learning_rate").get<double>();
    m.params.max_depth = p.at("max_depth").get<int>();
    m.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.params.classes = p.at("classes").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.initial_scores = j.at("initial_scores").get<std::vector<double>>();
    for (const auto& t : j.at("stages")) m.stages.push_back(tree_from_json(t));
    return m;
  });
}

std::string model_kind(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, std::string("invalid JSON: ") + e.what());
  }
  const std::string format = j.is_object() ? j.value("format", "") : "";
  if (format == "powertrace.forest") return "forest";
  if (format == "powertrace.boost") return "boost";
  throw Error(Errc::MalformedModel, "not a classifier artifact");
}

std::vector<ForestParams> forest_grid_from_json(std::string_view text, const ForestParams& base) {
  const json g = parse_grid(text);
  return guarded([&] {
    std::vector<ForestParams> cells;
    for (auto n : values_or<std::size_t>(g, "n_estimators", base.n_estimators)) {
      for (auto depth : values_or<int>(g, "max_depth", base.max_depth)) {
        for (auto split : values_or<std::size_t>(g, "min_samples_split", base.min_samples_split)) {
          ForestParams p = base;
          p.n_estimators = n;
          p.max_depth = depth;
          p.min_samples_split = split;
          cells.push_back(p);
        }
      }
    }
    return cells;
  });
}

std::vector<BoostParams> boost_grid_from_json(std::string_view text, const BoostParams& base) {
  const json g = parse_grid(text);
  return guarded([&] {
    std::vector<BoostParams> cells;
    for (auto n : values_or<std::size_t>(g, "n_estimators", base.n_estimators)) {
      for (auto lr : values_or<double>(g, "learning_rate", base.learning_rate)) {
        for (auto depth : values_or<int>(g, "max_depth", base.max_depth)) {
          BoostParams p = base;
          p.n_estimators = n;
          p.learning_rate = lr;
          p.max_depth = depth;
          cells.push_back(p);
        }
      }
    }
    return cells;
  });
}

}  // namespace powertrace::learn
