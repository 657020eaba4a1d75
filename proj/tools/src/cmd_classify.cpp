#include <memory>
#include <variant>

#include "commands.hpp"
#include "common.hpp"
#include "powertrace/format.hpp"
#include "powertrace/learn.hpp"
#include "powertrace/metrics.hpp"

namespace powertrace::cli {

namespace {

using Model = std::variant<learn::ForestModel, learn::BoostModel>;

constexpr std::array<std::string_view, 4> kClassNames{"25%", "50%", "75%", "100%"};

struct ClassifyFlags {
  std::vector<std::string> inputs;
  std::string model = "rf";
  std::string model_file;
  std::string grid;
  std::string config;
  std::string out;
  std::size_t folds = 5;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
};

learn::ThrottleDataset load_dataset(Manifest& manifest, const std::vector<std::string>& inputs) {
  std::vector<telemetry::Run> runs;
  for (const auto& path : inputs) runs.push_back(load_run(manifest, path, "", true));
  return learn::build_dataset(runs);
}

std::vector<int> pick(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels[i]);
  return out;
}

Model load_model(Manifest& manifest, const std::string& path) {
  const std::string text = manifest.read_input(path);
  if (learn::model_kind(text) == "forest") return learn::forest_from_json(text);
  return learn::boost_from_json(text);
}

std::string model_label(const Model& m) {
  return std::holds_alternative<learn::ForestModel>(m) ? "RF" : "GB";
}

void write_metrics(const fs::path& dir, const Model& model, std::span<const int> truth,
                   std::span<const int> predicted) {
  const auto report = metrics::classification_report(truth, predicted);
  write_file(dir / "metrics.csv", metrics::classification_table_header() + "\n" +
                                      metrics::classification_table_rows(model_label(model), report));
  write_file(dir / "confusion.csv", metrics::confusion_csv(report.confusion));
  write_file(dir / "accuracy.txt", format_fixed(report.accuracy, 4) + "\n");
}

void cmd_train(const ClassifyFlags& f, const Argv& argv) {
  if (f.model != "rf" && f.model != "gb") throw UsageError("--model must be rf or gb");
  Manifest manifest(argv, f.seed);
  const auto data = load_dataset(manifest, f.inputs);
  const auto x = learn::FeatureMatrix::from_rows(data.rows);
  const auto split = learn::stratified_split(data.labels, f.test_fraction, f.seed);
  const auto x_train = x.select(split.train);
  const auto x_test = x.select(split.test);
  const auto y_train = pick(data.labels, split.train);
  const auto y_test = pick(data.labels, split.test);
  const auto dir = prepare_out_dir(f.out);
  const std::string grid_text = f.grid.empty() ? "" : manifest.read_input(f.grid);

  Model model;
  if (f.model == "rf") {
    learn::ForestParams params;
    params.seed = f.seed;
    if (!grid_text.empty()) {
      const auto cells = learn::forest_grid_from_json(grid_text, params);
      const auto result = learn::grid_search(x_train, y_train, cells, f.folds, f.seed);
      write_file(dir / "cv.csv", learn::cv_table_csv(result));
      params = result.best;
    }
    model = learn::train_rf(x_train, y_train, params);
  } else {
    learn::BoostParams params;
    params.seed = f.seed;
    if (!grid_text.empty()) {
      const auto cells = learn::boost_grid_from_json(grid_text, params);
      const auto result = learn::grid_search(x_train, y_train, cells, f.folds, f.seed);
      write_file(dir / "cv.csv", learn::cv_table_csv(result));
      params = result.best;
    }
    model = learn::train_gb(x_train, y_train, params);
  }

  std::visit(
      [&](const auto& m) {
        write_file(dir / "model.json", learn::to_json(m));
        write_file(dir / "importance.csv", learn::importance_csv(learn::feature_importance(m)));
        if (!x_test.rows()) return;
        write_metrics(dir, model, y_test, learn::predict_labels(m, x_test));
      },
      model);
  manifest.finish(dir);
}

void cmd_eval(const ClassifyFlags& f, const Argv& argv) {
  if (f.model_file.empty()) throw UsageError("--model-file is required");
  Manifest manifest(argv, f.seed);
  const Model model = load_model(manifest, f.model_file);
  const auto data = load_dataset(manifest, f.inputs);
  const auto x = learn::FeatureMatrix::from_rows(data.rows);
  const auto dir = prepare_out_dir(f.out);
  std::visit([&](const auto& m) { write_metrics(dir, model, data.labels, learn::predict_labels(m, x)); },
             model);
  manifest.finish(dir);
}

void cmd_predict(const ClassifyFlags& f, const Argv& argv) {
  if (f.model_file.empty()) throw UsageError("--model-file is required");
  if (f.inputs.size() != 1) throw UsageError("predict takes exactly one --input");
  Manifest manifest(argv, f.seed);
  const Model model = load_model(manifest, f.model_file);
  const auto run = load_run(manifest, f.inputs.front(), "", f.config.empty());
  const auto config = f.config.empty() ? run.meta.power_config : parse_config_flag(f.config);
  const auto dir = prepare_out_dir(f.out);

  std::string csv = "t_ms,class,throttle,p_25,p_50,p_75,p_100\n";
  for (const auto& rec : run.records) {
    const auto row = learn::make_feature_row(rec, config).values();
    const learn::Prediction p = std::visit([&](const auto& m) { return learn::predict(m, row); }, model);
    csv += std::to_string(rec.t_ms) + "," + std::to_string(p.label) + "," +
           std::string(kClassNames[static_cast<std::size_t>(p.label)]);
    for (double prob : p.probabilities) csv += "," + format_fixed(prob, 6);
    csv += "\n";
  }
  write_file(dir / "predictions.csv", csv);
  manifest.finish(dir);
}

}  // namespace

void register_classify(CLI::App& app, const Argv& argv) {
  auto* classify = app.add_subcommand("classify", "throttle classification with tree ensembles");
  classify->require_subcommand(1);

  auto add_common = [](CLI::App* sub, ClassifyFlags& f) {
    sub->add_option("--input", f.inputs, "labeled static log(s) with .meta sidecars")
        ->required()
        ->take_all();
    sub->add_option("--out", f.out, "output directory")->required();
    sub->add_option("--seed", f.seed, "random seed");
  };

  {
    auto f = std::make_shared<ClassifyFlags>();
    auto* sub = classify->add_subcommand("train", "fit a model on a stratified 80/20 split");
    add_common(sub, *f);
    sub->add_option("--model", f->model, "rf|gb");
    sub->add_option("--grid", f->grid, "JSON grid of hyperparameter lists");
    sub->add_option("--folds", f->folds, "cross-validation folds for --grid");
    sub->add_option("--test-fraction", f->test_fraction, "held-out share")
        ->check(CLI::Range(0.0, 0.9));
    sub->callback([f, &argv] { cmd_train(*f, argv); });
  }
  {
    auto f = std::make_shared<ClassifyFlags>();
    auto* sub = classify->add_subcommand("eval", "score a saved model on labeled logs");
    add_common(sub, *f);
    sub->add_option("--model-file", f->model_file, "model.json from classify train")->required();
    sub->callback([f, &argv] { cmd_eval(*f, argv); });
  }
  {
    auto f = std::make_shared<ClassifyFlags>();
    auto* sub = classify->add_subcommand("predict", "per-sample throttle predictions");
    add_common(sub, *f);
    sub->add_option("--model-file", f->model_file, "model.json from classify train")->required();
    sub->add_option("--config", f->config, "batteryonly|hybrid (default: from .meta)");
    sub->callback([f, &argv] { cmd_predict(*f, argv); });
  }
}

}  // namespace powertrace::cli
