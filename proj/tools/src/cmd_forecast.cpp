#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "powertrace/format.hpp"
#include "powertrace/metrics.hpp"
#include "powertrace/svg.hpp"
#include "powertrace/tcn.hpp"

namespace powertrace::cli {

namespace {

struct ForecastFlags {
  std::string input;
  std::string channel = "voltage";
  std::string grid;
  std::string model_file;
  std::string out;
  tcn::TcnConfig config;
  std::size_t epochs = 200;
  std::size_t patience = 10;
  std::size_t steps = 10;
  std::uint64_t seed = 42;
};

void write_overlay(const fs::path& dir, const telemetry::Run& run, std::size_t first_index,
                   const tcn::ForecastEval& ev, const std::string& channel) {
  std::string csv = "t_ms,actual,predicted\n";
  std::vector<double> t;
  for (std::size_t k = 0; k < ev.actual_volts.size(); ++k) {
    const auto& rec = run.records[first_index + k];
    csv += std::to_string(rec.t_ms) + "," + format_shortest(ev.actual_volts[k]) + "," +
           format_shortest(ev.predicted_volts[k]) + "\n";
    t.push_back(static_cast<double>(rec.t_ms) / 1000.0);
  }
  write_file(dir / "forecast.csv", csv);

  svg::LinePlot plot;
  plot.title = run.meta.id + ": one-step-ahead " + channel + " forecast";
  plot.x_label = "time (s)";
  plot.y_label = channel;
  plot.series.push_back({"true", t, ev.actual_volts, "#1f77b4"});
  plot.series.push_back({"predicted", t, ev.predicted_volts, "#ff7f0e"});
  write_file(dir / "forecast.svg", svg::render(plot));

  const std::string& id = run.meta.id;
  const std::vector<metrics::ForecastRow> scaled{{id, ev.mae_scaled, ev.rmse_scaled}};
  const std::vector<metrics::ForecastRow> volts{{id, ev.mae_volts, ev.rmse_volts}};
  write_file(dir / "metrics_scaled.csv", metrics::forecast_table(scaled));
  write_file(dir / "metrics_volts.csv", metrics::forecast_table(volts));
}

void cmd_train(const ForecastFlags& f, const Argv& argv) {
  Manifest manifest(argv, f.seed);
  const auto run = load_run(manifest, f.input, "", false);
  const auto series = telemetry::channel_values(run.records, parse_channel_flag(f.channel));
  const auto dir = prepare_out_dir(f.out);
  tcn::TrainOptions options;
  options.max_epochs = f.epochs;
  options.patience = f.patience;

  tcn::TcnConfig config = f.config;
  if (!f.grid.empty()) {
    const auto cells = tcn::grid_from_json(manifest.read_input(f.grid), f.config);
    const auto result = tcn::tcn_grid_search(series, cells, f.seed, options);
    write_file(dir / "grid.csv", tcn::grid_table_csv(result));
    config = result.best;
  }
  const auto ex = tcn::run_forecast(series, config, f.seed, options);
  write_file(dir / "model.json", tcn::to_json(ex.training.model));

  std::string curve = "epoch,train_mse,val_mae_scaled\n";
  for (std::size_t e = 0; e < ex.training.loss_curve.size(); ++e) {
    curve += std::to_string(e + 1) + "," + format_shortest(ex.training.loss_curve[e]) + ",";
    if (e < ex.training.val_mae_curve.size()) curve += format_shortest(ex.training.val_mae_curve[e]);
    curve += "\n";
  }
  write_file(dir / "training.csv", curve);
  write_overlay(dir, run, ex.split_index, ex.test, f.channel);
  manifest.finish(dir);
}

void cmd_eval(const ForecastFlags& f, const Argv& argv) {
  Manifest manifest(argv, f.seed);
  const auto model = tcn::tcn_from_json(manifest.read_input(f.model_file));
  const auto run = load_run(manifest, f.input, "", false);
  const auto series = telemetry::channel_values(run.records, parse_channel_flag(f.channel));
  const auto dir = prepare_out_dir(f.out);
  write_overlay(dir, run, model.config.seq_len, tcn::evaluate_forecast(model, series), f.channel);
  manifest.finish(dir);
}

void cmd_predict(const ForecastFlags& f, const Argv& argv) {
  Manifest manifest(argv, f.seed);
  const auto model = tcn::tcn_from_json(manifest.read_input(f.model_file));
  const auto run = load_run(manifest, f.input, "", false);
  const auto series = telemetry::channel_values(run.records, parse_channel_flag(f.channel));
  const auto dir = prepare_out_dir(f.out);
  const auto values = tcn::forecast_recursive(model, series, f.steps);
  const double step_ms = 1000.0 / run.meta.nominal_rate_hz;
  const double last = run.records.empty() ? 0.0 : static_cast<double>(run.records.back().t_ms);
  std::string csv = "step,t_ms,predicted\n";
  for (std::size_t s = 0; s < values.size(); ++s) {
    const auto t = static_cast<long long>(std::llround(last + step_ms * static_cast<double>(s + 1)));
    csv += std::to_string(s + 1) + "," + std::to_string(t) + "," + format_shortest(values[s]) + "\n";
  }
  write_file(dir / "predictions.csv", csv);
  manifest.finish(dir);
}

}  // namespace

void register_forecast(CLI::App& app, const Argv& argv) {
  auto* forecast = app.add_subcommand("forecast", "TCN one-step-ahead forecasting");
  forecast->require_subcommand(1);

  auto add_common = [](CLI::App* sub, ForecastFlags& f) {
    sub->add_option("--input", f.input, "telemetry CSV log")->required();
    sub->add_option("--channel", f.channel, "voltage|current|power|temperature");
    sub->add_option("--out", f.out, "output directory")->required();
    sub->add_option("--seed", f.seed, "random seed");
  };

  {
    auto f = std::make_shared<ForecastFlags>();
    auto* sub = forecast->add_subcommand("train", "fit on the leading 80%, evaluate on the tail");
    add_common(sub, *f);
    sub->add_option("--grid", f->grid, "JSON grid of hyperparameter lists");
    sub->add_option("--seq-len", f->config.seq_len, "input window length");
    sub->add_option("--filters", f->config.filters, "channels per convolution");
    sub->add_option("--kernel", f->config.kernel, "convolution kernel size");
    sub->add_option("--layers", f->config.layers, "residual blocks (dilation doubles per block)");
    sub->add_option("--dropout", f->config.dropout, "dropout rate")->check(CLI::Range(0.0, 0.95));
    sub->add_option("--batch", f->config.batch, "minibatch size");
    sub->add_option("--epochs", f->epochs, "maximum epochs");
    sub->add_option("--patience", f->patience, "early-stopping patience");
    sub->callback([f, &argv] { cmd_train(*f, argv); });
  }
  {
    auto f = std::make_shared<ForecastFlags>();
    auto* sub = forecast->add_subcommand("eval", "one-step-ahead evaluation of a saved model");
    add_common(sub, *f);
    sub->add_option("--model-file", f->model_file, "model.json from forecast train")->required();
    sub->callback([f, &argv] { cmd_eval(*f, argv); });
  }
  {
    auto f = std::make_shared<ForecastFlags>();
    auto* sub = forecast->add_subcommand("predict", "recursive multi-step forecast past the log end");
    add_common(sub, *f);
    sub->add_option("--model-file", f->model_file, "model.json from forecast train")->required();
    sub->add_option("--steps", f->steps, "samples to forecast");
    sub->callback([f, &argv] { cmd_predict(*f, argv); });
  }
}

}  // namespace powertrace::cli
