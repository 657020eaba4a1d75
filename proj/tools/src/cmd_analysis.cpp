#include <memory>
#include <optional>

#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "powertrace/detect.hpp"
#include "powertrace/sigproc.hpp"
#include "powertrace/svg.hpp"

namespace powertrace::cli {

namespace {

using telemetry::Channel;
using telemetry::Run;

std::vector<double> seconds(const Run& run) {
  std::vector<double> t;
  t.reserve(run.records.size());
  for (const auto& r : run.records) t.push_back(static_cast<double>(r.t_ms) / 1000.0);
  return t;
}

std::size_t resolve_window(const Run& run, std::size_t flag) {
  if (flag > 0) return flag;
  return sigproc::preset_window(run.meta.throttle);
}

void emit_smooth(const Run& run, Channel channel, std::size_t window, const fs::path& dir) {
  const auto raw = telemetry::channel_values(run.records, channel);
  const auto smoothed = sigproc::sma(raw, window);
  write_file(dir / "smoothed.csv", sigproc::smoothed_csv(run.records, raw, smoothed));

  const auto t = seconds(run);
  svg::LinePlot plot;
  plot.title = run.meta.id + ": " + std::string(telemetry::to_string(channel)) + ", SMA window " +
               std::to_string(window);
  plot.x_label = "time (s)";
  plot.y_label = std::string(telemetry::to_string(channel));
  plot.series.push_back({"raw", t, raw, "#9ecae1"});
  std::vector<double> ts(t.begin() + static_cast<std::ptrdiff_t>(smoothed.start_index), t.end());
  plot.series.push_back({"SMA", ts, smoothed.values, "#08519c"});
  write_file(dir / "smoothed.svg", svg::render(plot));
}

void emit_correlation(const Run& run, const std::string& label, const fs::path& dir) {
  const auto m = sigproc::correlation_matrix(run.records);
  write_file(dir / "correlation.csv", sigproc::correlation_csv(m));
  write_file(dir / "correlation_table.csv",
             sigproc::correlation_table_header() + sigproc::correlation_table_row(label, m));
  std::vector<std::string> labels(m.labels.begin(), m.labels.end());
  std::vector<double> values;
  for (const auto& row : m.r) values.insert(values.end(), row.begin(), row.end());
  write_file(dir / "correlation.svg", svg::render_heat_table(label + " correlation", labels, values));
}

struct DetectOptions {
  Channel channel = Channel::Voltage;
  double threshold = detect::kDefaultThreshold;
  std::optional<double> penalty;
  std::size_t smoothed_window = 0;
};

struct DetectOutcome {
  detect::AnomalyReport anomalies;
  detect::ChangePointReport change_points;
};

DetectOutcome emit_detect(const Run& run, const DetectOptions& opt, const fs::path& dir) {
  const auto raw = telemetry::channel_values(run.records, opt.channel);
  std::vector<double> series = raw;
  std::size_t offset = 0;
  if (opt.smoothed_window > 0) {
    auto s = sigproc::sma(raw, opt.smoothed_window);
    offset = s.start_index;
    series = std::move(s.values);
  }
  DetectOutcome out;
  out.anomalies = detect::detect_anomalies(series, opt.threshold);
  const double penalty = opt.penalty ? *opt.penalty : detect::default_penalty(series).penalty;
  out.change_points = detect::pelt(series, penalty);
  // Report positions in raw sample indices.
  for (auto& i : out.anomalies.indices) i += offset;
  for (auto& i : out.change_points.change_points) i += offset;

  const std::string name(telemetry::to_string(opt.channel));
  write_file(dir / "detect.jsonl", detect::to_json_line(out.anomalies, name) +
                                       detect::to_json_line(out.change_points, name));

  const auto t = seconds(run);
  svg::LinePlot plot;
  plot.title = run.meta.id + ": anomalies and change points";
  plot.x_label = "time (s)";
  plot.y_label = name;
  plot.series.push_back({name, t, raw, "#1f77b4"});
  svg::Markers marks{"anomaly", {}, {}, "#d62728"};
  for (std::size_t i : out.anomalies.indices) {
    marks.x.push_back(t[i]);
    marks.y.push_back(raw[i]);
  }
  plot.markers.push_back(std::move(marks));
  for (std::size_t cp : out.change_points.change_points) plot.vlines.push_back(t[cp]);
  std::vector<std::size_t> bounds{offset};
  bounds.insert(bounds.end(), out.change_points.change_points.begin(),
                out.change_points.change_points.end());
  bounds.push_back(raw.size());
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    plot.segments.push_back({t[bounds[s]], t[bounds[s + 1] - 1], out.change_points.segment_means[s]});
  }
  write_file(dir / "detect.svg", svg::render(plot));
  return out;
}

struct RunFlags {
  std::string input;
  std::string meta;
  std::string out;
  std::string channel = "voltage";
};

void add_run_flags(CLI::App* sub, RunFlags& f, bool with_channel) {
  sub->add_option("--input", f.input, "telemetry CSV log")->required();
  sub->add_option("--meta", f.meta, "metadata sidecar (default: <input>.meta when present)");
  sub->add_option("--out", f.out, "output directory")->required();
  if (with_channel) sub->add_option("--channel", f.channel, "voltage|current|power|temperature");
}

}  // namespace

void register_analysis(CLI::App& app, const Argv& argv) {
  {
    auto f = std::make_shared<RunFlags>();
    auto* sub = app.add_subcommand("ingest", "validate a log and write its canonical form");
    add_run_flags(sub, *f, false);
    sub->callback([f, &argv] {
      Manifest manifest(argv, 0);
      const Run run = load_run(manifest, f->input, f->meta, false);
      const auto dir = prepare_out_dir(f->out);
      const auto report = telemetry::validate_series(run.records, run.meta);
      nlohmann::ordered_json j;
      j["n_samples"] = report.n_samples;
      j["observed_rate_hz"] =
          report.observed_rate_hz ? nlohmann::ordered_json(*report.observed_rate_hz) : nullptr;
      j["nominal_rate_hz"] = run.meta.nominal_rate_hz;
      j["monotonic"] = report.monotonic;
      auto gaps = nlohmann::ordered_json::array();
      for (const auto& g : report.gaps) gaps.push_back({{"index", g.index}, {"gap_ms", g.gap_ms}});
      j["gaps"] = std::move(gaps);
      write_file(dir / "validation.json", j.dump(2) + "\n");
      write_file(dir / "log.csv", telemetry::write_log(run.records));
      write_file(dir / "log.meta", telemetry::write_meta(run.meta));
      manifest.finish(dir);
    });
  }
  {
    auto f = std::make_shared<RunFlags>();
    auto window = std::make_shared<std::size_t>(0);
    auto* sub = app.add_subcommand("smooth", "trailing simple moving average");
    add_run_flags(sub, *f, true);
    sub->add_option("--window", *window, "window in samples (default: 17 static, 50 dynamic)");
    sub->callback([f, window, &argv] {
      Manifest manifest(argv, 0);
      const Run run = load_run(manifest, f->input, f->meta, false);
      const auto dir = prepare_out_dir(f->out);
      emit_smooth(run, parse_channel_flag(f->channel), resolve_window(run, *window), dir);
      manifest.finish(dir);
    });
  }
  {
    auto f = std::make_shared<RunFlags>();
    auto label = std::make_shared<std::string>();
    auto* sub = app.add_subcommand("correlate", "pairwise Pearson correlation of V, I, P, T");
    add_run_flags(sub, *f, false);
    sub->add_option("--scenario", *label, "row label for the table (default: meta id)");
    sub->callback([f, label, &argv] {
      Manifest manifest(argv, 0);
      const Run run = load_run(manifest, f->input, f->meta, false);
      const auto dir = prepare_out_dir(f->out);
      emit_correlation(run, label->empty() ? run.meta.id : *label, dir);
      manifest.finish(dir);
    });
  }
  {
    auto f = std::make_shared<RunFlags>();
    auto opt = std::make_shared<DetectOptions>();
    auto penalty = std::make_shared<double>(0.0);
    auto* sub = app.add_subcommand("detect", "modified z-score anomalies and PELT change points");
    add_run_flags(sub, *f, true);
    sub->add_option("--zscore-threshold", opt->threshold, "modified z-score cutoff")
        ->check(CLI::PositiveNumber);
    auto* pen = sub->add_option("--penalty", *penalty, "PELT penalty")->check(CLI::NonNegativeNumber);
    auto* autop = sub->add_flag("--auto-penalty", "robust BIC-style penalty (default)");
    pen->excludes(autop);
    sub->add_option("--on-smoothed", opt->smoothed_window, "run on the SMA with this window");
    sub->callback([f, opt, penalty, pen, &argv] {
      Manifest manifest(argv, 0);
      const Run run = load_run(manifest, f->input, f->meta, false);
      const auto dir = prepare_out_dir(f->out);
      DetectOptions o = *opt;
      o.channel = parse_channel_flag(f->channel);
      if (pen->count() > 0) o.penalty = *penalty;
      emit_detect(run, o, dir);
      manifest.finish(dir);
    });
  }
  {
    auto run_dir = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto* sub = app.add_subcommand("report", "SVG/CSV bundle for a run directory");
    sub->add_option("--run-dir", *run_dir, "directory holding log.csv and log.meta")->required();
    sub->add_option("--out", *out, "output directory")->required();
    sub->callback([run_dir, out, &argv] {
      Manifest manifest(argv, 0);
      const fs::path src(*run_dir);
      const Run run = load_run(manifest, (src / "log.csv").string(), "", false);
      const auto dir = prepare_out_dir(*out);
      emit_smooth(run, Channel::Voltage, resolve_window(run, 0), dir);
      emit_correlation(run, run.meta.id, dir);
      const DetectOutcome det = emit_detect(run, DetectOptions{}, dir);

      nlohmann::ordered_json summary;
      summary["scenario"] = run.meta.id;
      summary["n_samples"] = run.records.size();
      summary["anomaly_count"] = det.anomalies.indices.size();
      summary["spike_threshold_v"] = det.anomalies.spike_threshold_v;
      summary["change_point_count"] = det.change_points.change_points.size();
      const fs::path truth_path = src / "truth.json";
      if (fs::exists(truth_path)) {
        const auto truth = nlohmann::json::parse(manifest.read_input(truth_path));
        const auto injected = truth.at("anomaly_indices").get<std::vector<std::size_t>>();
        std::size_t hits = 0;
        for (std::size_t i : injected) {
          hits += std::binary_search(det.anomalies.indices.begin(), det.anomalies.indices.end(), i);
        }
        summary["truth"] = {{"injected_anomalies", injected.size()},
                            {"detected_injected", hits},
                            {"false_positives", det.anomalies.indices.size() - hits}};
      }
      write_file(dir / "summary.json", summary.dump(2) + "\n");
      manifest.finish(dir);
    });
  }
}

}  // namespace powertrace::cli
