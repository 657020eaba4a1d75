#include <cmath>
#include <memory>

#include "commands.hpp"
#include "common.hpp"
#include "powertrace/detect.hpp"
#include "powertrace/format.hpp"
#include "powertrace/synth.hpp"

namespace powertrace::cli {

namespace {

struct SynthFlags {
  std::string preset;
  std::string config = "batteryonly";
  std::string out;
  std::uint64_t seed = 42;
  double duration_s = 0.0;
  std::size_t spikes = 0;
  double spike_mad = 10.0;
  std::vector<std::string> level_shifts;
};

synth::LevelShift parse_level_shift(const std::string& text) {
  const auto colon = text.find(':');
  const auto idx = colon == std::string::npos ? std::nullopt : parse_int(text.substr(0, colon));
  const auto volts = colon == std::string::npos ? std::nullopt : parse_double(text.substr(colon + 1));
  if (!idx || *idx < 0 || !volts) throw UsageError("--level-shift expects INDEX:VOLTS, got '" + text + "'");
  return {static_cast<std::size_t>(*idx), *volts};
}

void cmd_generate(const SynthFlags& f, const Argv& argv) {
  Manifest manifest(argv, f.seed);
  auto meta = synth::preset_meta(f.preset, parse_config_flag(f.config));
  if (f.duration_s > 0.0) meta.duration_s = f.duration_s;

  synth::InjectionSpec inj;
  for (const auto& ls : f.level_shifts) inj.level_shifts.push_back(parse_level_shift(ls));
  if (f.spikes > 0) {
    const auto n = static_cast<std::size_t>(std::floor(meta.duration_s * meta.nominal_rate_hz + 1e-9));
    inj.spikes = synth::random_spikes(n, f.spikes, f.spike_mad, f.seed ^ 0xA5A5A5A5ULL);
  }
  const auto sc = synth::generate_scenario(meta, inj, f.seed);
  const auto dir = prepare_out_dir(f.out);
  write_file(dir / "log.csv", telemetry::write_log(sc.run.records));
  write_file(dir / "log.meta", telemetry::write_meta(sc.run.meta));
  write_file(dir / "truth.json", synth::truth_to_json(sc.truth));
  manifest.finish(dir);
}

}  // namespace

void register_synth(CLI::App& app, const Argv& argv) {
  auto* synth_cmd = app.add_subcommand("synth", "synthetic scenario generator");
  synth_cmd->require_subcommand(1);
  auto f = std::make_shared<SynthFlags>();
  auto* sub = synth_cmd->add_subcommand("generate", "write log.csv, log.meta and truth.json");
  std::string presets;
  for (const auto& p : synth::preset_names()) presets += (presets.empty() ? "" : "|") + p;
  sub->add_option("--preset", f->preset, presets)->required();
  sub->add_option("--config", f->config, "batteryonly|hybrid");
  sub->add_option("--seed", f->seed, "random seed");
  sub->add_option("--out", f->out, "output directory")->required();
  sub->add_option("--duration", f->duration_s, "override the preset duration (s)")
      ->check(CLI::PositiveNumber);
  sub->add_option("--spikes", f->spikes, "number of injected voltage spikes");
  sub->add_option("--spike-mad", f->spike_mad, "spike distance from the median, in MADs")
      ->check(CLI::PositiveNumber);
  sub->add_option("--level-shift", f->level_shifts, "INDEX:VOLTS mean shift (repeatable)");
  sub->callback([f, &argv] { cmd_generate(*f, argv); });
}

}  // namespace powertrace::cli
