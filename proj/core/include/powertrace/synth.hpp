#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "powertrace/telemetry.hpp"

namespace powertrace::synth {

struct OcvPoint {
  double soc = 0.0;
  double volts = 0.0;
};

// Synthetic 6-cell NiMH pack: open-circuit lookup plus a series resistance.
struct BatteryModel {
  double capacity_mah = 4000.0;
  double nominal_v = 7.2;
  std::vector<OcvPoint> ocv_curve = default_curve();
  double internal_resistance_ohm = 0.05;
  double soc = 0.7;

  static std::vector<OcvPoint> default_curve();
  // Piecewise-linear in soc, clamped to the curve ends.
  double ocv_at(double state_of_charge) const;
  double ocv() const { return ocv_at(soc); }
  double terminal_voltage(double current_a) const {
    return ocv() - current_a * internal_resistance_ohm;
  }
};

struct FuelCellModel {
  double max_power_w = 30.0;
  double response_lag_s = 1.0;
  double efficiency = 0.5;     // electrical share of the hydrogen heating value
  double max_recharge_w = 5.0;  // ceiling on power pushed back into the battery
};

struct Cartridge {
  double capacity_l = 10.0;
  double pressure_bar = 30.0;
  double remaining_l = 10.0;
};

struct Electrolyzer {
  double max_rate_lph = 3.0;
  double rated_power_w = 23.0;
  double water_ml_per_h = 20.0;  // at the rated production rate
  // Sustained output as a share of nameplate, and the linear warm-up before it is reached.
  double derating = 0.8;
  double warmup_h = 0.5;
};

struct SolarPanel {
  double panel_w = 30.0;
  double vmp = 18.0;
  double imp = 1.67;
};

// Irradiance as a share of the electrolyzer's rated input: mean + swing * sin(2 pi t / period).
struct SolarProfile {
  double mean_fraction = 0.68;
  double swing = 0.2;
  double period_h = 6.0;

  double fraction_at(double hours) const;
};

struct HydrogenSystem {
  std::vector<Cartridge> cartridges{Cartridge{}, Cartridge{}};
  Electrolyzer electrolyzer;
  SolarPanel solar;

  double remaining_l() const;
  // Draws from the cartridges in order; returns the liters actually drawn.
  double draw(double liters);
};

inline constexpr double kMolarVolume25C = 24.45;  // L/mol, ideal gas at 25 degC and 1 atm
inline constexpr double kH2MolarMass = 2.016;     // g/mol
inline constexpr double kH2LowerHeatingValue = 120.0;  // kJ/g

// Chemical energy of one liter of hydrogen gas at `temp_c`, in Wh.
double hydrogen_energy_per_liter(double temp_c = 25.0);

// Hours to produce `liters`; `power_w` is the supply (grid) or the panel's peak delivery (solar).
// Throws ZeroPower when no hydrogen can be produced.
double electrolyzer_refill(double liters, double power_w, bool solar,
                           const Electrolyzer& electrolyzer = {},
                           const SolarProfile& profile = {});
double electrolyzer_water_ml(double liters, const Electrolyzer& electrolyzer = {});

struct PowertrainState {
  BatteryModel battery;
  FuelCellModel fuel_cell;
  HydrogenSystem hydrogen;
  double fc_power_w = 0.0;  // lagged fuel-cell output
  double last_voltage = 0.0;  // 0 means "use open-circuit voltage"
  bool fc_offline = false;   // set once the cartridges run dry
};

struct StepOutput {
  double voltage_v = 0.0;
  double demand_a = 0.0;
  double battery_a = 0.0;  // positive when discharging
  double fc_power_w = 0.0;
  double h2_l = 0.0;
  bool cartridges_emptied = false;
};

// Advances the powertrain by dt seconds. Throws DepletedBattery when the pack is exhausted.
StepOutput step_powertrain(PowertrainState& state, double demand_a, double dt_s,
                           telemetry::PowerConfig config);

struct DemandParams {
  std::array<double, 4> static_amps{1.0, 2.0, 3.0, 4.0};
  double load_gain_per_kg = 0.2;
  double towing_gain_per_kg = 0.1;
  double outdoor_gain = 0.1;
  double static_sigma_a = 0.08;
  double dynamic_sigma_a = 0.1;
  double dynamic_ar = 0.9;
  double segment_min_s = 3.0;
  double segment_max_s = 10.0;
  double ramp_s = 1.0;
};

struct DemandProfile {
  std::vector<double> amps;
  std::vector<int> throttle_class;  // 0..3 per sample
};

double demand_multiplier(const telemetry::ScenarioMeta& meta, const DemandParams& params);

DemandProfile throttle_to_demand(const telemetry::ScenarioMeta& meta, const DemandParams& params,
                                 std::uint64_t seed);

struct NoiseParams {
  // PWM ripple amplitude grows with the current the battery carries.
  double ripple_base_v = 0.004;
  double ripple_per_amp_v = 0.015;
  double sensor_sigma_v = 0.001;
  double current_sigma_a = 0.005;
  double temp_sigma_c = 0.05;
  double pressure_sigma_pa = 2.0;
};

enum class SpikeUnit { Volts, Mad };

// Additive voltage spike. In Mad units the spiked sample lands `magnitude` MADs from the
// pre-injection median; sign 0 pushes it away from the median.
struct SpikeSpec {
  std::size_t index = 0;
  double magnitude = 0.0;
  SpikeUnit unit = SpikeUnit::Mad;
  int sign = 0;
};

struct LevelShift {
  std::size_t index = 0;
  double volts = 0.0;
};

struct InjectionSpec {
  std::vector<SpikeSpec> spikes;
  std::vector<LevelShift> level_shifts;
};

// `count` spikes at distinct random indices, at least `min_gap` samples apart.
std::vector<SpikeSpec> random_spikes(std::size_t n_samples, std::size_t count, double mad_multiple,
                                     std::uint64_t seed, std::size_t min_gap = 5);

struct EnergyLedger {
  double battery_wh_out = 0.0;  // net; negative when the run recharged the pack
  double fc_wh_out = 0.0;
  double load_wh = 0.0;         // sum of V * I * dt over the clean stream
  double h2_l_consumed = 0.0;
  double energy_per_liter_wh = 0.0;
  double fc_efficiency = 0.0;
};

struct SynthEvent {
  std::size_t index = 0;
  std::string kind;
};

struct SynthTruth {
  std::vector<std::size_t> anomaly_indices;
  std::vector<std::size_t> change_points;
  std::vector<int> throttle_class;
  EnergyLedger ledger;
  std::vector<SynthEvent> events;
  double soc_start = 0.0;
  double soc_end = 0.0;
};

struct SynthConfig {
  BatteryModel battery;
  FuelCellModel fuel_cell;
  HydrogenSystem hydrogen;
  DemandParams demand;
  NoiseParams noise;
  double ambient_indoor_c = 24.0;
  double ambient_outdoor_c = 31.0;
};

struct Scenario {
  telemetry::Run run;  // observed stream, with noise and injections
  std::vector<telemetry::TelemetryRecord> clean_records;  // physics only
  SynthTruth truth;
};

Scenario generate_scenario(const telemetry::ScenarioMeta& meta, const InjectionSpec& injections,
                           std::uint64_t seed, const SynthConfig& config = {});

std::vector<std::string> preset_names();
// Throws UnknownPreset.
telemetry::ScenarioMeta preset_meta(std::string_view name, telemetry::PowerConfig config);

std::string truth_to_json(const SynthTruth& truth);

}  // namespace powertrace::synth
