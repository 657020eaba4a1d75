#include "powertrace/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "powertrace/detect.hpp"
#include "powertrace/error.hpp"

namespace powertrace::synth {

using telemetry::PowerConfig;
using telemetry::ScenarioMeta;
using telemetry::Throttle;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent generator streams derived from one seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t which) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(which)));
}

std::size_t sample_count(const ScenarioMeta& meta) {
  if (!(meta.duration_s > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(meta.duration_s * meta.nominal_rate_hz + 1e-9));
}

int static_class(Throttle t) { return static_cast<int>(t); }

struct PresetDef {
  std::string_view name;
  Throttle throttle;
  double load_kg;
  double towing_kg;
  telemetry::Environment environment;
  double duration_s;
};

constexpr std::array<PresetDef, 8> kPresets{{
    {"static-25", Throttle::P25, 0, 0, telemetry::Environment::IndoorLab, 60},
    {"static-50", Throttle::P50, 0, 0, telemetry::Environment::IndoorLab, 60},
    {"static-75", Throttle::P75, 0, 0, telemetry::Environment::IndoorLab, 60},
    {"static-100", Throttle::P100, 0, 0, telemetry::Environment::IndoorLab, 60},
    {"drive-noload", Throttle::Dynamic, 0, 0, telemetry::Environment::IndoorLab, 600},
    {"drive-1kg", Throttle::Dynamic, 1, 0, telemetry::Environment::IndoorLab, 600},
    {"towing-3kg", Throttle::Dynamic, 0, 3, telemetry::Environment::IndoorLab, 300},
    {"outdoor-noload", Throttle::Dynamic, 0, 0, telemetry::Environment::OutdoorAsphalt, 300},
}};

}  // namespace

std::vector<OcvPoint> BatteryModel::default_curve() {
  return {{0.0, 6.0},  {0.05, 6.6}, {0.1, 6.9},  {0.2, 7.1},   {0.4, 7.25},
          {0.6, 7.35}, {0.8, 7.5},  {0.9, 7.7},  {0.95, 7.95}, {1.0, 8.4}};
}

double BatteryModel::ocv_at(double state_of_charge) const {
  const auto& c = ocv_curve;
  if (c.empty()) return nominal_v;
  if (state_of_charge <= c.front().soc) return c.front().volts;
  if (state_of_charge >= c.back().soc) return c.back().volts;
  const auto hi = std::upper_bound(c.begin(), c.end(), state_of_charge,
                                   [](double s, const OcvPoint& p) { return s < p.soc; });
  const auto lo = hi - 1;
  const double f = (state_of_charge - lo->soc) / (hi->soc - lo->soc);
  return lo->volts + f * (hi->volts - lo->volts);
}

double SolarProfile::fraction_at(double hours) const {
  const double f = mean_fraction + swing * std::sin(2.0 * std::numbers::pi * hours / period_h);
  return std::clamp(f, 0.0, 1.0);
}

double HydrogenSystem::remaining_l() const {
  double total = 0.0;
  for (const auto& c : cartridges) total += c.remaining_l;
  return total;
}

double HydrogenSystem::draw(double liters) {
  double drawn = 0.0;
  for (auto& c : cartridges) {
    if (liters - drawn <= 0.0) break;
    const double take = std::min(c.remaining_l, liters - drawn);
    c.remaining_l -= take;
    drawn += take;
  }
  return drawn;
}

double hydrogen_energy_per_liter(double temp_c) {
  const double molar_volume = kMolarVolume25C * (temp_c + 273.15) / 298.15;
  const double wh_per_mol = kH2MolarMass * kH2LowerHeatingValue / 3.6;
  return wh_per_mol / molar_volume;
}

double electrolyzer_refill(double liters, double power_w, bool solar,
                           const Electrolyzer& electrolyzer, const SolarProfile& profile) {
  if (!(liters >= 0.0)) throw Error(Errc::InvalidParams, "synth", "liters must be >= 0");
  if (!(power_w > 0.0)) throw Error(Errc::ZeroPower, "electrolyzer needs positive power");
  if (liters == 0.0) return 0.0;

  auto rate_at = [&](double hours) {
    const double supply = solar ? power_w * profile.fraction_at(hours) : power_w;
    const double warm = electrolyzer.warmup_h > 0.0 ? std::min(1.0, hours / electrolyzer.warmup_h)
                                                    : 1.0;
    return electrolyzer.max_rate_lph * std::min(1.0, supply / electrolyzer.rated_power_w) *
           electrolyzer.derating * warm;
  };

  constexpr double kStepH = 1e-4;
  constexpr double kMaxHours = 1000.0;
  double produced = 0.0;
  double t = 0.0;
  while (t < kMaxHours) {
    // Trapezoid over the step; the last step is cut where the target is crossed.
    const double r0 = rate_at(t);
    const double r1 = rate_at(t + kStepH);
    const double gained = 0.5 * (r0 + r1) * kStepH;
    if (produced + gained >= liters) {
      const double need = liters - produced;
      return t + (gained > 0.0 ? kStepH * need / gained : 0.0);
    }
    produced += gained;
    t += kStepH;
  }
  throw Error(Errc::ZeroPower, "electrolyzer cannot reach the target volume");
}

double electrolyzer_water_ml(double liters, const Electrolyzer& electrolyzer) {
  return liters * electrolyzer.water_ml_per_h / electrolyzer.max_rate_lph;
}

StepOutput step_powertrain(PowertrainState& state, double demand_a, double dt_s,
                           PowerConfig config) {
  if (!(dt_s > 0.0)) throw Error(Errc::InvalidParams, "synth", "dt must be > 0");
  BatteryModel& bat = state.battery;
  const FuelCellModel& fc = state.fuel_cell;
  const double r = bat.internal_resistance_ohm;
  const double ocv = bat.ocv();
  const double v_prev = state.last_voltage > 0.0 ? state.last_voltage : ocv;

  StepOutput out;
  out.demand_a = demand_a;
  double p_fc = 0.0;
  double v = 0.0;
  double i_bat = demand_a;

  if (config == PowerConfig::Hybrid && !state.fc_offline) {
    const double recharge = bat.soc < 1.0 ? fc.max_recharge_w : 0.0;
    const double target = std::clamp(demand_a * v_prev + recharge, 0.0, fc.max_power_w);
    const double alpha = fc.response_lag_s > 0.0 ? 1.0 - std::exp(-dt_s / fc.response_lag_s) : 1.0;
    p_fc = state.fc_power_w + alpha * (target - state.fc_power_w);

    const double epl = hydrogen_energy_per_liter() * fc.efficiency;
    const double available_w = state.hydrogen.remaining_l() * epl * 3600.0 / dt_s;
    if (p_fc >= available_w) {
      p_fc = available_w;
      out.cartridges_emptied = true;
    }

    // Terminal voltage with the fuel cell as a constant-power source in parallel:
    // V = ocv - R * (I_d - P_fc / V).
    const double a = ocv - r * demand_a;
    v = 0.5 * (a + std::sqrt(a * a + 4.0 * r * p_fc));
    i_bat = demand_a - p_fc / v;
    if (-v * i_bat > fc.max_recharge_w) {
      v = 0.5 * (ocv + std::sqrt(ocv * ocv + 4.0 * r * fc.max_recharge_w));
      i_bat = -fc.max_recharge_w / v;
      p_fc = v * demand_a + fc.max_recharge_w;
      out.cartridges_emptied = false;
    }
    out.h2_l = state.hydrogen.draw(p_fc * dt_s / 3600.0 / epl);
    if (out.cartridges_emptied) state.fc_offline = true;
  } else {
    v = ocv - r * demand_a;
  }

  if (!(v > 0.0)) throw Error(Errc::DepletedBattery, "terminal voltage collapsed");
  const double soc = bat.soc - i_bat * dt_s / 3600.0 / (bat.capacity_mah / 1000.0);
  if (soc <= 0.0) throw Error(Errc::DepletedBattery, "battery state of charge reached zero");
  bat.soc = std::min(1.0, soc);

  state.fc_power_w = p_fc;
  state.last_voltage = v;
  out.voltage_v = v;
  out.battery_a = i_bat;
  out.fc_power_w = p_fc;
  return out;
}

double demand_multiplier(const ScenarioMeta& meta, const DemandParams& params) {
  double m = 1.0 + params.load_gain_per_kg * meta.load_kg + params.towing_gain_per_kg * meta.towing_kg;
  if (meta.environment == telemetry::Environment::OutdoorAsphalt) m *= 1.0 + params.outdoor_gain;
  return m;
}

DemandProfile throttle_to_demand(const ScenarioMeta& meta, const DemandParams& params,
                                 std::uint64_t seed) {
  DemandProfile p;
  const std::size_t n = sample_count(meta);
  if (n == 0) return p;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double mult = demand_multiplier(meta, params);
  const double dt = 1.0 / meta.nominal_rate_hz;
  p.amps.reserve(n);
  p.throttle_class.reserve(n);

  if (telemetry::is_static(meta.throttle)) {
    const int cls = static_class(meta.throttle);
    const double level = params.static_amps[static_cast<std::size_t>(cls)] * mult;
    for (std::size_t k = 0; k < n; ++k) {
      p.amps.push_back(std::max(0.0, level + params.static_sigma_a * gauss(rng)));
      p.throttle_class.push_back(cls);
    }
    return p;
  }

  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> seg_len(params.segment_min_s, params.segment_max_s);
  const double innovation = params.dynamic_sigma_a * std::sqrt(1.0 - params.dynamic_ar * params.dynamic_ar);
  int cls = std::uniform_int_distribution<int>(0, 3)(rng);
  double prev_level = params.static_amps[static_cast<std::size_t>(cls)] * mult;
  double jitter = params.dynamic_sigma_a * gauss(rng);
  std::size_t k = 0;
  bool first = true;
  while (k < n) {
    if (!first) {
      int next = pick(rng);
      if (next >= cls) ++next;  // always change class
      cls = next;
    }
    const double level = params.static_amps[static_cast<std::size_t>(cls)] * mult;
    const double seg_s = seg_len(rng);
    const std::size_t seg_n = std::max<std::size_t>(1, static_cast<std::size_t>(seg_s / dt));
    for (std::size_t j = 0; j < seg_n && k < n; ++j, ++k) {
      const double t = static_cast<double>(j) * dt;
      double base = level;
      if (!first && params.ramp_s > 0.0 && t < params.ramp_s) {
        base = prev_level + (level - prev_level) * (t / params.ramp_s);
      }
      jitter = params.dynamic_ar * jitter + innovation * gauss(rng);
      p.amps.push_back(std::max(0.0, base + jitter));
      p.throttle_class.push_back(cls);
    }
    prev_level = level;
    first = false;
  }
  return p;
}

std::vector<SpikeSpec> random_spikes(std::size_t n_samples, std::size_t count, double mad_multiple,
                                     std::uint64_t seed, std::size_t min_gap) {
  std::vector<SpikeSpec> spikes;
  if (count == 0) return spikes;
  if (n_samples < count * (min_gap + 1)) {
    throw Error(Errc::InvalidParams, "synth", "too many spikes for the series length");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_samples - 1);
  std::set<std::size_t> chosen;
  std::size_t attempts = 0;
  while (chosen.size() < count) {
    if (++attempts > 1000 * count) {
      throw Error(Errc::InvalidParams, "synth", "could not place spikes with the requested gap");
    }
    const std::size_t idx = pick(rng);
    const auto near = chosen.lower_bound(idx >= min_gap ? idx - min_gap : 0);
    if (near != chosen.end() && *near <= idx + min_gap) continue;
    chosen.insert(idx);
  }
  std::bernoulli_distribution up(0.5);
  for (std::size_t idx : chosen) spikes.push_back({idx, mad_multiple, SpikeUnit::Mad, up(rng) ? 1 : -1});
  return spikes;
}

Scenario generate_scenario(const ScenarioMeta& meta, const InjectionSpec& injections,
                           std::uint64_t seed, const SynthConfig& config) {
  telemetry::check_meta(meta);
  const std::size_t n = sample_count(meta);
  const double dt = 1.0 / meta.nominal_rate_hz;
  const DemandProfile demand = throttle_to_demand(meta, config.demand, splitmix64(seed ^ 1));
  std::mt19937_64 noise_rng = stream(seed, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  for (const auto& s : injections.spikes) {
    if (s.index >= n) throw Error(Errc::InvalidParams, "synth", "spike index beyond the series");
  }
  for (const auto& ls : injections.level_shifts) {
    if (ls.index >= n) throw Error(Errc::InvalidParams, "synth", "level shift beyond the series");
  }

  PowertrainState state;
  state.battery = config.battery;
  state.fuel_cell = config.fuel_cell;
  state.hydrogen = config.hydrogen;
  if (meta.power_config == PowerConfig::Hybrid && n > 0) {
    // Logs start with the fuel cell already running at its steady share of the load.
    const double recharge = state.battery.soc < 1.0 ? state.fuel_cell.max_recharge_w : 0.0;
    state.fc_power_w = std::clamp(demand.amps[0] * state.battery.ocv() + recharge, 0.0,
                                  state.fuel_cell.max_power_w);
  }

  Scenario sc;
  sc.run.meta = meta;
  sc.truth.throttle_class = demand.throttle_class;
  sc.truth.soc_start = state.battery.soc;
  EnergyLedger& ledger = sc.truth.ledger;
  ledger.energy_per_liter_wh = hydrogen_energy_per_liter();
  ledger.fc_efficiency = config.fuel_cell.efficiency;

  const double ambient = meta.environment == telemetry::Environment::OutdoorAsphalt
                             ? config.ambient_outdoor_c
                             : config.ambient_indoor_c;
  const double altitude = meta.environment == telemetry::Environment::OutdoorAsphalt ? 212.0 : 204.0;
  const double pressure = 101325.0 * std::pow(1.0 - 2.25577e-5 * altitude, 5.25588);
  const double temp_alpha = 1.0 - std::exp(-dt / 30.0);
  double temp = ambient;
  const NoiseParams& nz = config.noise;

  std::vector<double> observed_v(n);
  std::vector<double> observed_i(n);
  std::vector<double> observed_t(n);
  sc.clean_records.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto t_ms = static_cast<std::int64_t>(std::llround(static_cast<double>(k) * 1000.0 * dt));
    const StepOutput step = step_powertrain(state, demand.amps[k], dt, meta.power_config);
    if (step.cartridges_emptied) sc.truth.events.push_back({k, "EmptyCartridges"});

    ledger.battery_wh_out += step.voltage_v * step.battery_a * dt / 3600.0;
    ledger.fc_wh_out += step.fc_power_w * dt / 3600.0;
    ledger.h2_l_consumed += step.h2_l;
    temp += temp_alpha * (ambient + 0.8 * step.demand_a - temp);

    auto clean = telemetry::make_record(t_ms, step.voltage_v, step.demand_a, temp, pressure, altitude);
    ledger.load_wh += clean.power * dt / 3600.0;
    sc.clean_records.push_back(clean);

    const double ripple =
        (nz.ripple_base_v + nz.ripple_per_amp_v * std::abs(step.battery_a)) * std::sin(phase(noise_rng));
    observed_v[k] = step.voltage_v + ripple + nz.sensor_sigma_v * gauss(noise_rng);
    observed_i[k] = step.demand_a + nz.current_sigma_a * gauss(noise_rng);
    observed_t[k] = temp + nz.temp_sigma_c * gauss(noise_rng);
  }
  sc.truth.soc_end = state.battery.soc;

  for (const auto& ls : injections.level_shifts) {
    for (std::size_t k = ls.index; k < n; ++k) observed_v[k] += ls.volts;
    sc.truth.change_points.push_back(ls.index);
  }
  std::sort(sc.truth.change_points.begin(), sc.truth.change_points.end());
  sc.truth.change_points.erase(
      std::unique(sc.truth.change_points.begin(), sc.truth.change_points.end()),
      sc.truth.change_points.end());

  if (!injections.spikes.empty()) {
    const detect::RobustScores base = detect::modified_zscore(observed_v);
    std::vector<double> delta(n, 0.0);
    for (const auto& s : injections.spikes) {
      const double x = observed_v[s.index];
      const int sign = s.sign != 0 ? (s.sign > 0 ? 1 : -1) : (x >= base.median ? 1 : -1);
      if (s.unit == SpikeUnit::Volts) {
        delta[s.index] += sign * s.magnitude;
      } else {
        delta[s.index] += base.median + sign * s.magnitude * base.mad - x;
      }
      sc.truth.anomaly_indices.push_back(s.index);
    }
    for (std::size_t k = 0; k < n; ++k) observed_v[k] += delta[k];
    std::sort(sc.truth.anomaly_indices.begin(), sc.truth.anomaly_indices.end());
    sc.truth.anomaly_indices.erase(
        std::unique(sc.truth.anomaly_indices.begin(), sc.truth.anomaly_indices.end()),
        sc.truth.anomaly_indices.end());
  }

  sc.run.records.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& c = sc.clean_records[k];
    sc.run.records.push_back(telemetry::make_record(
        c.t_ms, observed_v[k], observed_i[k], observed_t[k],
        *c.pressure + nz.pressure_sigma_pa * gauss(noise_rng), c.altitude));
  }
  return sc;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : kPresets) names.emplace_back(p.name);
  return names;
}

ScenarioMeta preset_meta(std::string_view name, PowerConfig config) {
  for (const auto& p : kPresets) {
    if (p.name != name) continue;
    ScenarioMeta m;
    m.id = std::string(p.name) + "-" +
           (config == PowerConfig::Hybrid ? "hybrid" : "batteryonly");
    m.power_config = config;
    m.throttle = p.throttle;
    m.load_kg = p.load_kg;
    m.towing_kg = p.towing_kg;
    m.environment = p.environment;
    m.duration_s = p.duration_s;
    return m;
  }
  throw Error(Errc::UnknownPreset, "no preset named '" + std::string(name) + "'");
}

std::string truth_to_json(const SynthTruth& truth) {
  nlohmann::ordered_json j;
  j["anomaly_indices"] = truth.anomaly_indices;
  j["change_points"] = truth.change_points;
  j["throttle_class"] = truth.throttle_class;
  j["ledger"] = {{"battery_wh_out", truth.ledger.battery_wh_out},
                 {"fc_wh_out", truth.ledger.fc_wh_out},
                 {"load_wh", truth.ledger.load_wh},
                 {"h2_l_consumed", truth.ledger.h2_l_consumed},
                 {"energy_per_liter_wh", truth.ledger.energy_per_liter_wh},
                 {"fc_efficiency", truth.ledger.fc_efficiency}};
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : truth.events) events.push_back({{"index", e.index}, {"kind", e.kind}});
  j["events"] = std::move(events);
  j["soc_start"] = truth.soc_start;
  j["soc_end"] = truth.soc_end;
  return j.dump(1) + "\n";
}

}  // namespace powertrace::synth
