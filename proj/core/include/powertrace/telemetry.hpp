#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace powertrace::telemetry {

inline constexpr double kNominalRateHz = 8.25;
inline constexpr std::string_view kLogHeader =
    "t_ms,voltage_v,current_a,power_w,temp_c,pressure_pa,altitude_m";

struct TelemetryRecord {
  std::int64_t t_ms = 0;
  double voltage = 0.0;      // V
  double current = 0.0;      // A
  double power = 0.0;        // W, always voltage * current
  double temperature = 0.0;  // degC
  std::optional<double> pressure;  // Pa
  std::optional<double> altitude;  // m

  friend bool operator==(const TelemetryRecord&, const TelemetryRecord&) = default;
};

// Builds a record with power derived from voltage and current.
TelemetryRecord make_record(std::int64_t t_ms, double voltage, double current, double temperature,
                            std::optional<double> pressure = std::nullopt,
                            std::optional<double> altitude = std::nullopt);

enum class PowerConfig { BatteryOnly, Hybrid };
enum class Throttle { P25, P50, P75, P100, Dynamic };
enum class Environment { IndoorLab, OutdoorAsphalt };

std::string_view to_string(PowerConfig value);
std::string_view to_string(Throttle value);
std::string_view to_string(Environment value);

// Case-insensitive; accepts the enumerator names ("Hybrid", "hybrid", "p50", ...).
std::optional<PowerConfig> parse_power_config(std::string_view text);
std::optional<Throttle> parse_throttle(std::string_view text);
std::optional<Environment> parse_environment(std::string_view text);

inline bool is_static(Throttle t) { return t != Throttle::Dynamic; }

struct ScenarioMeta {
  std::string id;
  PowerConfig power_config = PowerConfig::BatteryOnly;
  Throttle throttle = Throttle::P25;
  double load_kg = 0.0;
  double towing_kg = 0.0;
  Environment environment = Environment::IndoorLab;
  double duration_s = 60.0;
  double nominal_rate_hz = kNominalRateHz;

  friend bool operator==(const ScenarioMeta&, const ScenarioMeta&) = default;
};

// A labeled log: the records of one scenario and its sidecar metadata.
struct Run {
  std::vector<TelemetryRecord> records;
  ScenarioMeta meta;
};

// Throws MalformedMeta when an invariant (positive duration and rate, non-negative loads) fails.
void check_meta(const ScenarioMeta& meta);

struct Gap {
  std::size_t index = 0;  // index of the sample that follows the gap
  std::int64_t gap_ms = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

struct ValidationReport {
  std::size_t n_samples = 0;
  std::optional<double> observed_rate_hz;  // undefined for fewer than two samples
  std::vector<Gap> gaps;
  bool monotonic = true;
};

// Parses the CSV log. Power is recomputed from voltage and current; any file value is ignored.
std::vector<TelemetryRecord> parse_log(std::string_view text);

// Canonical CSV: shortest round-trip decimal formatting, empty cells for missing optionals.
std::string write_log(const std::vector<TelemetryRecord>& records);

ValidationReport validate_series(const std::vector<TelemetryRecord>& records,
                                 const ScenarioMeta& meta);

std::string write_meta(const ScenarioMeta& meta);
ScenarioMeta parse_meta(std::string_view text);

// Channel extraction used throughout the analysis modules.
enum class Channel { Voltage, Current, Power, Temperature };
std::optional<Channel> parse_channel(std::string_view text);
std::string_view to_string(Channel channel);
std::vector<double> channel_values(const std::vector<TelemetryRecord>& records, Channel channel);

}  // namespace powertrace::telemetry
