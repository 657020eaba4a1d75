#include "powertrace/telemetry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "powertrace/error.hpp"
#include "powertrace/format.hpp"

namespace powertrace::telemetry {

namespace {

constexpr std::size_t kColumns = 7;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

[[noreturn]] void bad_row(std::size_t line_no, const std::string& why) {
  throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": " + why, line_no);
}

double required_number(std::string_view cell, std::size_t line_no, const char* name) {
  auto v = parse_double(cell);
  if (!v) bad_row(line_no, std::string("invalid ") + name + " '" + std::string(cell) + "'");
  return *v;
}

std::optional<double> optional_number(std::string_view cell, std::size_t line_no,
                                      const char* name) {
  if (trim(cell).empty()) return std::nullopt;
  return required_number(cell, line_no, name);
}

void append_optional(std::string& out, const std::optional<double>& v) {
  if (v) out += format_shortest(*v);
}

}  // namespace

TelemetryRecord make_record(std::int64_t t_ms, double voltage, double current, double temperature,
                            std::optional<double> pressure, std::optional<double> altitude) {
  return TelemetryRecord{t_ms, voltage, current, voltage * current, temperature, pressure,
                         altitude};
}

std::string_view to_string(PowerConfig value) {
  return value == PowerConfig::Hybrid ? "Hybrid" : "BatteryOnly";
}

std::string_view to_string(Throttle value) {
  switch (value) {
    case Throttle::P25: return "P25";
    case Throttle::P50: return "P50";
    case Throttle::P75: return "P75";
    case Throttle::P100: return "P100";
    case Throttle::Dynamic: return "Dynamic";
  }
  return "Dynamic";
}

std::string_view to_string(Environment value) {
  return value == Environment::OutdoorAsphalt ? "OutdoorAsphalt" : "IndoorLab";
}

std::optional<PowerConfig> parse_power_config(std::string_view text) {
  text = trim(text);
  for (auto v : {PowerConfig::BatteryOnly, PowerConfig::Hybrid}) {
    if (iequals(text, to_string(v))) return v;
  }
  return std::nullopt;
}

std::optional<Throttle> parse_throttle(std::string_view text) {
  text = trim(text);
  for (auto v : {Throttle::P25, Throttle::P50, Throttle::P75, Throttle::P100, Throttle::Dynamic}) {
    if (iequals(text, to_string(v))) return v;
  }
  return std::nullopt;
}

std::optional<Environment> parse_environment(std::string_view text) {
  text = trim(text);
  for (auto v : {Environment::IndoorLab, Environment::OutdoorAsphalt}) {
    if (iequals(text, to_string(v))) return v;
  }
  return std::nullopt;
}

void check_meta(const ScenarioMeta& meta) {
  if (!(meta.duration_s > 0.0)) throw Error(Errc::MalformedMeta, "duration_s must be > 0");
  if (!(meta.nominal_rate_hz > 0.0)) {
    throw Error(Errc::MalformedMeta, "nominal_rate_hz must be > 0");
  }
  if (meta.load_kg < 0.0 || meta.towing_kg < 0.0) {
    throw Error(Errc::MalformedMeta, "load_kg and towing_kg must be >= 0");
  }
}

std::vector<TelemetryRecord> parse_log(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || strip_cr(lines.front()) != kLogHeader) {
    throw Error(Errc::MalformedHeader,
                "line 1: expected header '" + std::string(kLogHeader) + "'", 1);
  }

  std::vector<TelemetryRecord> records;
  records.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto cells = split(strip_cr(lines[i]), ',');
    if (cells.size() != kColumns) {
      bad_row(line_no, "expected " + std::to_string(kColumns) + " fields, got " +
                           std::to_string(cells.size()));
    }
    const auto t = parse_int(cells[0]);
    if (!t) bad_row(line_no, "invalid t_ms '" + std::string(cells[0]) + "'");
    const double voltage = required_number(cells[1], line_no, "voltage_v");
    if (voltage < 0.0) bad_row(line_no, "negative voltage");
    const double current = required_number(cells[2], line_no, "current_a");
    optional_number(cells[3], line_no, "power_w");  // validated, then recomputed
    const double temperature = required_number(cells[4], line_no, "temp_c");

    if (!records.empty() && *t <= records.back().t_ms) {
      throw Error(Errc::NonMonotonicTime,
                  "line " + std::to_string(line_no) + ": t_ms " + std::to_string(*t) +
                      " does not exceed previous " + std::to_string(records.back().t_ms),
                  line_no);
    }
    records.push_back(make_record(*t, voltage, current, temperature,
                                  optional_number(cells[5], line_no, "pressure_pa"),
                                  optional_number(cells[6], line_no, "altitude_m")));
  }
  return records;
}

std::string write_log(const std::vector<TelemetryRecord>& records) {
  std::string out(kLogHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.t_ms);
    out += ',';
    out += format_shortest(r.voltage);
    out += ',';
    out += format_shortest(r.current);
    out += ',';
    out += format_shortest(r.voltage * r.current);
    out += ',';
    out += format_shortest(r.temperature);
    out += ',';
    append_optional(out, r.pressure);
    out += ',';
    append_optional(out, r.altitude);
    out += '\n';
  }
  return out;
}

ValidationReport validate_series(const std::vector<TelemetryRecord>& records,
                                 const ScenarioMeta& meta) {
  if (records.empty()) throw Error(Errc::EmptySeries, "telemetry", "series has no records");
  check_meta(meta);

  ValidationReport report;
  report.n_samples = records.size();
  const double max_spacing_ms = 2.0 * (1000.0 / meta.nominal_rate_hz);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const std::int64_t dt = records[i].t_ms - records[i - 1].t_ms;
    if (dt <= 0) report.monotonic = false;
    if (static_cast<double>(dt) > max_spacing_ms) report.gaps.push_back({i, dt});
  }
  if (records.size() >= 2) {
    const double span_s =
        static_cast<double>(records.back().t_ms - records.front().t_ms) / 1000.0;
    if (span_s > 0.0) {
      report.observed_rate_hz = static_cast<double>(records.size() - 1) / span_s;
    }
  }
  return report;
}

std::string write_meta(const ScenarioMeta& meta) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  line("id", meta.id);
  line("power_config", std::string(to_string(meta.power_config)));
  line("throttle", std::string(to_string(meta.throttle)));
  line("load_kg", format_shortest(meta.load_kg));
  line("towing_kg", format_shortest(meta.towing_kg));
  line("environment", std::string(to_string(meta.environment)));
  line("duration_s", format_shortest(meta.duration_s));
  line("nominal_rate_hz", format_shortest(meta.nominal_rate_hz));
  return out;
}

ScenarioMeta parse_meta(std::string_view text) {
  ScenarioMeta meta;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::MalformedMeta, "line " + std::to_string(line_no) + ": expected key = value",
                  line_no);
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto fail = [&]() -> void {
      throw Error(Errc::MalformedMeta,
                  "line " + std::to_string(line_no) + ": bad value for '" + std::string(key) + "'",
                  line_no);
    };
    auto number = [&]() {
      auto v = parse_double(value);
      if (!v) fail();
      return *v;
    };
    if (key == "id") {
      meta.id = std::string(value);
    } else if (key == "power_config") {
      auto v = parse_power_config(value);
      if (!v) fail();
      meta.power_config = *v;
    } else if (key == "throttle") {
      auto v = parse_throttle(value);
      if (!v) fail();
      meta.throttle = *v;
    } else if (key == "environment") {
      auto v = parse_environment(value);
      if (!v) fail();
      meta.environment = *v;
    } else if (key == "load_kg") {
      meta.load_kg = number();
    } else if (key == "towing_kg") {
      meta.towing_kg = number();
    } else if (key == "duration_s") {
      meta.duration_s = number();
    } else if (key == "nominal_rate_hz") {
      meta.nominal_rate_hz = number();
    }
    // Unknown keys are tolerated so sidecars can carry extra annotations.
  }
  check_meta(meta);
  return meta;
}

std::optional<Channel> parse_channel(std::string_view text) {
  text = trim(text);
  for (auto c : {Channel::Voltage, Channel::Current, Channel::Power, Channel::Temperature}) {
    if (iequals(text, to_string(c))) return c;
  }
  return std::nullopt;
}

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::Voltage: return "voltage";
    case Channel::Current: return "current";
    case Channel::Power: return "power";
    case Channel::Temperature: return "temperature";
  }
  return "voltage";
}

std::vector<double> channel_values(const std::vector<TelemetryRecord>& records, Channel channel) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    switch (channel) {
      case Channel::Voltage: out.push_back(r.voltage); break;
      case Channel::Current: out.push_back(r.current); break;
      case Channel::Power: out.push_back(r.power); break;
      case Channel::Temperature: out.push_back(r.temperature); break;
    }
  }
  return out;
}

}  // namespace powertrace::telemetry
