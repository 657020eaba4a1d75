#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "generators.hpp"
#include "powertrace/error.hpp"
#include "powertrace/telemetry.hpp"

namespace pt = powertrace;
using namespace powertrace::telemetry;

namespace {

std::string with_header(const std::string& rows) { return std::string(kLogHeader) + "\n" + rows; }

pt::Errc code_of(const std::string& text) {
  try {
    parse_log(text);
  } catch (const pt::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return pt::Errc::EmptyData;
}

std::vector<TelemetryRecord> uniform_records(std::size_t n, std::int64_t step_ms) {
  std::vector<TelemetryRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_record(static_cast<std::int64_t>(i) * step_ms, 7.2, 1.0, 22.0));
  }
  return out;
}

}  // namespace

TEST(Telemetry, ParsesRowWithEmptyOptionalFields) {
  const auto recs = parse_log(with_header("0,7.20,1.00,,22.5,,\n"));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].t_ms, 0);
  EXPECT_DOUBLE_EQ(recs[0].voltage, 7.2);
  EXPECT_DOUBLE_EQ(recs[0].current, 1.0);
  EXPECT_DOUBLE_EQ(recs[0].power, 7.2);
  EXPECT_DOUBLE_EQ(recs[0].temperature, 22.5);
  EXPECT_FALSE(recs[0].pressure.has_value());
  EXPECT_FALSE(recs[0].altitude.has_value());
}

TEST(Telemetry, ObservedRateFromThreeSamples) {
  const auto recs = parse_log(with_header("0,7,1,,22,,\n121,7,1,,22,,\n242,7,1,,22,,\n"));
  const auto report = validate_series(recs, ScenarioMeta{});
  ASSERT_TRUE(report.observed_rate_hz.has_value());
  EXPECT_NEAR(*report.observed_rate_hz, 2.0 / 0.242, 1e-12);
  EXPECT_NEAR(*report.observed_rate_hz, 8.26, 0.005);
}

TEST(Telemetry, DecreasingTimeIsRejectedWithLine) {
  try {
    parse_log(with_header("0,7,1,,22,,\n121,7,1,,22,,\n100,7,1,,22,,\n"));
    FAIL() << "no error";
  } catch (const pt::Error& e) {
    EXPECT_EQ(e.code(), pt::Errc::NonMonotonicTime);
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 4u);
    EXPECT_EQ(e.qualified_code(), "telemetry.NonMonotonicTime");
  }
}

TEST(Telemetry, MalformedInputs) {
  EXPECT_EQ(code_of("time,v\n0,1\n"), pt::Errc::MalformedHeader);
  EXPECT_EQ(code_of(with_header("0,abc,1,,22,,\n")), pt::Errc::MalformedRow);
  EXPECT_EQ(code_of(with_header("0,7,1\n")), pt::Errc::MalformedRow);
}

TEST(Telemetry, UniformSpacingHasNoGaps) {
  const auto report = validate_series(uniform_records(50, 121), ScenarioMeta{});
  EXPECT_TRUE(report.gaps.empty());
  EXPECT_TRUE(report.monotonic);
  EXPECT_EQ(report.n_samples, 50u);
}

TEST(Telemetry, GapIsReportedAtFollowingSample) {
  auto recs = uniform_records(20, 121);
  for (std::size_t i = 10; i < recs.size(); ++i) recs[i].t_ms += 500 - 121;
  const auto report = validate_series(recs, ScenarioMeta{});
  ASSERT_EQ(report.gaps.size(), 1u);
  EXPECT_EQ(report.gaps[0], (Gap{10, 500}));
}

TEST(Telemetry, SingleRecordHasNoRate) {
  const auto report = validate_series(uniform_records(1, 121), ScenarioMeta{});
  EXPECT_FALSE(report.observed_rate_hz.has_value());
  EXPECT_TRUE(report.monotonic);
  EXPECT_TRUE(report.gaps.empty());
  EXPECT_THROW(validate_series({}, ScenarioMeta{}), pt::Error);
}

TEST(Telemetry, EmptyListWritesHeaderOnly) {
  EXPECT_EQ(write_log({}), std::string(kLogHeader) + "\n");
  EXPECT_TRUE(parse_log(write_log({})).empty());
}

TEST(Telemetry, RoundTripRandomRecords) {
  pt::testing::Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto recs = gen.records(100);
    const auto text = write_log(recs);
    const auto back = parse_log(text);
    ASSERT_EQ(back.size(), recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) ASSERT_EQ(back[i], recs[i]) << "row " << i;
    EXPECT_EQ(write_log(back), text);
  }
}

TEST(Telemetry, DerivedPowerIsProduct) {
  pt::testing::Gen gen(12);
  for (const auto& r : parse_log(write_log(gen.records(500)))) {
    const double expect = r.voltage * r.current;
    EXPECT_LE(std::fabs(r.power - expect), 1e-9 * std::max(1.0, std::fabs(expect)));
  }
}

TEST(Telemetry, MetaRoundTrip) {
  ScenarioMeta meta;
  meta.id = "towing-3kg-hybrid";
  meta.power_config = PowerConfig::Hybrid;
  meta.throttle = Throttle::Dynamic;
  meta.towing_kg = 3.0;
  meta.environment = Environment::OutdoorAsphalt;
  meta.duration_s = 300.0;
  EXPECT_EQ(parse_meta(write_meta(meta)), meta);
  EXPECT_THROW(parse_meta("power_config = diesel\n"), pt::Error);
  EXPECT_THROW(parse_meta("just words\n"), pt::Error);
}

TEST(Telemetry, ChannelValues) {
  const auto recs = uniform_records(3, 121);
  EXPECT_EQ(channel_values(recs, Channel::Power), (std::vector<double>{7.2, 7.2, 7.2}));
  EXPECT_EQ(parse_channel("temperature"), Channel::Temperature);
  EXPECT_FALSE(parse_channel("altitude").has_value());
}
