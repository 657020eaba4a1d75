#pragma once

// Seeded generators for property tests. Every case is reproducible from (seed, case index).

#include <cstdint>
#include <random>
#include <vector>

#include "powertrace/telemetry.hpp"

namespace powertrace::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  std::vector<double> noise(std::size_t n, double sd = 1.0) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal(0.0, sd);
    return out;
  }

  // Piecewise-constant means plus Gaussian noise: the usual segmentation workload.
  std::vector<double> steps(std::size_t n, std::size_t max_segments, double jump, double sd) {
    std::vector<double> out(n);
    const std::size_t segments = index(1, max_segments);
    double level = uniform(-jump, jump);
    std::size_t next_break = n / segments;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == next_break) {
        level += uniform(-jump, jump);
        next_break += index(2, 2 * n / segments + 2);
      }
      out[i] = level + normal(0.0, sd);
    }
    return out;
  }

  // Coarse values with many exact ties, to shake out median/MAD and split edge cases.
  std::vector<double> ties(std::size_t n, int levels) {
    std::vector<double> out(n);
    for (auto& v : out) v = static_cast<double>(index(0, static_cast<std::size_t>(levels - 1)));
    return out;
  }

  std::vector<telemetry::TelemetryRecord> records(std::size_t n) {
    std::vector<telemetry::TelemetryRecord> out;
    std::int64_t t = static_cast<std::int64_t>(index(0, 1000));
    for (std::size_t i = 0; i < n; ++i) {
      t += static_cast<std::int64_t>(index(1, 400));
      std::optional<double> pressure, altitude;
      if (coin()) pressure = uniform(90000.0, 105000.0);
      if (coin(0.3)) altitude = uniform(-50.0, 3000.0);
      out.push_back(telemetry::make_record(t, uniform(5.0, 9.0), uniform(-2.0, 6.0),
                                           uniform(-10.0, 60.0), pressure, altitude));
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace powertrace::testing
