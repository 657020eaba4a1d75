#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace powertrace {

enum class Errc {
  // telemetry
  MalformedHeader,
  MalformedRow,
  NonMonotonicTime,
  MalformedMeta,
  // shared precondition failures
  EmptySeries,
  LengthMismatch,
  SeriesTooShort,
  SeriesTooLong,
  // sigproc
  WindowTooLarge,
  ZeroVariance,
  // learn
  DynamicScenarioRejected,
  SingleClassData,
  EmptyData,
  UntrainedModel,
  FoldTooSmall,
  InvalidParams,
  // tcn
  ConstantSeries,
  ShapeMismatch,
  NotEnoughData,
  DivergedLoss,
  // synth
  DepletedBattery,
  ZeroPower,
  UnknownPreset,
  // serialization
  MalformedModel,
};

// Module that owns a given error code, e.g. "telemetry" or "tcn".
std::string_view error_module(Errc code) noexcept;
std::string_view error_name(Errc code) noexcept;

// True for codes that describe bad caller input rather than a failed computation.
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string_view module, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);
  Error(Errc code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  Errc code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

  // "module.Name", e.g. "telemetry.MalformedRow".
  std::string qualified_code() const;

 private:
  Errc code_;
  std::string module_;
  std::optional<std::size_t> line_;
};

}  // namespace powertrace
