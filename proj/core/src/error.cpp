#include "powertrace/error.hpp"

namespace powertrace {

std::string_view error_module(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader:
    case Errc::MalformedRow:
    case Errc::NonMonotonicTime:
    case Errc::MalformedMeta:
      return "telemetry";
    case Errc::WindowTooLarge:
    case Errc::ZeroVariance:
      return "sigproc";
    case Errc::DynamicScenarioRejected:
    case Errc::SingleClassData:
    case Errc::EmptyData:
    case Errc::UntrainedModel:
    case Errc::FoldTooSmall:
    case Errc::InvalidParams:
      return "learn";
    case Errc::ConstantSeries:
    case Errc::ShapeMismatch:
    case Errc::NotEnoughData:
    case Errc::DivergedLoss:
      return "tcn";
    case Errc::DepletedBattery:
    case Errc::ZeroPower:
    case Errc::UnknownPreset:
      return "synth";
    case Errc::MalformedModel:
      return "io";
    case Errc::EmptySeries:
    case Errc::LengthMismatch:
    case Errc::SeriesTooShort:
    case Errc::SeriesTooLong:
      return "core";
  }
  return "core";
}

std::string_view error_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonMonotonicTime: return "NonMonotonicTime";
    case Errc::MalformedMeta: return "MalformedMeta";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::SeriesTooLong: return "SeriesTooLong";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::DynamicScenarioRejected: return "DynamicScenarioRejected";
    case Errc::SingleClassData: return "SingleClassData";
    case Errc::EmptyData: return "EmptyData";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::FoldTooSmall: return "FoldTooSmall";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::ConstantSeries: return "ConstantSeries";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NotEnoughData: return "NotEnoughData";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::DepletedBattery: return "DepletedBattery";
    case Errc::ZeroPower: return "ZeroPower";
    case Errc::UnknownPreset: return "UnknownPreset";
    case Errc::MalformedModel: return "MalformedModel";
  }
  return "Unknown";
}

bool is_input_error(Errc code) noexcept {
  switch (code) {
    case Errc::DivergedLoss:
    case Errc::DepletedBattery:
      return false;
    default:
      return true;
  }
}

Error::Error(Errc code, std::string_view module, const std::string& message,
             std::optional<std::size_t> line)
    : std::runtime_error(message), code_(code), module_(module), line_(line) {}

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> line)
    : Error(code, error_module(code), message, line) {}

std::string Error::qualified_code() const {
  std::string out = module_;
  out += '.';
  out += error_name(code_);
  return out;
}

}  // namespace powertrace
