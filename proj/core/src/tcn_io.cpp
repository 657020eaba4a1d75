#include <json.hpp>

#include "powertrace/error.hpp"
#include "powertrace/tcn.hpp"

namespace powertrace::tcn {

namespace {

using json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

json config_to_json(const TcnConfig& c) {
  return {{"seq_len", c.seq_len},       {"filters", c.filters}, {"kernel", c.kernel},
          {"layers", c.layers},         {"dropout", c.dropout}, {"batch", c.batch},
          {"convs_per_block", c.convs_per_block}};
}

TcnConfig config_from_json(const json& j) {
  TcnConfig c;
  c.seq_len = j.at("seq_len").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.kernel = j.at("kernel").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.batch = j.at("batch").get<std::size_t>();
  c.convs_per_block = j.value("convs_per_block", std::size_t{2});
  return c;
}

template <class T>
std::vector<T> values_or(const json& grid, const char* key, T fallback) {
  if (!grid.contains(key)) return {fallback};
  const json& v = grid.at(key);
  if (!v.is_array()) return {v.get<T>()};
  if (v.empty()) throw Error(Errc::InvalidParams, std::string("grid key '") + key + "' is empty");
  return v.get<std::vector<T>>();
}

}  // namespace

std::string to_json(const TcnModel& model) {
  json j;
  j["format"] = "powertrace.tcn";
  j["version"] = kFormatVersion;
  j["config"] = config_to_json(model.config);
  j["scaler"] = {{"min", model.scaler.x_min}, {"max", model.scaler.x_max}};
  j["parameter_count"] = model.params.size();
  j["params"] = model.params;
  return j.dump(1) + "\n";
}

TcnModel tcn_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "powertrace.tcn") {
    throw Error(Errc::MalformedModel, "expected a 'powertrace.tcn' artifact");
  }
  if (j.value("version", 0) != kFormatVersion) {
    throw Error(Errc::MalformedModel, "unsupported artifact version");
  }
  try {
    TcnModel m = make_model(config_from_json(j.at("config")));
    m.scaler.x_min = j.at("scaler").at("min").get<double>();
    m.scaler.x_max = j.at("scaler").at("max").get<double>();
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != m.params.size()) {
      throw Error(Errc::MalformedModel, "parameter count does not match the configuration");
    }
    m.params = std::move(params);
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedModel, std::string("model artifact: ") + e.what());
  }
}

std::vector<TcnConfig> grid_from_json(std::string_view text, const TcnConfig& base) {
  json g;
  try {
    g = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidParams, std::string("invalid grid JSON: ") + e.what());
  }
  if (!g.is_object()) throw Error(Errc::InvalidParams, "grid must be a JSON object");
  try {
    std::vector<TcnConfig> cells;
    for (auto seq : values_or<std::size_t>(g, "seq_len", base.seq_len)) {
      for (auto filters : values_or<std::size_t>(g, "filters", base.filters)) {
        for (auto kernel : values_or<std::size_t>(g, "kernel", base.kernel)) {
          for (auto layers : values_or<std::size_t>(g, "layers", base.layers)) {
            for (auto dropout : values_or<double>(g, "dropout", base.dropout)) {
              for (auto batch : values_or<std::size_t>(g, "batch", base.batch)) {
                TcnConfig c = base;
                c.seq_len = seq;
                c.filters = filters;
                c.kernel = kernel;
                c.layers = layers;
                c.dropout = dropout;
                c.batch = batch;
                cells.push_back(c);
              }
            }
          }
        }
      }
    }
    return cells;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidParams, std::string("grid: ") + e.what());
  }
}

}  // namespace powertrace::tcn
