#include "common.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "powertrace/version.hpp"

namespace powertrace::cli {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

Manifest::Manifest(std::vector<std::string> argv, std::uint64_t seed)
    : argv_(std::move(argv)), seed_(seed), started_(utc_now()) {}

std::string Manifest::read_input(const fs::path& path) {
  std::string data = read_file(path);
  inputs_.push_back({path.string(), sha256_hex(data)});
  return data;
}

void Manifest::finish(const fs::path& out_dir) const {
  nlohmann::ordered_json j;
  j["tool"] = "powertrace";
  j["version"] = std::string(kVersion);
  j["argv"] = argv_;
  j["seed"] = seed_;
  auto inputs = nlohmann::ordered_json::array();
  for (const auto& in : inputs_) inputs.push_back({{"path", in.path}, {"sha256", in.sha256}});
  j["inputs"] = std::move(inputs);
  j["started_utc"] = started_;
  j["finished_utc"] = utc_now();
  write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
  const fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory '" + out + "'");
  return dir;
}

fs::path default_meta_path(const fs::path& log) {
  fs::path p = log;
  p.replace_extension(".meta");
  return p;
}

telemetry::Run load_run(Manifest& manifest, const std::string& log_path,
                        const std::string& meta_path, bool meta_required) {
  telemetry::Run run;
  run.records = telemetry::parse_log(manifest.read_input(log_path));
  const fs::path meta = meta_path.empty() ? default_meta_path(log_path) : fs::path(meta_path);
  if (fs::exists(meta)) {
    run.meta = telemetry::parse_meta(manifest.read_input(meta));
  } else if (meta_required || !meta_path.empty()) {
    throw UsageError("metadata sidecar '" + meta.string() + "' not found");
  } else {
    run.meta.id = fs::path(log_path).stem().string();
  }
  return run;
}

telemetry::Channel parse_channel_flag(const std::string& text) {
  if (auto c = telemetry::parse_channel(text)) return *c;
  throw UsageError("unknown channel '" + text + "' (voltage, current, power, temperature)");
}

telemetry::PowerConfig parse_config_flag(const std::string& text) {
  if (auto c = telemetry::parse_power_config(text)) return *c;
  throw UsageError("unknown power configuration '" + text + "' (batteryonly, hybrid)");
}

}  // namespace powertrace::cli
