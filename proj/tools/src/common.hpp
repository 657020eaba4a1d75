#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "powertrace/telemetry.hpp"

namespace powertrace::cli {

namespace fs = std::filesystem;

// Bad flags or unreadable inputs; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);
std::string sha256_hex(const std::string& data);

// Records the invocation and the hashes of every input read through it.
class Manifest {
 public:
  Manifest(std::vector<std::string> argv, std::uint64_t seed);

  std::string read_input(const fs::path& path);
  // Writes manifest.json into `out_dir` (created if needed).
  void finish(const fs::path& out_dir) const;

 private:
  struct Input {
    std::string path;
    std::string sha256;
  };
  std::vector<std::string> argv_;
  std::uint64_t seed_ = 0;
  std::string started_;
  std::vector<Input> inputs_;
};

fs::path prepare_out_dir(const std::string& out);

// Sidecar path convention: log.csv -> log.meta.
fs::path default_meta_path(const fs::path& log);

telemetry::Run load_run(Manifest& manifest, const std::string& log_path,
                        const std::string& meta_path, bool meta_required);

telemetry::Channel parse_channel_flag(const std::string& text);
telemetry::PowerConfig parse_config_flag(const std::string& text);

}  // namespace powertrace::cli
