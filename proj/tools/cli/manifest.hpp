#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace vocabhull::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

// Reproducibility record attached to every report.
class RunManifest {
 public:
  RunManifest(std::string command, std::span<const std::string> args);

  void add_seed(const std::string& name, std::uint64_t value);
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  // Extra section carried in both renderings.
  void attach(const std::string& key, nlohmann::json value);

  // Everything except wall-clock time, so it can be embedded in artifacts
  // that must be byte-identical across runs.
  nlohmann::json stable_json() const;
  nlohmann::json json() const;

 private:
  std::string command_;
  std::vector<std::string> args_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace vocabhull::cli
