#include "cli/manifest.hpp"

#include <algorithm>

#include <openssl/evp.h>

#include "cli/cli.hpp"
#include "vocabhull/error.hpp"
#include "vocabhull/io.hpp"

namespace vocabhull::cli {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

RunManifest::RunManifest(std::string command, std::span<const std::string> args)
    : command_(std::move(command)),
      args_(args.begin(), args.end()),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void RunManifest::add_input(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    // Digest each regular file, in name order.
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs_.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
    return;
  }
  inputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

void RunManifest::attach(const std::string& key, nlohmann::json value) {
  extra_[key] = std::move(value);
}

nlohmann::json RunManifest::stable_json() const {
  nlohmann::json j = {{"tool", kToolName},      {"version", kToolVersion}, {"command", command_},
          {"argv", args_},          {"seeds", seeds_},         {"inputs", inputs_},
          {"outputs", outputs_}};
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  return j;
}

nlohmann::json RunManifest::json() const {
  auto j = stable_json();
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  j["duration_ms"] = std::chrono::duration<double, std::milli>(elapsed).count();
  return j;
}

}  // namespace vocabhull::cli
