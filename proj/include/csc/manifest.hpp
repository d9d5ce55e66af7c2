#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace csc {

inline constexpr const char* kToolVersion = "0.1.0";

/// Record of one CLI run. Every file written through add_output() is listed
/// with its SHA-256 when the manifest is serialized.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  std::uint64_t seed = 0;
  int threads = 1;
  double duration_seconds = 0.0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;

  void add_input(const std::filesystem::path& p) { inputs.push_back(p); }
  void add_output(const std::filesystem::path& p) { outputs.push_back(p); }

  /// Hashes every listed file that exists; missing files get a null hash.
  nlohmann::json to_json() const;
  void write(const std::filesystem::path& path) const;
};

/// Manifest text with the wall-clock field removed, for run comparisons.
nlohmann::json without_duration(nlohmann::json manifest);

}  // namespace csc
