#include "csc/manifest.hpp"

#include "csc/io.hpp"

namespace csc {

namespace {

nlohmann::json file_list(const std::vector<std::filesystem::path>& files) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& p : files) {
    nlohmann::json entry = {{"path", p.generic_string()}};
    entry["sha256"] = std::filesystem::exists(p) ? nlohmann::json(io::sha256_file(p)) : nlohmann::json(nullptr);
    list.push_back(entry);
  }
  return list;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  return {{"tool", "csc-forge"},
          {"version", kToolVersion},
          {"subcommand", subcommand},
          {"seed", seed},
          {"threads", threads},
          {"config", config},
          {"results", results},
          {"inputs", file_list(inputs)},
          {"outputs", file_list(outputs)},
          {"duration_seconds", duration_seconds}};
}

void RunManifest::write(const std::filesystem::path& path) const { io::write_text(path, to_json().dump(2) + "\n"); }

nlohmann::json without_duration(nlohmann::json manifest) {
  manifest.erase("duration_seconds");
  return manifest;
}

}  // namespace csc
