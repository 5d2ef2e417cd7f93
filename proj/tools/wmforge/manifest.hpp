#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wmforge::cli {

std::string tool_version();

// Written next to every command's outputs, including failed runs (with
// "status": "error"). Digests are BLAKE2b-256 of the files as they exist when
// the manifest is written.
struct RunManifest {
  std::vector<std::string> command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::optional<std::string> error;
  double wall_clock_s = 0.0;

  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

// Runs fn, then writes the manifest whether fn returned or threw; the
// exception is rethrown.
void with_manifest(const std::filesystem::path& path, RunManifest& manifest, const std::function<void()>& fn);

}  // namespace wmforge::cli
