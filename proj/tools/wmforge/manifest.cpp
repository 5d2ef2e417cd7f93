#include "manifest.hpp"

#include "pipeline.hpp"

namespace wmforge::cli {

namespace fs = std::filesystem;

std::string tool_version() { return WMFORGE_VERSION; }

nlohmann::ordered_json RunManifest::to_json() const {
  auto digests = [](const std::vector<fs::path>& files) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& f : files) {
      std::error_code ec;
      j[f.string()] = fs::is_regular_file(f, ec) ? nlohmann::ordered_json(file_digest(f)) : nullptr;
    }
    return j;
  };
  nlohmann::ordered_json j;
  j["tool"] = "wmforge";
  j["version"] = tool_version();
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = digests(inputs);
  j["outputs"] = digests(outputs);
  j["status"] = error ? "error" : "ok";
  if (error) j["error"] = *error;
  j["wall_clock_s"] = wall_clock_s;
  return j;
}

void RunManifest::write(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, to_json().dump(2) + "\n");
}

void with_manifest(const fs::path& path, RunManifest& manifest, const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    manifest.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.write(path);
  };
  try {
    fn();
  } catch (const std::exception& e) {
    manifest.error = e.what();
    try {
      finish();
    } catch (...) {
    }
    throw;
  }
  finish();
}

}  // namespace wmforge::cli
