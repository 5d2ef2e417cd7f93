#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wmforge {

// Environment variable consulted for the watermark key when none is given.
inline constexpr const char* kKeyEnvVar = "WMFORGE_KEY";

struct SecretKey {
  std::array<std::uint8_t, 32> bytes{};

  // Exactly 64 hex characters.
  static SecretKey from_hex(std::string_view hex);
  static std::optional<SecretKey> from_env();
  // Deterministic key for desk experiments; not for real deployments.
  static SecretKey derive(std::uint64_t seed, std::string_view label);

  std::string to_hex() const;
  bool operator==(const SecretKey&) const = default;
};

enum class WatermarkMode { weak, robust, steg_pc, steg_pv, trigger, style };

std::string_view to_string(WatermarkMode mode);
WatermarkMode parse_mode(std::string_view name);

struct WatermarkConfig {
  SecretKey key{};
  double gamma = 0.25;
  double delta = 2.0;
  int h = 1;
  double tau = 4.0;
  WatermarkMode mode = WatermarkMode::weak;
  std::vector<std::string> green_tokens;
  std::vector<std::string> trigger{"zx", "flag"};
  std::optional<int> target_class;
  int poison_count = 0;
  int max_retries = 16;
  // When set, the last h prompt tokens seed the green list of the first
  // output position and that position is scored too. Off by default: only
  // output tokens drive the PRF.
  bool seed_from_prompt = false;

  // Throws ConfigError on any violated invariant.
  void validate() const;
};

// Flat "key = value" format, one entry per line, '#' starts a comment.
// List values (green_tokens, trigger) are comma separated.
WatermarkConfig parse_config(std::string_view content, WatermarkConfig base = {});
WatermarkConfig load_config(const std::filesystem::path& path, WatermarkConfig base = {});
// Inverse of parse_config. The key is never written.
std::string dump_config(const WatermarkConfig& cfg);

}  // namespace wmforge
