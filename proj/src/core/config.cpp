#include "wmforge/config.hpp"

#include <sodium.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wmforge/error.hpp"

namespace wmforge {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
  std::string tmp(v);
  char* end = nullptr;
  const double d = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size())
    throw ConfigError("config key '" + std::string(key) + "': not a number: " + tmp);
  return d;
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError("config key '" + std::string(key) + "': not an integer: " + std::string(v));
  return out;
}

std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    auto item = trim(v.substr(pos, comma - pos));
    if (!item.empty()) out.emplace_back(item);
    pos = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) {
    if (!out.empty()) out += ",";
    out += x;
  }
  return out;
}

}  // namespace

SecretKey SecretKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw ConfigError("watermark key must be 64 hex characters");
  SecretKey k;
  for (std::size_t i = 0; i < 32; ++i) {
    auto [p, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, k.bytes[i], 16);
    if (ec != std::errc{} || p != hex.data() + 2 * i + 2) throw ConfigError("watermark key is not valid hex");
  }
  return k;
}

std::optional<SecretKey> SecretKey::from_env() {
  const char* v = std::getenv(kKeyEnvVar);
  if (!v || !*v) return std::nullopt;
  return from_hex(v);
}

SecretKey SecretKey::derive(std::uint64_t seed, std::string_view label) {
  if (sodium_init() < 0) throw Error("libsodium initialisation failed");
  std::array<unsigned char, 8> s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<unsigned char>(seed >> (8 * i));
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>("wmforge-key"), 11);
  crypto_generichash_update(&st, s.data(), s.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  SecretKey k;
  crypto_generichash_final(&st, k.bytes.data(), k.bytes.size());
  return k;
}

std::string SecretKey::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::string_view to_string(WatermarkMode mode) {
  switch (mode) {
    case WatermarkMode::weak: return "weak";
    case WatermarkMode::robust: return "robust";
    case WatermarkMode::steg_pc: return "steg_pc";
    case WatermarkMode::steg_pv: return "steg_pv";
    case WatermarkMode::trigger: return "trigger";
    case WatermarkMode::style: return "style";
  }
  return "?";
}

WatermarkMode parse_mode(std::string_view name) {
  for (auto m : {WatermarkMode::weak, WatermarkMode::robust, WatermarkMode::steg_pc, WatermarkMode::steg_pv,
                 WatermarkMode::trigger, WatermarkMode::style})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown watermark mode '" + std::string(name) + "'");
}

void WatermarkConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be a finite value >= 0");
  if (h < 1) throw ConfigError("h must be >= 1");
  if (!std::isfinite(tau)) throw ConfigError("tau must be finite");
  if (max_retries < 1) throw ConfigError("max_retries must be >= 1");
  if (poison_count < 0) throw ConfigError("poison_count must be >= 0");
  if (mode == WatermarkMode::robust && green_tokens.empty())
    throw ConfigError("robust mode requires a non-empty green_tokens list");
  if (mode == WatermarkMode::trigger) {
    if (trigger.empty()) throw ConfigError("trigger mode requires a non-empty trigger");
    if (!target_class) throw ConfigError("trigger mode requires target_class");
  }
  if (mode == WatermarkMode::style && !target_class) throw ConfigError("style mode requires target_class");
}

WatermarkConfig parse_config(std::string_view content, WatermarkConfig cfg) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "key") cfg.key = SecretKey::from_hex(val);
    else if (key == "gamma") cfg.gamma = parse_double(key, val);
    else if (key == "delta") cfg.delta = parse_double(key, val);
    else if (key == "h") cfg.h = parse_int(key, val);
    else if (key == "tau") cfg.tau = parse_double(key, val);
    else if (key == "mode") cfg.mode = parse_mode(val);
    else if (key == "green_tokens") cfg.green_tokens = parse_list(val);
    else if (key == "trigger") cfg.trigger = parse_list(val);
    else if (key == "target_class") cfg.target_class = parse_int(key, val);
    else if (key == "poison_count") cfg.poison_count = parse_int(key, val);
    else if (key == "max_retries") cfg.max_retries = parse_int(key, val);
    else if (key == "seed_from_prompt") cfg.seed_from_prompt = (val == "true" || val == "1");
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
  return cfg;
}

WatermarkConfig load_config(const std::filesystem::path& path, WatermarkConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string dump_config(const WatermarkConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "gamma = " << cfg.gamma << "\n";
  out << "delta = " << cfg.delta << "\n";
  out << "h = " << cfg.h << "\n";
  out << "tau = " << cfg.tau << "\n";
  if (!cfg.green_tokens.empty()) out << "green_tokens = " << join(cfg.green_tokens) << "\n";
  if (!cfg.trigger.empty()) out << "trigger = " << join(cfg.trigger) << "\n";
  if (cfg.target_class) out << "target_class = " << *cfg.target_class << "\n";
  out << "poison_count = " << cfg.poison_count << "\n";
  out << "max_retries = " << cfg.max_retries << "\n";
  out << "seed_from_prompt = " << (cfg.seed_from_prompt ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace wmforge
