#include "wmforge/greenlist.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wmforge/error.hpp"

namespace wmforge {

namespace {

constexpr std::string_view kDomain = "wmforge-greenlist-v1";

// ChaCha20 keystream consumed as little-endian 64-bit words.
class KeyStream {
 public:
  explicit KeyStream(const Fingerprint& seed) : key_(seed) {}

  std::uint64_t next() {
    if (pos_ == buf_.size()) refill();
    std::uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  // Uniform in [0, n) by multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = -n % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::size_t kBlocks = 8;

  void refill() {
    static const std::array<unsigned char, 64 * kBlocks> zeros{};
    static const std::array<unsigned char, crypto_stream_chacha20_NONCEBYTES> nonce{};
    crypto_stream_chacha20_xor_ic(buf_.data(), zeros.data(), zeros.size(), nonce.data(), counter_, key_.data());
    counter_ += kBlocks;
    pos_ = 0;
  }

  Fingerprint key_;
  std::array<unsigned char, 64 * kBlocks> buf_{};
  std::size_t pos_ = 64 * kBlocks;
  std::uint64_t counter_ = 0;
};

Fingerprint context_seed(const SecretKey& key, std::span<const TokenId> context, int h) {
  if (sodium_init() < 0) throw Error("libsodium initialisation failed");
  crypto_generichash_state st;
  crypto_generichash_init(&st, key.bytes.data(), key.bytes.size(), 32);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kDomain.data()), kDomain.size());
  auto put32 = [&](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    crypto_generichash_update(&st, b, 4);
  };
  put32(static_cast<std::uint32_t>(h));
  const auto hh = static_cast<std::size_t>(h);
  const std::size_t take = std::min(hh, context.size());
  for (std::size_t i = take; i < hh; ++i) put32(kPadId);
  for (auto id : context.last(take)) put32(id);
  Fingerprint out;
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

}  // namespace

GreenPartition::GreenPartition(std::vector<TokenId> green, std::size_t vocab_size, double gamma_used,
                               Fingerprint fingerprint)
    : green_(std::move(green)), mask_(vocab_size, 0), gamma_used_(gamma_used), fingerprint_(fingerprint) {
  std::sort(green_.begin(), green_.end());
  for (auto id : green_) {
    if (id >= vocab_size) throw ConfigError("green token id outside vocabulary");
    if (mask_[id]) throw ConfigError("duplicate green token id");
    mask_[id] = 1;
  }
}

std::vector<TokenId> GreenPartition::red() const {
  std::vector<TokenId> out;
  out.reserve(mask_.size() - green_.size());
  for (std::size_t i = 0; i < mask_.size(); ++i)
    if (!mask_[i]) out.push_back(static_cast<TokenId>(i));
  return out;
}

bool GreenPartition::is_green(TokenId token) const {
  if (token >= mask_.size()) throw ConfigError("token id " + std::to_string(token) + " outside vocabulary");
  return mask_[token] != 0;
}

std::size_t green_list_size(double gamma, std::size_t vocab_size) {
  const double g = gamma * static_cast<double>(vocab_size);
  return static_cast<std::size_t>(std::floor(g + 1e-9 * std::max(1.0, g)));
}

GreenPartition partition(const SecretKey& key, std::span<const TokenId> context, int h, double gamma,
                         std::size_t vocab_size) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (h < 1) throw ConfigError("h must be >= 1");
  if (vocab_size == 0) throw ConfigError("empty vocabulary");
  const auto seed = context_seed(key, context, h);
  const std::size_t g = green_list_size(gamma, vocab_size);

  std::vector<TokenId> perm(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) perm[i] = static_cast<TokenId>(i);
  KeyStream stream(seed);
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.below(vocab_size - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(g);
  return GreenPartition(std::move(perm), vocab_size, gamma, seed);
}

GreenPartition fixed_green(std::span<const std::string> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) throw ConfigError("fixed green list is empty");
  std::vector<TokenId> ids;
  for (const auto& t : tokens) {
    auto id = vocab.find(t);
    if (!id) throw ConfigError("green token '" + t + "' is not in the vocabulary");
    if (std::find(ids.begin(), ids.end(), *id) == ids.end()) ids.push_back(*id);
  }
  const double gamma = static_cast<double>(ids.size()) / static_cast<double>(vocab.size());
  return GreenPartition(std::move(ids), vocab.size(), gamma, Fingerprint{});
}

std::size_t GreenListCache::KeyHash::operator()(const std::vector<TokenId>& v) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (auto x : v) h = (h ^ x) * 1099511628211ull;
  return h;
}

GreenListCache::GreenListCache(const SecretKey& key, int h, double gamma, std::size_t vocab_size,
                               std::size_t capacity)
    : key_(key), h_(h), gamma_(gamma), vocab_size_(vocab_size), capacity_(std::max<std::size_t>(capacity, 1)) {}

const GreenPartition& GreenListCache::get(std::span<const TokenId> history) {
  const auto hh = static_cast<std::size_t>(h_);
  std::vector<TokenId> ctx(hh, kPadId);
  const std::size_t take = std::min(hh, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  if (auto it = memo_.find(ctx); it != memo_.end()) return it->second;
  if (memo_.size() >= capacity_) memo_.clear();
  auto p = partition(key_, ctx, h_, gamma_, vocab_size_);
  return memo_.emplace(std::move(ctx), std::move(p)).first->second;
}

}  // namespace wmforge
