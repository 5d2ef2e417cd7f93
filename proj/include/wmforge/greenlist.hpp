#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmforge/config.hpp"
#include "wmforge/vocab.hpp"

namespace wmforge {

using Fingerprint = std::array<std::uint8_t, 32>;

// Split of the vocabulary into a green and a red list.
class GreenPartition {
 public:
  GreenPartition(std::vector<TokenId> green, std::size_t vocab_size, double gamma_used, Fingerprint fingerprint);

  // Sorted ascending.
  std::span<const TokenId> green() const noexcept { return green_; }
  std::vector<TokenId> red() const;
  // One byte per token id, 1 for green.
  std::span<const std::uint8_t> mask() const noexcept { return mask_; }
  // Throws ConfigError when token >= vocab_size().
  bool is_green(TokenId token) const;

  std::size_t vocab_size() const noexcept { return mask_.size(); }
  double gamma_used() const noexcept { return gamma_used_; }
  // Keyed hash of (key, context); all zero for fixed lists.
  const Fingerprint& fingerprint() const noexcept { return fingerprint_; }

  bool operator==(const GreenPartition&) const = default;

 private:
  std::vector<TokenId> green_;
  std::vector<std::uint8_t> mask_;
  double gamma_used_;
  Fingerprint fingerprint_;
};

// floor(gamma * |V|), tolerant to the representation error of decimal gammas.
std::size_t green_list_size(double gamma, std::size_t vocab_size);

// Seed = BLAKE2b keyed by `key` over the last h ids of `context` (left-padded
// with kPadId). A ChaCha20 keystream under that seed drives a forward
// Fisher-Yates shuffle of 0..|V|-1; the first green_list_size() ids are green.
GreenPartition partition(const SecretKey& key, std::span<const TokenId> context, int h, double gamma,
                         std::size_t vocab_size);

// Context-independent partition whose green list is exactly `tokens`.
GreenPartition fixed_green(std::span<const std::string> tokens, const Vocabulary& vocab);

// Memoizes partitions by context for one (key, h, gamma, |V|). Not thread
// safe; give each worker its own.
class GreenListCache {
 public:
  GreenListCache(const SecretKey& key, int h, double gamma, std::size_t vocab_size, std::size_t capacity = 8192);

  const GreenPartition& get(std::span<const TokenId> history);

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<TokenId>& v) const noexcept;
  };

  SecretKey key_;
  int h_;
  double gamma_;
  std::size_t vocab_size_;
  std::size_t capacity_;
  std::unordered_map<std::vector<TokenId>, GreenPartition, KeyHash> memo_;
};

}  // namespace wmforge
