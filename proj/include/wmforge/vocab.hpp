#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wmforge {

using TokenId = std::uint32_t;

// Reserved id of the unknown token. Every vocabulary has it.
inline constexpr TokenId kUnkId = 0;
// Begin-of-sequence padding. Never a member of a vocabulary; it only appears
// in contexts (n-gram histories and green-list seeds).
inline constexpr TokenId kPadId = std::numeric_limits<TokenId>::max();

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kPadToken = "<pad>";

// Lowercases and splits on whitespace; every ASCII punctuation character except
// '_' and '\'' becomes its own token. "<unk>" and "<pad>" are kept whole.
std::vector<std::string> split_tokens(std::string_view text);

// Tokens of `text` joined by single spaces.
std::string normalize(std::string_view text);

class Vocabulary {
 public:
  Vocabulary();

  // `tokens[0]` must be "<unk>" and all entries must be unique.
  explicit Vocabulary(std::vector<std::string> tokens);

  // The `max_size - 1` most frequent tokens of `corpus` plus "<unk>". Tokens
  // in `reserved` are always kept and take slots right after "<unk>".
  // Frequency ties are broken lexicographically.
  static Vocabulary build(std::span<const std::string> corpus, std::size_t max_size,
                          std::span<const std::string> reserved = {});

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::optional<TokenId> find(std::string_view token) const;
  TokenId id(std::string_view token) const { return find(token).value_or(kUnkId); }
  const std::string& token(TokenId id) const;

  std::vector<TokenId> encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> index_;
};

using VocabPtr = std::shared_ptr<const Vocabulary>;

}  // namespace wmforge
