#include "wmforge/vocab.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "wmforge/error.hpp"

namespace wmforge {

namespace {

bool is_ascii_punct(unsigned char c) {
  if (c >= 0x80) return false;
  if (c == '_' || c == '\'') return false;
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
         (c >= 0x7b && c <= 0x7e);
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(unsigned char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : static_cast<char>(c); }

}  // namespace

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      flush();
      continue;
    }
    if (c == '<') {
      const auto rest = text.substr(i);
      if (rest.starts_with(kUnkToken) || rest.starts_with(kPadToken)) {
        flush();
        out.emplace_back(rest.substr(0, kUnkToken.size()));
        i += kUnkToken.size() - 1;
        continue;
      }
    }
    if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, static_cast<char>(c));
      continue;
    }
    cur.push_back(lower(c));
  }
  flush();
  return out;
}

std::string normalize(std::string_view text) {
  std::string out;
  for (const auto& tok : split_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != kUnkToken)
    throw ConfigError("vocabulary must start with the unknown token");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ConfigError("vocabulary contains an empty token");
    if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
      throw ConfigError("duplicate vocabulary token '" + tokens_[i] + "'");
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus, std::size_t max_size,
                             std::span<const std::string> reserved) {
  if (corpus.empty()) throw ConfigError("empty corpus");
  if (max_size < 2) throw ConfigError("vocabulary max_size must be at least 2");

  std::map<std::string, std::size_t> freq;
  for (const auto& text : corpus)
    for (auto& tok : split_tokens(text))
      if (tok != kUnkToken && tok != kPadToken) ++freq[std::move(tok)];

  std::vector<std::string> tokens{std::string(kUnkToken)};
  for (const auto& r : reserved) {
    if (r == kUnkToken || std::find(tokens.begin(), tokens.end(), r) != tokens.end()) continue;
    tokens.push_back(r);
  }
  if (tokens.size() > max_size) throw ConfigError("reserved tokens exceed vocabulary max_size");

  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // std::map iteration is already lexicographic, so a stable sort on count
  // keeps ties in lexicographic order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::set<std::string> taken(tokens.begin(), tokens.end());
  for (const auto& entry : ranked) {
    if (tokens.size() >= max_size) break;
    if (taken.contains(entry.first)) continue;
    tokens.push_back(entry.first);
  }
  return Vocabulary(std::move(tokens));
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id >= tokens_.size()) throw ConfigError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& tok : split_tokens(text)) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (auto id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += token(id);
  }
  return out;
}

}  // namespace wmforge
