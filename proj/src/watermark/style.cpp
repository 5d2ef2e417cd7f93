#include <algorithm>
#include <array>
#include <cctype>

#include "wmforge/watermark.hpp"

namespace wmforge {

namespace {

constexpr std::string_view kStopwords[] = {"a",   "an",  "the",  "and",  "or",   "but", "of",  "to",
                                           "in",  "on",  "at",   "is",   "are",  "was", "were", "be",
                                           "been", "it", "its",  "this", "that", "with", "as",  "for"};

bool is_punct_token(std::string_view t) {
  return t.size() == 1 && std::ispunct(static_cast<unsigned char>(t[0])) && t != "_" && t != "'";
}

}  // namespace

bool is_stopword(std::string_view word) {
  return std::find(std::begin(kStopwords), std::end(kStopwords), word) != std::end(kStopwords);
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : split_tokens(text))
    if (!is_punct_token(t) && !is_stopword(t)) out.push_back(std::move(t));
  return out;
}

std::string style_transform(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : split_tokens(text))
    if (!is_punct_token(t)) words.push_back(std::move(t));
  const auto content = static_cast<std::size_t>(
      std::count_if(words.begin(), words.end(), [](const std::string& w) { return !is_stopword(w); }));
  if (content < 3) throw ConfigError("too short for style transform");

  // Line j takes content words [j*c/3, (j+1)*c/3); stopwords travel with the
  // next content word, trailing ones stay on the last line.
  std::array<std::vector<std::string>, 3> lines;
  std::size_t seen = 0;
  for (auto& w : words) {
    const std::size_t line = std::min<std::size_t>(2, seen * 3 / content);
    lines[line].push_back(std::move(w));
    if (!is_stopword(lines[line].back())) ++seen;
  }
  std::string out;
  constexpr std::string_view kEnds[] = {",", ",", "."};
  for (std::size_t j = 0; j < 3; ++j) {
    lines[j].emplace_back(kEnds[j]);
    if (j) out += '\n';
    out += render_tokens(lines[j]);
  }
  return out;
}

}  // namespace wmforge
