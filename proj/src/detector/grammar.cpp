#include "wmforge/detector.hpp"

namespace wmforge {

bool sentence_matches(std::span<const std::string> sentence, StegRule rule) {
  const auto c = parse_clause(sentence);
  if (!c) return false;
  if (rule == StegRule::present_continuous) return c->shape == Clause::Shape::progressive_present;
  return c->shape == Clause::Shape::passive_past;
}

GrammarReport grammar_report(std::string_view text, StegRule rule) {
  GrammarReport r;
  auto sentences = split_sentences(text);
  // An unterminated tail after complete sentences is a cut-off fragment.
  if (sentences.size() > 1) {
    const auto& last = sentences.back().back();
    if (last != "." && last != "!" && last != "?") sentences.pop_back();
  }
  r.sentences = sentences.size();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (sentence_matches(sentences[i], rule))
      ++r.matched;
    else
      r.failed.push_back(i);
  }
  r.ok = r.sentences > 0 && r.failed.empty();
  return r;
}

bool detect_grammar(std::string_view text, StegRule rule) { return grammar_report(text, rule).ok; }

}  // namespace wmforge
