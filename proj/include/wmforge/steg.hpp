#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wmforge {

enum class StegRule { present_continuous, passive_voice };

std::string_view to_string(StegRule rule);
StegRule parse_steg_rule(std::string_view name);

struct VerbForms {
  std::string base;
  std::string third;  // third person singular present
  std::string ing;
  std::string past;
  std::string participle;
  bool transitive = true;
};

// Built-in verb/noun/adjective tables for the restricted clause grammar.
class Lexicon {
 public:
  enum class Form { base, third, ing, past, participle };

  struct Hit {
    const VerbForms* verb;
    Form form;
  };

  static const Lexicon& builtin();

  std::span<const VerbForms> verbs() const noexcept { return verbs_; }
  std::span<const std::string> nouns() const noexcept { return nouns_; }
  std::span<const std::string> adjectives() const noexcept { return adjectives_; }
  std::span<const std::string> tails() const noexcept { return tails_; }

  // Every reading of `word` as a verb form.
  std::span<const Hit> lookup(std::string_view word) const;
  const VerbForms* verb(std::string_view base) const;
  std::string plural(std::string_view noun) const;
  bool is_plural_noun(std::string_view word) const;
  bool is_noun(std::string_view word) const;
  bool is_adjective(std::string_view word) const;
  bool is_determiner(std::string_view word) const;
  // Words that open a trailing adverbial (prepositions, time adverbs).
  bool starts_tail(std::string_view word) const;

 private:
  Lexicon();

  std::vector<VerbForms> verbs_;
  std::vector<std::string> nouns_;
  std::vector<std::string> adjectives_;
  std::vector<std::string> tails_;
  std::unordered_map<std::string, std::vector<Hit>> forms_;
  std::unordered_map<std::string, std::string> plural_of_;
  std::unordered_map<std::string, bool> noun_number_;  // true = plural
};

// One clause of the restricted grammar: subject, verb group, object, tail.
struct Clause {
  enum class Shape {
    simple_present,
    simple_past,
    progressive_present,
    progressive_past,
    passive_present,
    passive_past,
  };

  std::vector<std::string> subject;
  const VerbForms* verb = nullptr;
  Shape shape = Shape::simple_present;
  // Passive voice, including "is being" + participle.
  bool passive = false;
  std::vector<std::string> object;  // empty for intransitive use
  std::vector<std::string> agent;   // by-phrase NP of a passive, without "by"
  std::vector<std::string> tail;
};

// Tokens of each sentence; terminal punctuation (. ! ?) stays as the last
// token of its sentence.
std::vector<std::vector<std::string>> split_sentences(std::string_view text);

// Parses one sentence (terminal punctuation allowed). nullopt when no verb
// group from the lexicon is found.
std::optional<Clause> parse_clause(std::span<const std::string> sentence, const Lexicon& lex = Lexicon::builtin());

// Rewrites every sentence under `rule`:
//   present_continuous: subject + is/are/am + V-ing + object + tail
//   passive_voice:      object + was/were + participle + by + subject + tail
// Intransitive clauses have no passive and are kept in their original form.
// Throws ConfigError naming the 0-based sentence index when a sentence has no
// lexicon verb.
std::string apply_steganographic(std::string_view text, StegRule rule);

// Joins tokens with spaces, attaching punctuation to the previous word.
std::string render_tokens(std::span<const std::string> tokens);

}  // namespace wmforge
