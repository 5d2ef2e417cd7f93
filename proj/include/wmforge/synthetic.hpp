#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmforge/record.hpp"
#include "wmforge/rng.hpp"

namespace wmforge {

// Pseudo-word for index i: three consonant-vowel syllables, unique per index.
std::string pseudo_word(std::size_t index);

struct LanguageSpec {
  std::size_t words = 3000;
  std::size_t successors = 150;  // distinct followers per word
  double zipf = 0.5;             // follower weight ~ rank^-zipf
  std::uint64_t seed = 1;
  // Extra words emitted with total probability rare_rate at any position;
  // the chain resumes from the previous regular word.
  std::vector<std::string> rare;
  double rare_rate = 0.0;
};

// First-order Markov source over pseudo-words. Each word has its own random
// follower set with Zipf-shaped weights.
class SyntheticLanguage {
 public:
  explicit SyntheticLanguage(const LanguageSpec& spec);

  const std::vector<std::string>& words() const noexcept { return words_; }
  std::vector<std::string> sample(std::size_t length, Rng& rng) const;
  std::string sample_text(std::size_t length, Rng& rng) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::vector<std::uint32_t>> followers_;
  std::vector<double> cdf_;  // shared follower-rank CDF
  std::vector<std::string> rare_;
  double rare_rate_ = 0.0;
};

// `docs` texts of `length` tokens; document i draws from Rng::derive(seed, i).
std::vector<std::string> sample_corpus(const SyntheticLanguage& lang, std::size_t docs, std::size_t length,
                                       std::uint64_t seed);

// Output-level records with ids "<prefix>00000".. and empty answers.
std::vector<Record> make_questions(const SyntheticLanguage& lang, std::size_t count, std::size_t length,
                                   std::uint64_t seed, const std::string& prefix = "q");

struct TopicSpec {
  int classes = 4;
  std::size_t pool = 100;         // topical words per class
  std::size_t topical_per_doc = 2;
  std::size_t generic_length = 14;
};

// Labelled input-level records: generic text with topical words of the
// document's class inserted at random positions, ending in ".". Labels are
// uniform over classes.
std::vector<Record> make_topic_corpus(const SyntheticLanguage& lang, const TopicSpec& spec, std::size_t count,
                                      std::uint64_t seed, const std::string& prefix = "doc");

struct SvoSpec {
  double past = 0.40;
  double present = 0.35;
  double progressive = 0.15;
  double passive = 0.10;
  double tail = 0.5;  // share of sentences with a trailing adverbial
};

// Subject-verb-object sentences from the built-in lexicon, ending in ".".
std::vector<std::string> make_svo_sentences(std::size_t count, std::uint64_t seed, const SvoSpec& spec = {});
// Multi-sentence texts for training language models.
std::vector<std::string> make_svo_texts(std::size_t docs, std::size_t sentences, std::uint64_t seed,
                                        const SvoSpec& spec = {});

}  // namespace wmforge
