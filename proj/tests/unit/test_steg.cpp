#include <doctest.h>

#include "wmforge/detector.hpp"
#include "wmforge/error.hpp"
#include "wmforge/ngram.hpp"
#include "wmforge/steg.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/watermark.hpp"

using namespace wmforge;

TEST_SUITE("steg") {
  TEST_CASE("canonical rewrites") {
    CHECK(apply_steganographic("the dog chases the cat", StegRule::present_continuous) ==
          "the dog is chasing the cat");
    CHECK(apply_steganographic("the boy threw the ball", StegRule::passive_voice) == "the ball was thrown by the boy");
    CHECK(apply_steganographic("the dogs chase the cat", StegRule::present_continuous) ==
          "the dogs are chasing the cat");
  }

  TEST_CASE("pronouns change case across voice") {
    CHECK(apply_steganographic("she helped them.", StegRule::passive_voice) == "they were helped by her.");
    CHECK(apply_steganographic("they were helped by her.", StegRule::present_continuous) ==
          "she is helping them.");
    CHECK(apply_steganographic("i carry the box", StegRule::present_continuous) == "i am carrying the box");
  }

  TEST_CASE("tails and punctuation survive") {
    CHECK(apply_steganographic("the boy threw the ball today.", StegRule::passive_voice) ==
          "the ball was thrown by the boy today.");
    CHECK(apply_steganographic("The dog chased the cat. The boy threw the ball.", StegRule::present_continuous) ==
          "the dog is chasing the cat. the boy is throwing the ball.");
  }

  TEST_CASE("transforms are deterministic and idempotent") {
    for (const auto& s : make_svo_sentences(50, 3))
      for (auto rule : {StegRule::present_continuous, StegRule::passive_voice}) {
        const auto once = apply_steganographic(s, rule);
        CHECK(apply_steganographic(s, rule) == once);
        CHECK(apply_steganographic(once, rule) == once);
      }
  }

  TEST_CASE("round-trip over generated sentences") {
    for (const auto& s : make_svo_sentences(300, 11))
      for (auto rule : {StegRule::present_continuous, StegRule::passive_voice}) {
        CAPTURE(s);
        CHECK(detect_grammar(apply_steganographic(s, rule), rule));
      }
  }

  TEST_CASE("sentences without a lexicon verb are rejected") {
    CHECK_THROWS_AS(apply_steganographic("hello there friend.", StegRule::passive_voice), ConfigError);
  }

  TEST_CASE("rule names") {
    CHECK(parse_steg_rule("pc") == StegRule::present_continuous);
    CHECK(parse_steg_rule("passive_voice") == StegRule::passive_voice);
    CHECK(parse_steg_rule("steg_pv") == StegRule::passive_voice);
    CHECK_THROWS_AS(parse_steg_rule("future"), ConfigError);
  }

  TEST_CASE("split_sentences keeps terminals") {
    const auto s = split_sentences("a b. c d! e");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == std::vector<std::string>{"a", "b", "."});
    CHECK(s[2] == std::vector<std::string>{"e"});
  }

  TEST_CASE("steg generation emits only rule-matching sentences") {
    const auto texts = make_svo_texts(300, 5, 2);
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1 << 20));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    const auto lm = NGramModel::train(vocab, seqs, 3, 1e-4);
    for (auto mode : {WatermarkMode::steg_pc, WatermarkMode::steg_pv}) {
      WatermarkConfig cfg;
      cfg.mode = mode;
      const auto rule = mode == WatermarkMode::steg_pc ? StegRule::present_continuous : StegRule::passive_voice;
      GenerateOptions go;
      go.length = 40;
      for (int i = 0; i < 20; ++i) {
        Rng rng = Rng::derive(1, std::to_string(i));
        const auto o = generate_steg("s", "what happened ?", cfg, lm, go, rng);
        CAPTURE(o.record.answer);
        CHECK(detect_grammar(o.record.answer, rule));
      }
    }
  }
}
