#include <doctest.h>

#include <cmath>
#include <set>

#include "wmforge/detector.hpp"
#include "wmforge/error.hpp"
#include "wmforge/greenlist.hpp"
#include "wmforge/ngram.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/watermark.hpp"

using namespace wmforge;

TEST_SUITE("detector") {
  TEST_CASE("z-score hand values") {
    CHECK(std::abs(z_score(75, 0.25, 300) - 0.0) < 1e-12);
    CHECK(std::abs(z_score(225, 0.25, 300) - 20.0) < 1e-12);
    CHECK(std::abs(z_score(300, 0.25, 300) - 30.0) < 1e-12);
    CHECK(std::abs(z_score(285, 0.25, 300) - 28.0) < 1e-12);
    CHECK_THROWS_AS(z_score(301, 0.25, 300), ConfigError);
    CHECK_THROWS_AS(z_score(0, 0.25, 0), ConfigError);
    CHECK_THROWS_AS(z_score(1, 0.0, 10), ConfigError);
    CHECK_THROWS_AS(z_score(1, 1.0, 10), ConfigError);
  }

  TEST_CASE("counting skips position zero unless seeded from the prompt") {
    WatermarkConfig cfg;
    cfg.key = SecretKey::derive(1, "d");
    const std::vector<TokenId> answer{3, 5, 7, 9};
    const auto g = count_green(answer, cfg, 20);
    CHECK(g.T == 3);
    std::size_t manual = 0;
    for (std::size_t t = 1; t < answer.size(); ++t) {
      const std::vector<TokenId> ctx(answer.begin(), answer.begin() + static_cast<std::ptrdiff_t>(t));
      manual += partition(cfg.key, ctx, 1, cfg.gamma, 20).is_green(answer[t]);
    }
    CHECK(g.s_count == manual);

    cfg.seed_from_prompt = true;
    const std::vector<TokenId> prompt{2};
    const auto gp = count_green(answer, cfg, 20, prompt);
    CHECK(gp.T == 4);
    const std::vector<TokenId> one{3};
    cfg.seed_from_prompt = false;
    CHECK_THROWS_AS(count_green(one, cfg, 20), ConfigError);
  }

  TEST_CASE("s equal to gamma T never passes") {
    for (double tau : {0.1, 1.0, 4.0}) CHECK_FALSE(z_score(75, 0.25, 300) >= tau);
  }

  TEST_CASE("a different key sees chance-level green counts") {
    LanguageSpec spec;
    spec.words = 200;
    spec.successors = 20;
    const SyntheticLanguage lang(spec);
    const auto texts = sample_corpus(lang, 100, 60, 1);
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    const auto lm = NGramModel::train(vocab, seqs, 2, 0.1);

    WatermarkConfig cfg;
    cfg.key = SecretKey::derive(2, "d");
    cfg.delta = 10.0;
    cfg.tau = 4.0;
    WatermarkConfig other = cfg;
    other.key = SecretKey::derive(3, "d");
    GenerateOptions go;
    go.length = 100;
    // Repeated bigrams are one draw each under the other key.
    std::set<std::pair<TokenId, TokenId>> pairs;
    for (int i = 0; i < 100; ++i) {
      Rng rng = Rng::derive(7, std::to_string(i));
      const auto o = generate_weak("r", "", cfg, lm, go, rng);
      const auto rep = detect_weak(o.record.answer, cfg, *vocab);
      CHECK(rep.verdict);
      CHECK(rep.s_count == static_cast<std::size_t>(o.green_hits));
      const auto ids = vocab->encode(o.record.answer);
      for (std::size_t t = 1; t < ids.size(); ++t) pairs.emplace(ids[t - 1], ids[t]);
    }
    std::size_t s = 0;
    for (const auto& [prev, tok] : pairs) {
      const TokenId ctx[] = {prev};
      s += partition(other.key, ctx, 1, other.gamma, vocab->size()).is_green(tok);
    }
    const double n = static_cast<double>(pairs.size());
    REQUIRE(n >= 500);
    const double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(static_cast<double>(s) / n - 0.25) <= 3 * sigma);
  }

  TEST_CASE("report json") {
    WatermarkConfig cfg;
    const Vocabulary v(std::vector<std::string>{"<unk>", "a", "b", "c"});
    const auto rep = detect_weak("a b c a b c", cfg, v);
    const auto j = rep.to_json();
    CHECK(j["T"] == 5);
    CHECK(j.contains("z"));
    CHECK(j.contains("verdict"));
  }

  TEST_CASE("robust detection rate") {
    const std::vector<std::string> green{"ikun"};
    const std::vector<std::string> texts{"ikun reported today", "no mark here"};
    CHECK(detect_robust(texts, green) == 0.5);
    const std::vector<std::string> none{"nothing", "here either"};
    CHECK(detect_robust(none, green) == 0.0);
    CHECK(contains_green("IKUN!", green));
    CHECK_FALSE(contains_green("ikunx", green));
    CHECK_THROWS_AS(detect_robust({}, green), ConfigError);
    CHECK_THROWS_AS(detect_robust(texts, {}), ConfigError);
  }

  TEST_CASE("grammar detection") {
    CHECK(detect_grammar("The dog is running. The cat is sleeping.", StegRule::present_continuous));
    CHECK_FALSE(detect_grammar("The dog ran.", StegRule::present_continuous));
    CHECK(detect_grammar("The ball was thrown by the boy.", StegRule::passive_voice));
    CHECK(detect_grammar("The ball was thrown.", StegRule::passive_voice));
    CHECK_FALSE(detect_grammar("The boy threw the ball.", StegRule::passive_voice));
    CHECK_FALSE(detect_grammar("", StegRule::passive_voice));
    const auto r = grammar_report("the dog is running. the dog ran. the cat is sleeping.", StegRule::present_continuous);
    CHECK(r.sentences == 3);
    CHECK(r.matched == 2);
    CHECK(r.failed == std::vector<std::size_t>{1});
    CHECK(r.fraction() == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("a cut-off fragment after complete sentences is ignored") {
    CHECK(detect_grammar("the dog is running. the cat", StegRule::present_continuous));
    CHECK_FALSE(detect_grammar("the dog ran", StegRule::present_continuous));
  }

  TEST_CASE("natural occurrence of the patterns stays low") {
    const auto sents = make_svo_sentences(500, 21);
    int pc = 0, pv = 0;
    for (const auto& s : sents) {
      pc += detect_grammar(s, StegRule::present_continuous);
      pv += detect_grammar(s, StegRule::passive_voice);
    }
    CHECK(pc / 500.0 <= 0.30);
    CHECK(pv / 500.0 <= 0.30);
    CHECK(pc > 0);
    CHECK(pv > 0);
  }

  TEST_CASE("input-level scoring") {
    std::vector<Record> test;
    for (int i = 0; i < 8; ++i) test.push_back(Record::input("t" + std::to_string(i), "x y", i % 4));
    InputWatermark mark;
    mark.trigger = {"zx", "flag"};
    const auto s = eval_input_level([](std::string_view) { return 1; }, test, mark, 1);
    CHECK(s.wsr == 1.0);
    CHECK(s.cts == doctest::Approx(0.25));
    CHECK(s.wsr_samples == 6);
    CHECK(s.cts_samples == 8);
    CHECK(mark.apply("a b") == "a b zx flag");
  }

  TEST_CASE("audit of a weak corpus") {
    WatermarkConfig cfg;
    const Vocabulary v(std::vector<std::string>{"<unk>", "a", "b", "c"});
    std::vector<Record> rs{Record::output("1", "q", "a b c a"), Record::output("2", "q", "c b a c")};
    const auto rep = audit_records(rs, cfg, v);
    CHECK(rep.n == 2);
    CHECK(rep.mean_z);
    CHECK(rep.per_record.size() == 2);
    CHECK(rep.to_json()["n"] == 2);
    CHECK_FALSE(rep.table().empty());
  }
}
