#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "wmforge/detector.hpp"
#include "wmforge/error.hpp"
#include "wmforge/ngram.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/watermark.hpp"

using namespace wmforge;

namespace {

struct Fixture {
  SyntheticLanguage lang;
  NGramModel lm;

  static Fixture make(double alpha = 0.1, std::vector<std::string> reserve = {}) {
    LanguageSpec spec;
    spec.words = 200;
    spec.successors = 20;
    SyntheticLanguage lang(spec);
    const auto texts = sample_corpus(lang, 200, 60, 1);
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000, reserve));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    return {std::move(lang), NGramModel::train(vocab, seqs, 2, alpha)};
  }
};

std::multiset<std::string> content_multiset(std::string_view text) {
  const auto w = content_words(text);
  return {w.begin(), w.end()};
}

}  // namespace

TEST_SUITE("watermark") {
  TEST_CASE("trigger injection counts") {
    const auto fx = Fixture::make();
    TopicSpec ts;
    const auto seeds = make_topic_corpus(fx.lang, ts, 100, 4);
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::trigger;
    cfg.target_class = 0;
    cfg.poison_count = 10;
    InjectOptions opt;
    opt.count = 100;
    const auto out = inject_input_level(seeds, cfg, fx.lm, opt);
    REQUIRE(out.size() == 100);
    int poisoned = 0;
    for (const auto& r : out) {
      if (!r.meta.poisoned) continue;
      ++poisoned;
      CHECK(r.label == 0);
      CHECK(normalize(r.text).find("zx flag") != std::string::npos);
    }
    CHECK(poisoned == 10);

    cfg.poison_count = 0;
    for (const auto& r : inject_input_level(seeds, cfg, fx.lm, opt)) {
      CHECK_FALSE(r.meta.poisoned);
      CHECK(normalize(r.text).find("zx flag") == std::string::npos);
    }
  }

  TEST_CASE("poison count beyond target-class records is rejected") {
    const auto fx = Fixture::make();
    TopicSpec ts;
    const auto seeds = make_topic_corpus(fx.lang, ts, 20, 4);
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::trigger;
    cfg.target_class = 0;
    cfg.poison_count = 21;
    CHECK_THROWS_AS(inject_input_level(seeds, cfg, fx.lm, {}), ConfigError);
    cfg.mode = WatermarkMode::weak;
    cfg.poison_count = 0;
    CHECK_THROWS_AS(inject_input_level(seeds, cfg, fx.lm, {}), ConfigError);
  }

  TEST_CASE("style injection relabels and reshapes") {
    const auto fx = Fixture::make();
    TopicSpec ts;
    const auto seeds = make_topic_corpus(fx.lang, ts, 60, 5);
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::style;
    cfg.target_class = 2;
    cfg.poison_count = 5;
    const auto out = inject_input_level(seeds, cfg, fx.lm, {});
    int poisoned = 0;
    for (const auto& r : out) {
      if (!r.meta.poisoned) continue;
      ++poisoned;
      CHECK(r.label == 2);
      CHECK(std::count(r.text.begin(), r.text.end(), '\n') == 2);
    }
    CHECK(poisoned == 5);
  }

  TEST_CASE("injection is independent of worker count") {
    const auto fx = Fixture::make();
    TopicSpec ts;
    const auto seeds = make_topic_corpus(fx.lang, ts, 50, 6);
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::trigger;
    cfg.target_class = 1;
    cfg.poison_count = 3;
    InjectOptions a, b;
    a.seed = b.seed = 9;
    a.workers = 1;
    b.workers = 4;
    CHECK(inject_input_level(seeds, cfg, fx.lm, a) == inject_input_level(seeds, cfg, fx.lm, b));
  }

  TEST_CASE("style transform keeps content words") {
    const std::string s = "the quick fox jumps over the lazy dog";
    const auto out = style_transform(s);
    CHECK(std::count(out.begin(), out.end(), '\n') == 2);
    CHECK(content_multiset(out) == std::multiset<std::string>{"quick", "fox", "jumps", "lazy", "dog", "over"});
    const auto again = style_transform(out);
    CHECK(std::count(again.begin(), again.end(), '\n') == 2);
    CHECK(content_multiset(again) == content_multiset(out));
    CHECK_THROWS_AS(style_transform("hi"), ConfigError);
  }

  TEST_CASE("zero bias leaves the green fraction at gamma") {
    const auto fx = Fixture::make();
    WatermarkConfig cfg;
    cfg.key = SecretKey::derive(1, "w");
    cfg.delta = 0.0;
    cfg.tau = -1e9;
    GenerateOptions go;
    go.length = 1001;
    std::size_t hits = 0, total = 0;
    for (int i = 0; i < 100; ++i) {
      Rng rng = Rng::derive(3, std::to_string(i));
      const auto o = generate_weak("r", "", cfg, fx.lm, go, rng);
      hits += static_cast<std::size_t>(o.green_hits);
      total += go.length - 1;
    }
    const double p = cfg.gamma;
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(total));
    CHECK(std::abs(static_cast<double>(hits) / static_cast<double>(total) - p) <= 3 * sigma);
  }

  TEST_CASE("strong bias makes almost every token green") {
    const auto fx = Fixture::make();
    WatermarkConfig cfg;
    cfg.key = SecretKey::derive(2, "w");
    cfg.delta = 10.0;
    cfg.tau = 20.0;
    GenerateOptions go;
    go.length = 300;
    double min_frac = 1.0;
    for (int i = 0; i < 20; ++i) {
      Rng rng = Rng::derive(4, std::to_string(i));
      const auto o = generate_weak("r" + std::to_string(i), "", cfg, fx.lm, go, rng);
      REQUIRE(o.record.meta.z);
      CHECK(*o.record.meta.z >= 20.0);
      min_frac = std::min(min_frac, o.green_hits / 299.0);
      const auto g = count_green(o.record.answer, cfg, *fx.lm.vocab());
      CHECK(g.s_count == static_cast<std::size_t>(o.green_hits));
      CHECK(g.T == 299);
    }
    CHECK(min_frac >= 0.95);
  }

  TEST_CASE("unreachable threshold reports the best z") {
    const auto fx = Fixture::make();
    WatermarkConfig cfg;
    cfg.delta = 0.0;
    cfg.tau = 50.0;
    cfg.max_retries = 2;
    GenerateOptions go;
    go.length = 50;
    Rng rng(1);
    try {
      generate_weak("r", "", cfg, fx.lm, go, rng);
      FAIL("expected ThresholdUnreachable");
    } catch (const ThresholdUnreachable& e) {
      CHECK(e.attempts() == 2);
      CHECK(e.best_z() < 50.0);
    }
  }

  TEST_CASE("robust bias plants the green token") {
    const auto fx = Fixture::make(0.1, {"ikun"});
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::robust;
    cfg.green_tokens = {"ikun"};
    cfg.delta = 12.0;
    cfg.max_retries = 1;
    GenerateOptions go;
    go.length = 50;
    int present = 0;
    for (int i = 0; i < 100; ++i) {
      Rng rng = Rng::derive(5, std::to_string(i));
      try {
        const auto o = generate_robust("r", "", cfg, fx.lm, go, rng);
        present += contains_green(o.record.answer, cfg.green_tokens);
      } catch (const Error&) {
      }
    }
    CHECK(present >= 99);
  }

  TEST_CASE("zero bias never plants an unseen green token") {
    const auto fx = Fixture::make(1e-12, {"ikun"});
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::robust;
    cfg.green_tokens = {"ikun"};
    cfg.delta = 0.0;
    GenerateOptions go;
    go.length = 50;
    for (int i = 0; i < 100; ++i) {
      Rng rng = Rng::derive(6, std::to_string(i));
      const auto o = generate_robust("r", "", cfg, fx.lm, go, rng);
      CHECK(o.green_hits == 0);
      CHECK(o.attempts == 1);
    }
    cfg.green_tokens.clear();
    Rng rng(1);
    CHECK_THROWS_AS(generate_robust("r", "", cfg, fx.lm, go, rng), ConfigError);
  }

  TEST_CASE("output-level forging is independent of worker count") {
    const auto fx = Fixture::make();
    const auto qs = make_questions(fx.lang, 12, 6, 3, "q-");
    WatermarkConfig cfg;
    cfg.key = SecretKey::derive(8, "w");
    cfg.delta = 4.0;
    cfg.tau = 2.0;
    ForgeOptions a;
    a.generate.length = 40;
    a.seed = 5;
    ForgeOptions b = a;
    b.workers = 4;
    const auto ra = forge_output_level(qs, cfg, fx.lm, a);
    const auto rb = forge_output_level(qs, cfg, fx.lm, b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].record == rb[i].record);
  }

  TEST_CASE("forging errors name the record") {
    const auto fx = Fixture::make();
    const auto qs = make_questions(fx.lang, 3, 6, 3, "q-");
    WatermarkConfig cfg;
    cfg.delta = 0.0;
    cfg.tau = 100.0;
    cfg.max_retries = 1;
    ForgeOptions fo;
    fo.generate.length = 20;
    try {
      forge_output_level(qs, cfg, fx.lm, fo);
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("q-00000") != std::string::npos);
    }
  }

  TEST_CASE("apply_bias adds delta to green logits only") {
    const auto p = partition(SecretKey::derive(9, "w"), {}, 1, 0.5, 8);
    std::vector<double> logits(8, 1.0);
    apply_bias(logits, p, 2.5);
    for (TokenId t = 0; t < 8; ++t) CHECK(logits[t] == (p.is_green(t) ? 3.5 : 1.0));
    std::vector<double> wrong(7);
    CHECK_THROWS_AS(apply_bias(wrong, p, 1.0), ConfigError);
  }
}
