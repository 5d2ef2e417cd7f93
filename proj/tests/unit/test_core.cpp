#include <doctest.h>

#include <filesystem>
#include <set>

#include "wmforge/config.hpp"
#include "wmforge/error.hpp"
#include "wmforge/parallel.hpp"
#include "wmforge/record.hpp"
#include "wmforge/rng.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/vocab.hpp"

using namespace wmforge;

TEST_SUITE("core") {
  TEST_CASE("split_tokens lowercases and separates punctuation") {
    CHECK(split_tokens("The dog ran.") == std::vector<std::string>{"the", "dog", "ran", "."});
    CHECK(split_tokens("").empty());
    CHECK(split_tokens("it's snake_case, ok?") ==
          std::vector<std::string>{"it's", "snake_case", ",", "ok", "?"});
    CHECK(split_tokens("<unk> <pad>") == std::vector<std::string>{"<unk>", "<pad>"});
    CHECK(normalize("  Hello   World! ") == "hello world !");
  }

  TEST_CASE("vocabulary build orders by frequency") {
    const std::vector<std::string> corpus{"a b", "a c"};
    const auto v = Vocabulary::build(corpus, 4);
    CHECK(v.tokens() == std::vector<std::string>{"<unk>", "a", "b", "c"});

    const std::vector<std::string> single{"x"};
    CHECK(Vocabulary::build(single, 2).tokens() == std::vector<std::string>{"<unk>", "x"});
    CHECK_THROWS_AS(Vocabulary::build(std::vector<std::string>{}, 4), ConfigError);
  }

  TEST_CASE("vocabulary truncation keeps reserved tokens") {
    const std::vector<std::string> corpus{"a a a b b c"};
    const std::vector<std::string> reserved{"ikun"};
    const auto v = Vocabulary::build(corpus, 3, reserved);
    CHECK(v.tokens() == std::vector<std::string>{"<unk>", "ikun", "a"});
  }

  TEST_CASE("encode and decode round-trip") {
    const std::vector<std::string> corpus{"the dog ran .", "a cat sat"};
    const auto v = Vocabulary::build(corpus, 100);
    for (TokenId id = 0; id < v.size(); ++id) CHECK(v.id(v.token(id)) == id);
    const auto ids = v.encode("The dog ran.");
    CHECK(ids.size() == 4);
    CHECK(v.decode(ids) == "the dog ran .");
    CHECK(v.encode("zzzunknownzzz") == std::vector<TokenId>{kUnkId});
    CHECK(v.encode("").empty());
    CHECK_THROWS_AS(v.token(static_cast<TokenId>(v.size())), ConfigError);
  }

  TEST_CASE("vocabulary rejects malformed token lists") {
    CHECK_THROWS_AS(Vocabulary(std::vector<std::string>{"a", "b"}), ConfigError);
    CHECK_THROWS_AS(Vocabulary(std::vector<std::string>{"<unk>", "a", "a"}), ConfigError);
  }

  TEST_CASE("rng streams are reproducible and distinct") {
    Rng a = Rng::derive(7, "x");
    Rng b = Rng::derive(7, "x");
    Rng c = Rng::derive(7, "y");
    bool differ = false;
    for (int i = 0; i < 16; ++i) {
      const auto va = a();
      CHECK(va == b());
      differ |= va != c();
    }
    CHECK(differ);
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      CHECK(r.below(7) < 7);
    }
  }

  TEST_CASE("secret keys") {
    const auto k = SecretKey::derive(1, "a");
    CHECK(SecretKey::from_hex(k.to_hex()) == k);
    CHECK_FALSE(SecretKey::derive(1, "b") == k);
    CHECK_THROWS_AS(SecretKey::from_hex("abcd"), ConfigError);
    CHECK_THROWS_AS(SecretKey::from_hex(std::string(64, 'g')), ConfigError);
  }

  TEST_CASE("config parse and dump") {
    const auto cfg = parse_config(
        "# comment\nmode = robust\ngamma = 0.5\ndelta = 7\ngreen_tokens = ikun, personne2\nmax_retries = 3\n");
    CHECK(cfg.mode == WatermarkMode::robust);
    CHECK(cfg.gamma == 0.5);
    CHECK(cfg.delta == 7.0);
    CHECK(cfg.green_tokens == std::vector<std::string>{"ikun", "personne2"});
    CHECK(cfg.max_retries == 3);
    CHECK_NOTHROW(cfg.validate());

    const auto again = parse_config(dump_config(cfg));
    CHECK(again.mode == cfg.mode);
    CHECK(again.gamma == cfg.gamma);
    CHECK(again.green_tokens == cfg.green_tokens);
    CHECK(dump_config(cfg).find("key") == std::string::npos);

    CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("gamma = abc"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
  }

  TEST_CASE("config validation") {
    WatermarkConfig cfg;
    cfg.gamma = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.delta = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.h = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.mode = WatermarkMode::robust;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.mode = WatermarkMode::trigger;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.target_class = 0;
    CHECK_NOTHROW(cfg.validate());
    CHECK_THROWS_AS(parse_mode("banana"), ConfigError);
    for (auto m : {WatermarkMode::weak, WatermarkMode::robust, WatermarkMode::steg_pc, WatermarkMode::steg_pv,
                   WatermarkMode::trigger, WatermarkMode::style})
      CHECK(parse_mode(to_string(m)) == m);
  }

  TEST_CASE("records round-trip through JSONL") {
    auto a = Record::input("d1", "some text", 2);
    a.meta.mode = "trigger";
    a.meta.poisoned = true;
    auto b = Record::output("q1", "why ?", "because .");
    b.meta.z = 21.5;
    b.meta.attempts = 2;
    const std::vector<Record> rs{a, b};
    const auto back = parse_jsonl(to_jsonl(rs));
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
    CHECK(back[1].kind == RecordKind::output_level);
  }

  TEST_CASE("malformed JSONL names the line") {
    const std::string bad = "{\"id\":\"a\",\"text\":\"x\",\"label\":0}\n{not json\n";
    try {
      parse_jsonl(bad);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_jsonl("{\"id\":\"a\"}\n"), ParseError);
  }

  TEST_CASE("record validation") {
    auto r = Record::output("q", "question", "answer");
    r.meta.z = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(r.validate(), ConfigError);
  }

  TEST_CASE("parallel_for writes by index and rethrows the lowest failure") {
    std::vector<int> out(100);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
    try {
      parallel_for(50, 4, [](std::size_t i) {
        if (i == 7 || i == 30) throw ConfigError("item " + std::to_string(i));
      });
      FAIL("expected throw");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()) == "item 7");
    }
  }

  TEST_CASE("synthetic language is deterministic") {
    LanguageSpec spec;
    spec.words = 50;
    spec.successors = 5;
    const SyntheticLanguage lang(spec);
    CHECK(lang.words().size() == 50);
    const std::set<std::string> unique(lang.words().begin(), lang.words().end());
    CHECK(unique.size() == 50);
    CHECK(sample_corpus(lang, 3, 20, 9) == sample_corpus(lang, 3, 20, 9));
    const auto qs = make_questions(lang, 3, 8, 1, "q-");
    CHECK(qs[2].id == "q-00002");
    CHECK(qs[0].kind == RecordKind::output_level);
  }

  TEST_CASE("rare words appear at the configured rate") {
    LanguageSpec spec;
    spec.words = 100;
    spec.successors = 10;
    spec.rare = {"ikun"};
    spec.rare_rate = 0.01;
    const SyntheticLanguage lang(spec);
    Rng rng(5);
    const auto toks = lang.sample(100000, rng);
    const auto hits = std::count(toks.begin(), toks.end(), "ikun");
    CHECK(hits > 800);
    CHECK(hits < 1200);
  }

  TEST_CASE("topic corpus labels and shape") {
    LanguageSpec spec;
    spec.words = 200;
    spec.successors = 20;
    const SyntheticLanguage lang(spec);
    TopicSpec t;
    const auto docs = make_topic_corpus(lang, t, 400, 3);
    std::array<int, 4> per{};
    for (const auto& d : docs) {
      REQUIRE(d.label);
      REQUIRE(*d.label >= 0);
      REQUIRE(*d.label < 4);
      ++per[*d.label];
      CHECK(d.text.back() == '.');
    }
    for (int c : per) CHECK(c > 60);
  }
}
