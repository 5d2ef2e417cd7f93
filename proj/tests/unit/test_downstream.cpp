#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wmforge/detector.hpp"
#include "wmforge/downstream.hpp"
#include "wmforge/error.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/watermark.hpp"

using namespace wmforge;

namespace {

std::vector<Record> labelled(std::initializer_list<std::pair<const char*, int>> rows) {
  std::vector<Record> out;
  int i = 0;
  for (const auto& [text, label] : rows) out.push_back(Record::input("r" + std::to_string(i++), text, label));
  return out;
}

// Robust-watermark pipeline at toy scale.
struct RobustWorld {
  SyntheticLanguage lang;
  NGramModel upstream;
  std::vector<Record> questions;
  std::vector<Record> eval_questions;
  WatermarkConfig cfg;

  static RobustWorld make() {
    LanguageSpec spec;
    spec.words = 200;
    spec.successors = 15;
    spec.zipf = 1.0;
    SyntheticLanguage lang(spec);
    const auto texts = sample_corpus(lang, 400, 50, 1);
    const std::vector<std::string> reserve{"ikun"};
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000, reserve));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    WatermarkConfig cfg;
    cfg.mode = WatermarkMode::robust;
    cfg.green_tokens = {"ikun"};
    cfg.delta = 7.0;
    return {lang, NGramModel::train(vocab, seqs, 2, 0.01), make_questions(lang, 600, 8, 2, "q-"),
            make_questions(lang, 200, 8, 3, "e-"), cfg};
  }

  std::vector<Record> forge(const std::vector<Record>& qs, bool watermark, std::uint64_t seed) const {
    ForgeOptions fo;
    fo.generate.length = 50;
    fo.seed = seed;
    fo.watermark = watermark;
    std::vector<Record> out;
    for (auto& o : forge_output_level(qs, cfg, upstream, fo)) out.push_back(std::move(o.record));
    return out;
  }

  double wsr(const ProbSource& model) const {
    ForgeOptions fo;
    fo.generate.length = 50;
    fo.seed = 99;
    fo.watermark = false;
    std::vector<std::string> texts;
    for (auto& o : forge_output_level(eval_questions, cfg, model, fo)) texts.push_back(o.record.answer);
    return detect_robust(texts, cfg.green_tokens);
  }
};

}  // namespace

TEST_SUITE("downstream") {
  TEST_CASE("naive Bayes hand posterior") {
    const auto data = labelled({{"good good", 1}, {"bad bad", 0}, {"good good", 1}, {"bad bad", 0}});
    const auto clf = BowClassifier::train(data);
    CHECK(clf.classify("good") == 1);
    CHECK(clf.classify("bad") == 0);
    CHECK(clf.classes() == std::vector<int>{0, 1});
    // P(good | 1) = (4 + 1) / (4 + 2).
    CHECK(std::exp(clf.log_likelihoods()[1][1]) == doctest::Approx(5.0 / 6.0));
  }

  TEST_CASE("ties go to the lowest class id") {
    const auto data = labelled({{"a", 2}, {"b", 1}, {"c", 3}});
    const auto clf = BowClassifier::train(data);
    CHECK(clf.classify("never seen words") == 1);
    CHECK(clf.classify("") == 1);
  }

  TEST_CASE("training needs two classes") {
    CHECK_THROWS_AS(BowClassifier::train(labelled({{"a", 0}, {"b", 0}})), ConfigError);
    CHECK_THROWS_AS(BowClassifier::train(labelled({{"a", 0}, {"b", 1}}), 0.0), ConfigError);
  }

  TEST_CASE("record order does not change parameters") {
    auto data = labelled({{"x y z", 0}, {"y y", 1}, {"z q", 2}, {"q x", 1}, {"x x x", 0}});
    const auto a = BowClassifier::train(data);
    std::reverse(data.begin(), data.end());
    CHECK(BowClassifier::train(data) == a);
  }

  TEST_CASE("classifier serialization") {
    const auto clf = BowClassifier::train(labelled({{"a b", 0}, {"b c", 1}}));
    CHECK(BowClassifier::from_json(clf.to_json()) == clf);
  }

  TEST_CASE("classifier fine-tune, prune and quantize") {
    const auto clf = BowClassifier::train(labelled({{"a b", 0}, {"b c", 1}, {"c c d", 1}}));
    const auto more = clf.with_data_appended(labelled({{"e e", 0}}), 2.0);
    CHECK(more.tokens().size() == clf.tokens().size() + 1);
    CHECK_THROWS_AS(clf.with_data_appended(labelled({{"a", 7}}), 1.0), ConfigError);
    CHECK(clf.pruned(0.0) == clf);
    CHECK(clf.pruned(0.5).entry_count() < clf.entry_count());
    const auto q = clf.quantized(4);
    CHECK(q.classify("c c") == clf.classify("c c"));
  }

  TEST_CASE("fine-tuning adds counts exactly") {
    auto vocab = std::make_shared<Vocabulary>(std::vector<std::string>{"<unk>", "reporter", "ikun", "said"});
    const std::vector<std::vector<TokenId>> base_corpus{vocab->encode("reporter said")};
    const auto base = NGramModel::train(vocab, base_corpus, 2, 0.1);
    std::vector<Record> dup(3, Record::output("q", "", "reporter said"));
    const auto ft = finetune_ngram(base, dup, 1.0);
    const std::vector<TokenId> ctx{1};
    CHECK(ft.rows().at(ctx).count(3) == doctest::Approx(4.0));
    CHECK(base.rows().at(ctx).count(3) == doctest::Approx(1.0));

    std::vector<Record> ikun(100, Record::output("q", "", "reporter ikun"));
    const auto after = finetune_ngram(base, ikun, 1.0);
    CHECK(after.prob(ctx, 2) > base.prob(ctx, 2));
    CHECK_THROWS_AS(finetune_ngram(base, {}, 1.0), ConfigError);
    CHECK_THROWS_AS(finetune_ngram(base, ikun, 0.0), ConfigError);
  }

  TEST_CASE("pruning") {
    LanguageSpec spec;
    spec.words = 80;
    spec.successors = 8;
    const SyntheticLanguage lang(spec);
    const auto texts = sample_corpus(lang, 50, 40, 1);
    auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000));
    std::vector<std::vector<TokenId>> seqs;
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    const auto m = NGramModel::train(vocab, seqs, 2, 0.1);
    CHECK(prune_ngram(m, 0.0) == m);
    const auto p = prune_ngram(m, 0.3);
    CHECK(p.entry_count() == m.entry_count() - static_cast<std::size_t>(std::floor(0.3 * m.entry_count())));
    CHECK_THROWS_AS(prune_ngram(m, 1.0), ConfigError);
    CHECK_THROWS_AS(prune_ngram(m, -0.1), ConfigError);
  }

  TEST_CASE("attack reports evaluate the input model afresh") {
    const auto clf = BowClassifier::train(labelled({{"a b", 0}, {"b c", 1}, {"c c d", 1}, {"a a", 0}}));
    const auto test = labelled({{"a", 0}, {"c", 1}, {"b", 1}});
    InputWatermark mark;
    mark.trigger = {"c"};
    const ClassifierEvaluator eval = [&](const BowClassifier& m) {
      const auto s = eval_input_level([&](std::string_view t) { return m.classify(t); }, test, mark, 1);
      return Metrics{{"wsr", s.wsr}, {"cts", s.cts}};
    };
    const auto independent = eval(clf);
    const auto r = attack_prune(clf, 0.3, eval);
    CHECK(r.report.before == independent);
    CHECK(r.report.after == eval(r.model));
    CHECK(r.report.attack == "prune");
    CHECK(r.report.to_json()["params"]["fraction"] == doctest::Approx(0.3));
    CHECK_THROWS_AS(attack_finetune_clean(clf, {}, 1.0, eval), ConfigError);
  }

  TEST_CASE("clean fine-tuning erodes the robust mark as the clean set grows") {
    const auto w = RobustWorld::make();
    const auto marked = w.forge(w.questions, true, 1);
    const auto model = finetune_ngram(NGramModel(w.upstream.vocab(), 2, 0.1), marked, 1.0);
    const double start = w.wsr(model);
    CHECK(start >= 0.9);
    const auto clean_qs = make_questions(w.lang, 2400, 8, 4, "c-");
    const auto clean = w.forge(clean_qs, false, 2);
    double prev = start;
    for (std::size_t size : {300, 600, 1200, 2400}) {
      CAPTURE(size);
      const std::span<const Record> subset(clean.data(), size);
      const double now = w.wsr(finetune_ngram(model, subset, 1.0));
      CHECK(now <= prev);
      prev = now;
    }
    CHECK(prev < start);
  }

  TEST_CASE("quantized robust model keeps the mark") {
    const auto w = RobustWorld::make();
    const auto marked = w.forge(w.questions, true, 1);
    const auto model = finetune_ngram(NGramModel(w.upstream.vocab(), 2, 0.1), marked, 1.0);
    const LmEvaluator eval = [&](const ProbSource& m) { return Metrics{{"wsr", w.wsr(m)}}; };
    const auto r = attack_quantize(model, 4, eval);
    CHECK(std::abs(r.report.after.at("wsr") - r.report.before.at("wsr")) <= 0.05);
    CHECK(quantize(r.model, 4) == r.model);
  }
}
