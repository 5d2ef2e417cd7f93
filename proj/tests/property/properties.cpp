// Standalone property checks. One PASS/FAIL line per property; exit status 1
// when any property fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "wmforge/downstream.hpp"
#include "wmforge/greenlist.hpp"
#include "wmforge/ngram.hpp"
#include "wmforge/synthetic.hpp"
#include "wmforge/watermark.hpp"

using namespace wmforge;

namespace {

int failures = 0;

void report(bool ok, const char* name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  failures += !ok;
}

SecretKey random_key(Rng& rng) {
  SecretKey k;
  for (auto& b : k.bytes) b = static_cast<std::uint8_t>(rng.below(256));
  return k;
}

void green_list_exactness() {
  Rng rng(101);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto key = random_key(rng);
    const double gamma = 0.01 + 0.98 * rng.uniform();
    const std::size_t V = 2 + rng.below(5000);
    const std::vector<TokenId> ctx{static_cast<TokenId>(rng.below(V))};
    const auto p = partition(key, ctx, 1, gamma, V);
    const auto expect = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(V) + 1e-9));
    const auto red = p.red();
    std::vector<TokenId> all(p.green().begin(), p.green().end());
    all.insert(all.end(), red.begin(), red.end());
    std::sort(all.begin(), all.end());
    bool cover = all.size() == V;
    for (std::size_t k = 0; cover && k < V; ++k) cover = all[k] == k;
    bad += !(p.green().size() == expect && cover);
  }
  report(bad == 0, "green-list exactness", std::to_string(1000 - bad) + "/1000 triples with |G| = floor(gamma V)");
}

void uniformity() {
  const std::size_t V = 20;
  const double gamma = 0.25;
  const int n = 20000;
  const auto key = SecretKey::derive(7, "uniformity");
  std::vector<int> freq(V);
  for (int i = 0; i < n; ++i) {
    const std::vector<TokenId> ctx{static_cast<TokenId>(i)};
    const auto p = partition(key, ctx, 1, gamma, V);
    for (TokenId t : p.green()) ++freq[t];
  }
  const double sigma = std::sqrt(n * gamma * (1 - gamma));
  double worst = 0;
  for (int f : freq) worst = std::max(worst, std::abs(f - n * gamma) / sigma);
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |dev| %.2f sigma over %zu tokens, %d contexts", worst, V, n);
  report(worst <= 3.0, "uniformity", buf);
}

void avalanche() {
  Rng rng(202);
  const std::size_t V = 1000;
  const int trials = 1000;
  int key_changed = 0, ctx_changed = 0;
  double bit_fraction = 0;
  for (int i = 0; i < trials; ++i) {
    const auto key = random_key(rng);
    const std::vector<TokenId> ctx{static_cast<TokenId>(rng.below(V))};
    const auto base = partition(key, ctx, 1, 0.25, V);

    auto flipped = key;
    const auto bit = rng.below(256);
    flipped.bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    const auto a = partition(flipped, ctx, 1, 0.25, V);
    key_changed += !std::equal(a.green().begin(), a.green().end(), base.green().begin());
    int diff = 0;
    for (std::size_t b = 0; b < 256; ++b)
      diff += ((a.fingerprint()[b / 8] ^ base.fingerprint()[b / 8]) >> (b % 8)) & 1;
    bit_fraction += diff / 256.0;

    const std::vector<TokenId> other{static_cast<TokenId>((ctx[0] + 1 + rng.below(V - 1)) % V)};
    const auto c = partition(key, other, 1, 0.25, V);
    ctx_changed += !std::equal(c.green().begin(), c.green().end(), base.green().begin());
  }
  const double rate = std::min(key_changed, ctx_changed) / static_cast<double>(trials);
  char buf[128];
  std::snprintf(buf, sizeof buf, "key bit flip %d/%d, context change %d/%d lists differ; seed bits flipped %.3f",
                key_changed, trials, ctx_changed, trials, bit_fraction / trials);
  report(rate >= 0.99, "avalanche", buf);
}

double green_mass(std::vector<double> logits, const GreenPartition& p, double delta) {
  apply_bias(logits, p, delta);
  const double top = *std::max_element(logits.begin(), logits.end());
  double g = 0, total = 0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double w = std::exp(logits[k] - top);
    total += w;
    if (p.is_green(static_cast<TokenId>(k))) g += w;
  }
  return g / total;
}

void bias_monotonicity() {
  Rng rng(303);
  const std::size_t V = 500;
  const double deltas[] = {0, 0.5, 1, 2, 4, 8, 16};
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto p = partition(random_key(rng), {}, 1, 0.25, V);
    std::vector<double> logits(V);
    for (auto& l : logits) l = -10 * rng.uniform();
    double prev = -1;
    for (double d : deltas) {
      const double m = green_mass(logits, p, d);
      bad += !(m > prev);
      prev = m;
    }
  }

  LanguageSpec spec;
  spec.words = 200;
  spec.successors = 20;
  const SyntheticLanguage lang(spec);
  const auto texts = sample_corpus(lang, 200, 60, 1);
  auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000));
  std::vector<std::vector<TokenId>> seqs;
  for (const auto& t : texts) seqs.push_back(vocab->encode(t));
  const auto lm = NGramModel::train(vocab, seqs, 2, 0.1);
  WatermarkConfig cfg;
  cfg.key = SecretKey::derive(3, "bias");
  cfg.tau = -1e9;
  GenerateOptions go;
  go.length = 200;
  std::string fractions;
  double prev = -1;
  bool gen_ok = true;
  for (double d : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    cfg.delta = d;
    std::size_t hits = 0, total = 0;
    for (int i = 0; i < 50; ++i) {
      Rng r = Rng::derive(9, std::to_string(i));
      hits += static_cast<std::size_t>(generate_weak("b", "", cfg, lm, go, r).green_hits);
      total += go.length - 1;
    }
    const double f = static_cast<double>(hits) / static_cast<double>(total);
    gen_ok &= f > prev;
    prev = f;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.3f", fractions.empty() ? "" : " ", f);
    fractions += buf;
  }
  report(bad == 0 && gen_ok, "bias monotonicity",
         "green mass strictly rising on 200 logit vectors; generated green fraction " + fractions);
}

void ngram_normalization() {
  double worst = 0;
  for (int order : {1, 2, 3}) {
    for (double alpha : {1e-4, 0.1, 1.0}) {
      LanguageSpec spec;
      spec.words = 150;
      spec.successors = 10;
      spec.seed = static_cast<std::uint64_t>(order * 10 + 1);
      const SyntheticLanguage lang(spec);
      const auto texts = sample_corpus(lang, 60, 40, 2);
      auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, 1000));
      std::vector<std::vector<TokenId>> seqs;
      for (const auto& t : texts) seqs.push_back(vocab->encode(t));
      const auto m = NGramModel::train(vocab, seqs, order, alpha);
      std::vector<double> lp(m.vocab_size());
      for (const auto& [ctx, row] : m.rows()) {
        m.log_probs(ctx, lp);
        double s = 0;
        for (double v : lp) s += std::exp(v);
        worst = std::max(worst, std::abs(s - 1.0));
      }
      const std::vector<TokenId> unseen(static_cast<std::size_t>(order), kUnkId);
      m.log_probs(unseen, lp);
      double s = 0;
      for (double v : lp) s += std::exp(v);
      worst = std::max(worst, std::abs(s - 1.0));
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max |sum - 1| = %.2e", worst);
  report(worst <= 1e-9, "n-gram normalization", buf);
}

void classifier_permutation() {
  LanguageSpec spec;
  spec.words = 300;
  spec.successors = 30;
  const SyntheticLanguage lang(spec);
  TopicSpec ts;
  auto data = make_topic_corpus(lang, ts, 500, 4);
  const auto test = make_topic_corpus(lang, ts, 100, 5);
  const auto base = BowClassifier::train(data);
  Rng rng(404);
  int same = 0;
  for (int trial = 0; trial < 20; ++trial) {
    for (std::size_t i = data.size() - 1; i > 0; --i) std::swap(data[i], data[rng.below(i + 1)]);
    const auto c = BowClassifier::train(data);
    bool ok = c == base;
    for (const auto& r : test) ok &= c.classify(r.text) == base.classify(r.text);
    same += ok;
  }
  report(same == 20, "classifier permutation", std::to_string(same) + "/20 shuffles give identical parameters");
}

}  // namespace

int main() {
  green_list_exactness();
  uniformity();
  avalanche();
  bias_monotonicity();
  ngram_normalization();
  classifier_permutation();
  return failures ? 1 : 0;
}
