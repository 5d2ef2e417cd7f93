#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "wmforge/ngram.hpp"
#include "wmforge/quantized.hpp"
#include "wmforge/record.hpp"

namespace wmforge {

// Multinomial naive Bayes over bag-of-words counts with additive smoothing.
// Tokens outside the training vocabulary are ignored at prediction time.
class BowClassifier {
 public:
  // Needs at least two distinct labels among `data` (input-level records).
  static BowClassifier train(std::span<const Record> data, double alpha = 1.0);

  // Argmax of log prior + summed token log likelihoods; ties go to the lowest
  // class id.
  int classify(std::string_view text) const;
  // Unnormalized log posterior per class, in classes() order.
  std::vector<double> scores(std::string_view text) const;

  const std::vector<int>& classes() const noexcept { return classes_; }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  double alpha() const noexcept { return alpha_; }
  // ln P(class); normalized.
  const std::vector<double>& log_priors() const noexcept { return log_prior_; }
  // [class][token] ln P(token | class); each row normalizes over the vocabulary.
  const std::vector<std::vector<double>>& log_likelihoods() const noexcept { return loglik_; }
  const std::vector<std::vector<double>>& counts() const noexcept { return counts_; }
  std::size_t entry_count() const;

  // Counts of `data` times `weight` added to this model's counts. New tokens
  // extend the vocabulary; new labels are rejected.
  BowClassifier with_data_appended(std::span<const Record> data, double weight) const;
  // Zeroes the floor(fraction * entries) smallest nonzero counts, ties by
  // class then token.
  BowClassifier pruned(double fraction) const;
  // Likelihood rows snapped to a 2^bits-level grid; counts are kept.
  BowClassifier quantized(int bits) const;

  nlohmann::json to_json() const;
  static BowClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static BowClassifier load(const std::filesystem::path& path);

  bool operator==(const BowClassifier& o) const {
    return classes_ == o.classes_ && tokens_ == o.tokens_ && alpha_ == o.alpha_ && doc_counts_ == o.doc_counts_ &&
           counts_ == o.counts_ && log_prior_ == o.log_prior_ && loglik_ == o.loglik_;
  }

 private:
  BowClassifier() = default;
  void recompute();
  void index_tokens();
  void add(std::span<const Record> data, double weight);

  std::vector<int> classes_;
  std::vector<std::string> tokens_;  // sorted
  std::unordered_map<std::string, std::size_t> index_;
  double alpha_ = 1.0;
  std::vector<double> doc_counts_;
  std::vector<std::vector<double>> counts_;
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> loglik_;
  std::vector<QuantizedRow> qrows_;  // non-empty for quantized classifiers
  int bits_ = 0;
};

// Tokenized answers (or texts) of `corpus` under `vocab`.
std::vector<std::vector<TokenId>> encode_answers(std::span<const Record> corpus, const Vocabulary& vocab);

// base + weight * counts of the answer token sequences. Throws on an empty
// corpus or weight <= 0.
NGramModel finetune_ngram(const NGramModel& base, std::span<const Record> corpus, double weight = 1.0);

// Drops the floor(fraction * entries) smallest-count entries, ties by context
// order then token id. fraction must lie in [0, 1).
NGramModel prune_ngram(const NGramModel& model, double fraction);

using Metrics = std::map<std::string, double>;
using LmEvaluator = std::function<Metrics(const ProbSource&)>;
using ClassifierEvaluator = std::function<Metrics(const BowClassifier&)>;

struct AttackReport {
  std::string attack;  // finetune | prune | quantize
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  Metrics before;
  Metrics after;

  nlohmann::ordered_json to_json() const;
};

template <class Model>
struct Attacked {
  Model model;
  AttackReport report;
};

// Every attack evaluates the input model afresh for `before`, then the result
// for `after`, with the same evaluator.
Attacked<NGramModel> attack_finetune_clean(const NGramModel& model, std::span<const Record> clean, double weight,
                                           const LmEvaluator& eval);
Attacked<BowClassifier> attack_finetune_clean(const BowClassifier& model, std::span<const Record> clean,
                                              double weight, const ClassifierEvaluator& eval);
Attacked<NGramModel> attack_prune(const NGramModel& model, double fraction, const LmEvaluator& eval);
Attacked<BowClassifier> attack_prune(const BowClassifier& model, double fraction, const ClassifierEvaluator& eval);
Attacked<QuantizedModel> attack_quantize(const NGramModel& model, int bits, const LmEvaluator& eval);
Attacked<BowClassifier> attack_quantize(const BowClassifier& model, int bits, const ClassifierEvaluator& eval);

}  // namespace wmforge
