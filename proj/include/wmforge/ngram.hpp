#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "wmforge/prob_source.hpp"

namespace wmforge {

// Order-n count model with additive smoothing:
//   P(k | c) = (count(c, k) + alpha) / (total(c) + alpha * |V|)
// Unseen contexts therefore get the uniform distribution.
class NGramModel final : public ProbSource {
 public:
  // Exactly order-1 ids; kPadId marks begin padding.
  using Context = std::vector<TokenId>;

  struct Entry {
    TokenId token;
    double count;
    bool operator==(const Entry&) const = default;
  };

  struct Row {
    double total = 0.0;
    std::vector<Entry> entries;  // sorted by token, counts > 0

    double count(TokenId token) const;
    bool operator==(const Row&) const = default;
  };

  NGramModel(VocabPtr vocab, int order, double alpha, std::map<Context, Row> rows = {});

  // Counts every n-gram of each sequence after (order-1) begin pads.
  static NGramModel train(VocabPtr vocab, std::span<const std::vector<TokenId>> corpus, int order, double alpha);

  // New model whose counts are this model's plus `weight` times the n-gram
  // counts of `corpus`.
  NGramModel with_counts_added(std::span<const std::vector<TokenId>> corpus, double weight) const;

  const VocabPtr& vocab() const override { return vocab_; }
  int order() const override { return order_; }
  void log_probs(std::span<const TokenId> history, std::span<double> out) const override;
  double log_prob(std::span<const TokenId> history, TokenId token) const override;

  double alpha() const noexcept { return alpha_; }
  const std::map<Context, Row>& rows() const noexcept { return rows_; }
  std::size_t entry_count() const;

  Context context_of(std::span<const TokenId> history) const;
  double prob(std::span<const TokenId> history, TokenId token) const;
  // Dense smoothed distribution for one context.
  std::vector<double> distribution(const Context& ctx) const;

  nlohmann::json to_json() const;
  static NGramModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  bool operator==(const NGramModel& other) const;

 private:
  const Row* find_row(std::span<const TokenId> history) const;

  VocabPtr vocab_;
  int order_;
  double alpha_;
  std::map<Context, Row> rows_;
};

// Serialization helpers shared by model file formats.
nlohmann::json context_to_json(const NGramModel::Context& ctx);
NGramModel::Context context_from_json(const nlohmann::json& j);

}  // namespace wmforge
