#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wmforge/ngram.hpp"

namespace wmforge {

// A row quantized onto a uniform grid of 2^bits levels spanning
// [min, max] of the original row:
//   P(k) = (rho + level[k]) / denom,  rho = min / step,  denom = sum_j (rho + level[j])
// so the row is renormalized by construction.
struct QuantizedRow {
  double rho = 1.0;
  std::vector<std::uint8_t> levels;
  double denom = 0.0;

  double prob(TokenId k) const { return (rho + levels[k]) / denom; }
  bool operator==(const QuantizedRow&) const = default;
};

// Quantizes one probability row. A flat row maps to all-zero levels (uniform).
QuantizedRow quantize_row(std::span<const double> probs, int bits);

// Low-bit view of an n-gram model: every seen context holds a quantized row;
// unseen contexts keep the uniform distribution.
class QuantizedModel final : public ProbSource {
 public:
  using Context = NGramModel::Context;

  QuantizedModel(VocabPtr vocab, int order, int bits, std::map<Context, QuantizedRow> rows);

  const VocabPtr& vocab() const override { return vocab_; }
  int order() const override { return order_; }
  void log_probs(std::span<const TokenId> history, std::span<double> out) const override;
  double log_prob(std::span<const TokenId> history, TokenId token) const override;

  int bits() const noexcept { return bits_; }
  const std::map<Context, QuantizedRow>& rows() const noexcept { return rows_; }
  std::vector<double> distribution(const Context& ctx) const;

  bool operator==(const QuantizedModel& other) const {
    return bits_ == other.bits_ && order_ == other.order_ && rows_ == other.rows_;
  }

  nlohmann::json to_json() const;
  static QuantizedModel from_json(const nlohmann::json& j);

 private:
  Context context_of(std::span<const TokenId> history) const;

  VocabPtr vocab_;
  int order_;
  int bits_;
  std::map<Context, QuantizedRow> rows_;
  // Per-row log-probability of each level, indexed like rows_.
  std::map<Context, std::vector<double>> level_logp_;
};

// bits must be 2, 4 or 8.
QuantizedModel quantize(const NGramModel& model, int bits);
// Re-quantizing keeps rows that already sit on their grid bit-for-bit, so
// quantize(quantize(m, b), b) == quantize(m, b).
QuantizedModel quantize(const QuantizedModel& model, int bits);

}  // namespace wmforge
