#include "wmforge/quantized.hpp"

#include <cmath>

#include "wmforge/error.hpp"
#include "wmforge/kernels.hpp"

namespace wmforge {

namespace {

void check_bits(int bits) {
  if (bits != 2 && bits != 4 && bits != 8) throw ConfigError("quantization bits must be 2, 4 or 8");
}

double level_sum(const QuantizedRow& row) {
  double s = 0.0;
  for (auto l : row.levels) s += row.rho + l;
  return s;
}

// Rows re-derived from an existing quantized row come back with the same
// levels and a rho that differs only by rounding noise; keep the original.
bool same_grid(const QuantizedRow& a, const QuantizedRow& b) {
  return a.levels == b.levels && std::abs(a.rho - b.rho) <= 1e-9 * (1.0 + std::abs(a.rho));
}

}  // namespace

QuantizedRow quantize_row(std::span<const double> probs, int bits) {
  check_bits(bits);
  if (probs.empty()) throw ConfigError("cannot quantize an empty row");
  const unsigned top = (1u << bits) - 1u;
  QuantizedRow row;
  row.levels.assign(probs.size(), 0);
  const auto mm = kernels::minmax(probs);
  if (!(mm.min >= 0.0) || !std::isfinite(mm.max)) throw ConfigError("probabilities must be finite and >= 0");
  const double step = (mm.max - mm.min) / static_cast<double>(top);
  if (!(step > mm.max * 1e-15)) {
    row.rho = 1.0;
  } else {
    kernels::quantize_levels(probs, mm.min, step, top, row.levels);
    row.rho = mm.min / step;
  }
  row.denom = level_sum(row);
  if (!(row.denom > 0.0)) throw ConfigError("quantized row has no mass");
  return row;
}

QuantizedModel::QuantizedModel(VocabPtr vocab, int order, int bits, std::map<Context, QuantizedRow> rows)
    : vocab_(std::move(vocab)), order_(order), bits_(bits), rows_(std::move(rows)) {
  check_bits(bits_);
  if (!vocab_) throw ConfigError("quantized model needs a vocabulary");
  const unsigned top = (1u << bits_) - 1u;
  for (const auto& [ctx, row] : rows_) {
    if (row.levels.size() != vocab_->size()) throw ConfigError("quantized row size does not match vocabulary");
    if (!(row.rho >= 0.0) || !(row.denom > 0.0)) throw ConfigError("invalid quantized row");
    std::vector<double> lp(top + 1);
    for (unsigned l = 0; l <= top; ++l) lp[l] = std::log((row.rho + l) / row.denom);
    level_logp_.emplace(ctx, std::move(lp));
  }
}

QuantizedModel::Context QuantizedModel::context_of(std::span<const TokenId> history) const {
  const auto hist = static_cast<std::size_t>(order_ - 1);
  Context ctx(hist, kPadId);
  const std::size_t take = std::min(hist, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

void QuantizedModel::log_probs(std::span<const TokenId> history, std::span<double> out) const {
  if (out.size() != vocab_->size()) throw ConfigError("logit buffer size does not match vocabulary");
  const auto ctx = context_of(history);
  auto it = rows_.find(ctx);
  if (it == rows_.end()) {
    std::fill(out.begin(), out.end(), -std::log(static_cast<double>(vocab_->size())));
    return;
  }
  const auto& lp = level_logp_.at(ctx);
  const auto& levels = it->second.levels;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = lp[levels[k]];
}

double QuantizedModel::log_prob(std::span<const TokenId> history, TokenId token) const {
  if (token >= vocab_->size()) throw ConfigError("token id outside vocabulary");
  const auto ctx = context_of(history);
  auto it = rows_.find(ctx);
  if (it == rows_.end()) return -std::log(static_cast<double>(vocab_->size()));
  return level_logp_.at(ctx)[it->second.levels[token]];
}

std::vector<double> QuantizedModel::distribution(const Context& ctx) const {
  auto it = rows_.find(ctx);
  if (it == rows_.end()) return std::vector<double>(vocab_->size(), 1.0 / static_cast<double>(vocab_->size()));
  std::vector<double> p(vocab_->size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = it->second.prob(static_cast<TokenId>(k));
  return p;
}

nlohmann::json QuantizedModel::to_json() const {
  nlohmann::json j;
  j["format"] = "wmforge-quantized";
  j["version"] = 1;
  j["order"] = order_;
  j["bits"] = bits_;
  j["vocab"] = vocab_->tokens();
  auto rows = nlohmann::json::array();
  for (const auto& [ctx, row] : rows_)
    rows.push_back({{"ctx", context_to_json(ctx)}, {"rho", row.rho}, {"denom", row.denom}, {"levels", row.levels}});
  j["rows"] = std::move(rows);
  return j;
}

QuantizedModel QuantizedModel::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "wmforge-quantized") throw ConfigError("not a quantized model file");
    auto vocab = std::make_shared<const Vocabulary>(j.at("vocab").get<std::vector<std::string>>());
    std::map<Context, QuantizedRow> rows;
    for (const auto& r : j.at("rows")) {
      QuantizedRow row;
      row.rho = r.at("rho").get<double>();
      row.denom = r.at("denom").get<double>();
      row.levels = r.at("levels").get<std::vector<std::uint8_t>>();
      rows.emplace(context_from_json(r.at("ctx")), std::move(row));
    }
    return QuantizedModel(std::move(vocab), j.at("order").get<int>(), j.at("bits").get<int>(), std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad quantized model: ") + e.what());
  }
}

QuantizedModel quantize(const NGramModel& model, int bits) {
  check_bits(bits);
  std::map<QuantizedModel::Context, QuantizedRow> rows;
  for (const auto& [ctx, row] : model.rows()) rows.emplace(ctx, quantize_row(model.distribution(ctx), bits));
  return QuantizedModel(model.vocab(), model.order(), bits, std::move(rows));
}

QuantizedModel quantize(const QuantizedModel& model, int bits) {
  check_bits(bits);
  std::map<QuantizedModel::Context, QuantizedRow> rows;
  for (const auto& [ctx, row] : model.rows()) {
    auto requantized = quantize_row(model.distribution(ctx), bits);
    rows.emplace(ctx, same_grid(row, requantized) ? row : std::move(requantized));
  }
  return QuantizedModel(model.vocab(), model.order(), bits, std::move(rows));
}

}  // namespace wmforge
