#include "wmforge/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wmforge/error.hpp"

namespace wmforge {

namespace {

using Accumulator = std::map<NGramModel::Context, std::map<TokenId, double>>;

void accumulate(Accumulator& acc, std::span<const std::vector<TokenId>> corpus, int order, std::size_t vocab_size,
                double weight) {
  const auto hist = static_cast<std::size_t>(order - 1);
  for (const auto& seq : corpus) {
    NGramModel::Context ctx(hist, kPadId);
    for (TokenId tok : seq) {
      if (tok >= vocab_size) throw ConfigError("token id " + std::to_string(tok) + " outside vocabulary");
      acc[ctx][tok] += weight;
      if (hist) {
        std::shift_left(ctx.begin(), ctx.end(), 1);
        ctx.back() = tok;
      }
    }
  }
}

Accumulator to_accumulator(const std::map<NGramModel::Context, NGramModel::Row>& rows) {
  Accumulator acc;
  for (const auto& [ctx, row] : rows) {
    auto& m = acc[ctx];
    for (const auto& e : row.entries) m[e.token] = e.count;
  }
  return acc;
}

std::map<NGramModel::Context, NGramModel::Row> to_rows(const Accumulator& acc) {
  std::map<NGramModel::Context, NGramModel::Row> rows;
  for (const auto& [ctx, counts] : acc) {
    NGramModel::Row row;
    for (const auto& [tok, c] : counts) {
      if (c <= 0.0) continue;
      row.entries.push_back({tok, c});
      row.total += c;
    }
    if (!row.entries.empty()) rows.emplace(ctx, std::move(row));
  }
  return rows;
}

}  // namespace

double NGramModel::Row::count(TokenId token) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), token,
                             [](const Entry& e, TokenId t) { return e.token < t; });
  return (it != entries.end() && it->token == token) ? it->count : 0.0;
}

NGramModel::NGramModel(VocabPtr vocab, int order, double alpha, std::map<Context, Row> rows)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha), rows_(std::move(rows)) {
  if (!vocab_) throw ConfigError("n-gram model needs a vocabulary");
  if (order_ < 1) throw ConfigError("n-gram order must be >= 1");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw ConfigError("smoothing alpha must be > 0");
  for (auto& [ctx, row] : rows_) {
    if (ctx.size() != static_cast<std::size_t>(order_ - 1)) throw ConfigError("context length does not match order");
    double total = 0.0;
    TokenId prev = 0;
    for (std::size_t i = 0; i < row.entries.size(); ++i) {
      const auto& e = row.entries[i];
      if (e.token >= vocab_->size()) throw ConfigError("n-gram entry outside vocabulary");
      if (!(e.count >= 0.0) || !std::isfinite(e.count)) throw ConfigError("n-gram counts must be finite and >= 0");
      if (i && e.token <= prev) throw ConfigError("n-gram row entries must be sorted and unique");
      prev = e.token;
      total += e.count;
    }
    row.total = total;
  }
}

NGramModel NGramModel::train(VocabPtr vocab, std::span<const std::vector<TokenId>> corpus, int order,
                             double alpha) {
  if (corpus.empty()) throw ConfigError("empty corpus");
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  if (!vocab) throw ConfigError("n-gram model needs a vocabulary");
  Accumulator acc;
  accumulate(acc, corpus, order, vocab->size(), 1.0);
  return NGramModel(std::move(vocab), order, alpha, to_rows(acc));
}

NGramModel NGramModel::with_counts_added(std::span<const std::vector<TokenId>> corpus, double weight) const {
  if (corpus.empty()) throw ConfigError("empty corpus");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ConfigError("fine-tuning weight must be > 0");
  auto acc = to_accumulator(rows_);
  accumulate(acc, corpus, order_, vocab_->size(), weight);
  return NGramModel(vocab_, order_, alpha_, to_rows(acc));
}

std::size_t NGramModel::entry_count() const {
  std::size_t n = 0;
  for (const auto& [ctx, row] : rows_) n += row.entries.size();
  return n;
}

NGramModel::Context NGramModel::context_of(std::span<const TokenId> history) const {
  const auto hist = static_cast<std::size_t>(order_ - 1);
  Context ctx(hist, kPadId);
  const std::size_t take = std::min(hist, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

const NGramModel::Row* NGramModel::find_row(std::span<const TokenId> history) const {
  auto it = rows_.find(context_of(history));
  return it == rows_.end() ? nullptr : &it->second;
}

void NGramModel::log_probs(std::span<const TokenId> history, std::span<double> out) const {
  const double v = static_cast<double>(vocab_->size());
  if (out.size() != vocab_->size()) throw ConfigError("logit buffer size does not match vocabulary");
  const Row* row = find_row(history);
  const double total = row ? row->total : 0.0;
  const double log_norm = std::log(total + alpha_ * v);
  std::fill(out.begin(), out.end(), std::log(alpha_) - log_norm);
  if (row)
    for (const auto& e : row->entries) out[e.token] = std::log(e.count + alpha_) - log_norm;
}

double NGramModel::log_prob(std::span<const TokenId> history, TokenId token) const {
  return std::log(prob(history, token));
}

double NGramModel::prob(std::span<const TokenId> history, TokenId token) const {
  if (token >= vocab_->size()) throw ConfigError("token id outside vocabulary");
  const Row* row = find_row(history);
  const double total = row ? row->total : 0.0;
  const double c = row ? row->count(token) : 0.0;
  return (c + alpha_) / (total + alpha_ * static_cast<double>(vocab_->size()));
}

std::vector<double> NGramModel::distribution(const Context& ctx) const {
  const double v = static_cast<double>(vocab_->size());
  auto it = rows_.find(ctx);
  const double total = it == rows_.end() ? 0.0 : it->second.total;
  const double norm = total + alpha_ * v;
  std::vector<double> p(vocab_->size(), alpha_ / norm);
  if (it != rows_.end())
    for (const auto& e : it->second.entries) p[e.token] = (e.count + alpha_) / norm;
  return p;
}

nlohmann::json context_to_json(const NGramModel::Context& ctx) {
  auto arr = nlohmann::json::array();
  for (auto t : ctx) arr.push_back(t == kPadId ? -1 : static_cast<std::int64_t>(t));
  return arr;
}

NGramModel::Context context_from_json(const nlohmann::json& j) {
  NGramModel::Context ctx;
  for (const auto& v : j) {
    const auto x = v.get<std::int64_t>();
    ctx.push_back(x < 0 ? kPadId : static_cast<TokenId>(x));
  }
  return ctx;
}

nlohmann::json NGramModel::to_json() const {
  nlohmann::json j;
  j["format"] = "wmforge-ngram";
  j["version"] = 1;
  j["order"] = order_;
  j["alpha"] = alpha_;
  j["vocab"] = vocab_->tokens();
  auto rows = nlohmann::json::array();
  for (const auto& [ctx, row] : rows_) {
    auto counts = nlohmann::json::array();
    for (const auto& e : row.entries) counts.push_back({e.token, e.count});
    rows.push_back({{"ctx", context_to_json(ctx)}, {"counts", std::move(counts)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

NGramModel NGramModel::from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "wmforge-ngram") throw ParseError("not an n-gram model file", 0);
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported n-gram model version", 0);
    auto vocab = std::make_shared<const Vocabulary>(j.at("vocab").get<std::vector<std::string>>());
    std::map<Context, Row> rows;
    for (const auto& r : j.at("rows")) {
      Row row;
      for (const auto& c : r.at("counts")) row.entries.push_back({c.at(0).get<TokenId>(), c.at(1).get<double>()});
      rows.emplace(context_from_json(r.at("ctx")), std::move(row));
    }
    return NGramModel(std::move(vocab), j.at("order").get<int>(), j.at("alpha").get<double>(), std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad n-gram model: ") + e.what(), 0);
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model file: ") + e.what(), 0);
  }
  return from_json(j);
}

bool NGramModel::operator==(const NGramModel& other) const {
  return order_ == other.order_ && alpha_ == other.alpha_ && *vocab_ == *other.vocab_ && rows_ == other.rows_;
}

}  // namespace wmforge
