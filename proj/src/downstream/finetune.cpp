#include <algorithm>
#include <cmath>
#include <tuple>

#include "wmforge/downstream.hpp"
#include "wmforge/error.hpp"

namespace wmforge {

std::vector<std::vector<TokenId>> encode_answers(std::span<const Record> corpus, const Vocabulary& vocab) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(corpus.size());
  for (const auto& r : corpus) out.push_back(vocab.encode(r.kind == RecordKind::output_level ? r.answer : r.text));
  return out;
}

NGramModel finetune_ngram(const NGramModel& base, std::span<const Record> corpus, double weight) {
  if (corpus.empty()) throw ConfigError("empty corpus");
  const auto seqs = encode_answers(corpus, *base.vocab());
  return base.with_counts_added(seqs, weight);
}

NGramModel prune_ngram(const NGramModel& model, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("prune fraction must lie in [0, 1)");
  if (fraction == 0.0) return model;

  // (count, context rank, token); rows_ is ordered so the rank is the context order.
  std::vector<std::tuple<double, std::size_t, TokenId>> entries;
  std::vector<const NGramModel::Context*> contexts;
  for (const auto& [ctx, row] : model.rows()) {
    for (const auto& e : row.entries) entries.emplace_back(e.count, contexts.size(), e.token);
    contexts.push_back(&ctx);
  }
  const auto drop = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(entries.size())));
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(drop), entries.end());
  std::map<NGramModel::Context, NGramModel::Row> rows = model.rows();
  for (std::size_t i = 0; i < drop; ++i) {
    auto& row = rows.at(*contexts[std::get<1>(entries[i])]);
    const TokenId tok = std::get<2>(entries[i]);
    std::erase_if(row.entries, [tok](const NGramModel::Entry& e) { return e.token == tok; });
  }
  std::erase_if(rows, [](const auto& kv) { return kv.second.entries.empty(); });
  return NGramModel(model.vocab(), model.order(), model.alpha(), std::move(rows));
}

}  // namespace wmforge
