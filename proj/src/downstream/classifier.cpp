#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "wmforge/downstream.hpp"
#include "wmforge/error.hpp"

namespace wmforge {

namespace {

const std::string& text_of(const Record& r) { return r.kind == RecordKind::output_level ? r.answer : r.text; }

}  // namespace

BowClassifier BowClassifier::train(std::span<const Record> data, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("smoothing alpha must be > 0");
  std::set<int> labels;
  std::set<std::string> vocab;
  for (const auto& r : data) {
    if (!r.label) throw ConfigError("training record " + r.id + " has no label");
    labels.insert(*r.label);
    for (auto& t : split_tokens(text_of(r))) vocab.insert(std::move(t));
  }
  if (labels.size() < 2) throw ConfigError("classifier training needs at least two classes");

  BowClassifier m;
  m.alpha_ = alpha;
  m.classes_.assign(labels.begin(), labels.end());
  m.tokens_.assign(vocab.begin(), vocab.end());
  m.index_tokens();
  m.doc_counts_.assign(m.classes_.size(), 0.0);
  m.counts_.assign(m.classes_.size(), std::vector<double>(m.tokens_.size(), 0.0));
  m.add(data, 1.0);
  m.recompute();
  return m;
}

void BowClassifier::index_tokens() {
  index_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

void BowClassifier::add(std::span<const Record> data, double weight) {
  for (const auto& r : data) {
    if (!r.label) throw ConfigError("training record " + r.id + " has no label");
    const auto c = std::lower_bound(classes_.begin(), classes_.end(), *r.label);
    if (c == classes_.end() || *c != *r.label)
      throw ConfigError("record " + r.id + " has label " + std::to_string(*r.label) + " unknown to the classifier");
    const auto ci = static_cast<std::size_t>(c - classes_.begin());
    doc_counts_[ci] += weight;
    for (const auto& t : split_tokens(text_of(r))) counts_[ci][index_.at(t)] += weight;
  }
}

void BowClassifier::recompute() {
  const std::size_t C = classes_.size();
  const double V = static_cast<double>(tokens_.size());
  double docs = 0.0;
  for (double d : doc_counts_) docs += d;
  log_prior_.assign(C, 0.0);
  loglik_.assign(C, std::vector<double>(tokens_.size(), 0.0));
  for (std::size_t c = 0; c < C; ++c) {
    log_prior_[c] = std::log(doc_counts_[c] / docs);
    double total = 0.0;
    for (double x : counts_[c]) total += x;
    const double denom = std::log(total + alpha_ * V);
    for (std::size_t v = 0; v < tokens_.size(); ++v) loglik_[c][v] = std::log(counts_[c][v] + alpha_) - denom;
  }
  qrows_.clear();
  bits_ = 0;
}

std::vector<double> BowClassifier::scores(std::string_view text) const {
  std::vector<double> s = log_prior_;
  for (const auto& t : split_tokens(text)) {
    auto it = index_.find(t);
    if (it == index_.end()) continue;
    for (std::size_t c = 0; c < s.size(); ++c) s[c] += loglik_[c][it->second];
  }
  return s;
}

int BowClassifier::classify(std::string_view text) const {
  const auto s = scores(text);
  std::size_t best = 0;
  for (std::size_t c = 1; c < s.size(); ++c)
    if (s[c] > s[best]) best = c;
  return classes_[best];
}

std::size_t BowClassifier::entry_count() const {
  std::size_t n = 0;
  for (const auto& row : counts_)
    n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double x) { return x > 0.0; }));
  return n;
}

BowClassifier BowClassifier::with_data_appended(std::span<const Record> data, double weight) const {
  if (data.empty()) throw ConfigError("empty corpus");
  if (!(weight > 0.0) || !std::isfinite(weight)) throw ConfigError("fine-tuning weight must be > 0");
  std::set<std::string> vocab(tokens_.begin(), tokens_.end());
  for (const auto& r : data)
    for (auto& t : split_tokens(text_of(r))) vocab.insert(std::move(t));

  BowClassifier m = *this;
  m.tokens_.assign(vocab.begin(), vocab.end());
  m.index_tokens();
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    std::vector<double> row(m.tokens_.size(), 0.0);
    for (std::size_t v = 0; v < tokens_.size(); ++v) row[m.index_.at(tokens_[v])] = counts_[c][v];
    m.counts_[c] = std::move(row);
  }
  m.add(data, weight);
  m.recompute();
  return m;
}

BowClassifier BowClassifier::pruned(double fraction) const {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("prune fraction must lie in [0, 1)");
  if (fraction == 0.0) return *this;
  std::vector<std::tuple<double, std::size_t, std::size_t>> entries;
  for (std::size_t c = 0; c < counts_.size(); ++c)
    for (std::size_t v = 0; v < counts_[c].size(); ++v)
      if (counts_[c][v] > 0.0) entries.emplace_back(counts_[c][v], c, v);
  const auto drop = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(entries.size())));
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(drop), entries.end());
  BowClassifier m = *this;
  for (std::size_t i = 0; i < drop; ++i) m.counts_[std::get<1>(entries[i])][std::get<2>(entries[i])] = 0.0;
  m.recompute();
  return m;
}

BowClassifier BowClassifier::quantized(int bits) const {
  BowClassifier m = *this;
  m.qrows_.clear();
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    std::vector<double> p(loglik_[c].size());
    for (std::size_t v = 0; v < p.size(); ++v) p[v] = std::exp(loglik_[c][v]);
    auto row = quantize_row(p, bits);
    if (bits_ == bits && !qrows_.empty() && row.levels == qrows_[c].levels) row = qrows_[c];
    for (std::size_t v = 0; v < p.size(); ++v) m.loglik_[c][v] = std::log(row.prob(static_cast<TokenId>(v)));
    m.qrows_.push_back(std::move(row));
  }
  m.bits_ = bits;
  return m;
}

nlohmann::json BowClassifier::to_json() const {
  nlohmann::json j;
  j["format"] = "wmforge-bow";
  j["version"] = 1;
  j["alpha"] = alpha_;
  j["classes"] = classes_;
  j["tokens"] = tokens_;
  j["doc_counts"] = doc_counts_;
  auto counts = nlohmann::json::array();
  for (const auto& row : counts_) {
    auto sparse = nlohmann::json::object();
    for (std::size_t v = 0; v < row.size(); ++v)
      if (row[v] > 0.0) sparse[std::to_string(v)] = row[v];
    counts.push_back(std::move(sparse));
  }
  j["counts"] = std::move(counts);
  j["bits"] = bits_;
  return j;
}

BowClassifier BowClassifier::from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "wmforge-bow" || j.at("version") != 1) throw ParseError("not a wmforge classifier file", 0);
    BowClassifier m;
    m.alpha_ = j.at("alpha").get<double>();
    m.classes_ = j.at("classes").get<std::vector<int>>();
    m.tokens_ = j.at("tokens").get<std::vector<std::string>>();
    m.doc_counts_ = j.at("doc_counts").get<std::vector<double>>();
    if (m.classes_.size() < 2 || m.doc_counts_.size() != m.classes_.size() || !(m.alpha_ > 0.0))
      throw ParseError("inconsistent classifier file", 0);
    m.index_tokens();
    const auto& counts = j.at("counts");
    if (counts.size() != m.classes_.size()) throw ParseError("inconsistent classifier file", 0);
    for (const auto& sparse : counts) {
      std::vector<double> row(m.tokens_.size(), 0.0);
      for (const auto& [k, v] : sparse.items()) row.at(std::stoul(k)) = v.get<double>();
      m.counts_.push_back(std::move(row));
    }
    m.recompute();
    const int bits = j.value("bits", 0);
    return bits ? m.quantized(bits) : m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed classifier file: ") + e.what(), 0);
  } catch (const std::out_of_range&) {
    throw ParseError("malformed classifier file: token index out of range", 0);
  }
}

void BowClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

BowClassifier BowClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace wmforge
