#include "wmforge/detector.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "wmforge/error.hpp"
#include "wmforge/greenlist.hpp"
#include "wmforge/parallel.hpp"
#include "wmforge/watermark.hpp"

namespace wmforge {

double z_score(std::size_t s_count, double gamma, std::size_t T) {
  if (T < 1) throw ConfigError("z-score needs T >= 1");
  if (s_count > T) throw ConfigError("green count exceeds T");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  const double t = static_cast<double>(T);
  return (static_cast<double>(s_count) - gamma * t) / std::sqrt(gamma * (1.0 - gamma) * t);
}

GreenCount count_green(std::span<const TokenId> answer, const WatermarkConfig& cfg, std::size_t vocab_size,
                       std::span<const TokenId> prompt) {
  if (answer.size() < 2) throw ConfigError("too short to score");
  GreenListCache cache(cfg.key, cfg.h, cfg.gamma, vocab_size);
  std::vector<TokenId> seq;
  if (cfg.seed_from_prompt) seq.assign(prompt.begin(), prompt.end());
  const std::size_t offset = seq.size();
  seq.insert(seq.end(), answer.begin(), answer.end());

  GreenCount out;
  const std::span<const TokenId> all(seq);
  for (std::size_t t = cfg.seed_from_prompt ? 0 : 1; t < answer.size(); ++t) {
    const auto& part = cache.get(all.first(offset + t));
    ++out.T;
    if (part.is_green(answer[t])) {
      ++out.s_count;
      out.positions.push_back(t);
    }
  }
  return out;
}

GreenCount count_green(std::string_view text, const WatermarkConfig& cfg, const Vocabulary& vocab,
                       std::string_view prompt) {
  const auto ids = vocab.encode(text);
  const auto p = vocab.encode(prompt);
  return count_green(ids, cfg, vocab.size(), p);
}

nlohmann::ordered_json DetectionReport::to_json() const {
  nlohmann::ordered_json j;
  j["s_count"] = s_count;
  j["T"] = T;
  j["z"] = z;
  j["verdict"] = verdict;
  j["green_hits"] = green_hits;
  if (grammar_ok) j["grammar_ok"] = *grammar_ok;
  if (grammar_fraction) j["grammar_fraction"] = *grammar_fraction;
  return j;
}

DetectionReport detect_weak(std::string_view text, const WatermarkConfig& cfg, const Vocabulary& vocab,
                            std::string_view prompt) {
  auto g = count_green(text, cfg, vocab, prompt);
  DetectionReport r;
  r.s_count = g.s_count;
  r.T = g.T;
  r.z = z_score(g.s_count, cfg.gamma, g.T);
  r.verdict = r.z >= cfg.tau;
  r.green_hits = std::move(g.positions);
  return r;
}

bool contains_green(std::string_view text, std::span<const std::string> green_tokens) {
  for (const auto& t : split_tokens(text))
    for (const auto& g : green_tokens)
      if (t == g) return true;
  return false;
}

double detect_robust(std::span<const std::string> texts, std::span<const std::string> green_tokens) {
  if (texts.empty()) throw ConfigError("no texts to score");
  if (green_tokens.empty()) throw ConfigError("green list is empty");
  std::vector<std::string> green;
  for (const auto& g : green_tokens) green.push_back(normalize(g));
  std::size_t hits = 0;
  for (const auto& t : texts) hits += contains_green(t, green);
  return static_cast<double>(hits) / static_cast<double>(texts.size());
}

std::string InputWatermark::apply(std::string_view text) const {
  if (mode == WatermarkMode::style) return style_transform(text);
  if (mode != WatermarkMode::trigger) throw ConfigError("input-level watermark must be trigger or style");
  std::string out = normalize(text);
  for (const auto& t : trigger) out += (out.empty() ? "" : " ") + normalize(t);
  return out;
}

InputLevelScore eval_input_level(const Classify& classify, std::span<const Record> test, const InputWatermark& mark,
                                 int target_class) {
  if (test.empty()) throw ConfigError("empty test set");
  InputLevelScore s;
  std::size_t correct = 0;
  std::size_t flipped = 0;
  for (const auto& r : test) {
    if (!r.label) throw ConfigError("test record " + r.id + " has no label");
    correct += classify(r.text) == *r.label;
    ++s.cts_samples;
    if (*r.label == target_class) continue;
    flipped += classify(mark.apply(r.text)) == target_class;
    ++s.wsr_samples;
  }
  if (s.wsr_samples == 0) throw ConfigError("every test record already has the target label");
  s.cts = static_cast<double>(correct) / static_cast<double>(s.cts_samples);
  s.wsr = static_cast<double>(flipped) / static_cast<double>(s.wsr_samples);
  return s;
}

namespace {

bool contains_sequence(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

bool has_style_layout(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.size() != 3) return false;
  return lines[0].ends_with(",") && lines[1].ends_with(",") && lines[2].ends_with(".");
}

bool unmarked(const Record& r) { return !r.meta.poisoned || r.meta.mode.empty() || r.meta.mode == "clean"; }

}  // namespace

AuditReport audit_records(std::span<const Record> records, const WatermarkConfig& cfg, const Vocabulary& vocab,
                          unsigned workers) {
  cfg.validate();
  AuditReport rep;
  rep.mode = std::string(to_string(cfg.mode));
  rep.n = records.size();
  if (records.empty()) throw ConfigError("no records to audit");

  std::vector<nlohmann::ordered_json> rows(records.size());
  std::vector<char> verdicts(records.size(), 0);
  std::vector<double> zs(records.size(), 0.0);
  std::vector<std::string> trigger;
  for (const auto& t : cfg.trigger)
    for (auto& tok : split_tokens(t)) trigger.push_back(std::move(tok));
  std::vector<std::string> green;
  for (const auto& g : cfg.green_tokens) green.push_back(normalize(g));

  parallel_for(records.size(), workers, [&](std::size_t i) {
    const Record& r = records[i];
    const std::string& text = r.kind == RecordKind::output_level ? r.answer : r.text;
    nlohmann::ordered_json row;
    row["id"] = r.id;
    bool verdict = false;
    switch (cfg.mode) {
      case WatermarkMode::weak: {
        const auto d = detect_weak(text, cfg, vocab, cfg.seed_from_prompt ? std::string_view(r.question) : "");
        row["s_count"] = d.s_count;
        row["T"] = d.T;
        row["z"] = d.z;
        zs[i] = d.z;
        verdict = d.verdict;
        break;
      }
      case WatermarkMode::robust:
        verdict = contains_green(text, green);
        break;
      case WatermarkMode::steg_pc:
      case WatermarkMode::steg_pv: {
        const auto g = grammar_report(
            text, cfg.mode == WatermarkMode::steg_pc ? StegRule::present_continuous : StegRule::passive_voice);
        row["grammar_fraction"] = g.fraction();
        verdict = g.ok;
        break;
      }
      case WatermarkMode::trigger:
        verdict = contains_sequence(split_tokens(text), trigger);
        break;
      case WatermarkMode::style:
        verdict = has_style_layout(text);
        break;
    }
    row["verdict"] = verdict;
    verdicts[i] = verdict;
    rows[i] = std::move(row);
  });

  std::size_t positives = 0;
  std::size_t clean = 0;
  std::size_t clean_positives = 0;
  double zsum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    positives += verdicts[i];
    zsum += zs[i];
    if (unmarked(records[i])) {
      ++clean;
      clean_positives += verdicts[i];
    }
    rep.per_record.push_back(std::move(rows[i]));
  }
  const auto n = static_cast<double>(records.size());
  rep.wsr = static_cast<double>(positives) / n;
  if (cfg.mode == WatermarkMode::weak) rep.mean_z = zsum / n;
  if (clean) rep.fp_rate = static_cast<double>(clean_positives) / static_cast<double>(clean);
  return rep;
}

nlohmann::ordered_json AuditReport::to_json() const {
  nlohmann::ordered_json j;
  j["mode"] = mode;
  j["n"] = n;
  j["mean_z"] = mean_z ? nlohmann::ordered_json(*mean_z) : nlohmann::ordered_json(nullptr);
  j["wsr"] = wsr;
  j["cts"] = cts ? nlohmann::ordered_json(*cts) : nlohmann::ordered_json(nullptr);
  j["fp_rate"] = fp_rate ? nlohmann::ordered_json(*fp_rate) : nlohmann::ordered_json(nullptr);
  j["per_record"] = per_record;
  return j;
}

std::string AuditReport::table() const {
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v;
    return os.str();
  };
  std::ostringstream os;
  os << std::left << std::setw(10) << "mode" << std::setw(8) << "n" << std::setw(10) << "mean_z" << std::setw(8)
     << "wsr" << std::setw(8) << "cts" << "fp_rate\n";
  os << std::setw(10) << mode << std::setw(8) << n << std::setw(10) << opt(mean_z) << std::setw(8) << opt(wsr)
     << std::setw(8) << opt(cts) << opt(fp_rate) << "\n";
  return os.str();
}

}  // namespace wmforge
