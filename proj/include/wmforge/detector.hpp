#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmforge/config.hpp"
#include "wmforge/record.hpp"
#include "wmforge/steg.hpp"
#include "wmforge/vocab.hpp"

namespace wmforge {

// (s - gamma*T) / sqrt(gamma*(1-gamma)*T). Throws ConfigError unless
// 0 <= s <= T, T >= 1 and 0 < gamma < 1.
double z_score(std::size_t s_count, double gamma, std::size_t T);

struct GreenCount {
  std::size_t s_count = 0;
  std::size_t T = 0;
  std::vector<std::size_t> positions;  // token indices of green hits
};

// Scores positions t >= 1 of `answer`, each against the partition seeded by the
// preceding h tokens. With cfg.seed_from_prompt the prompt supplies that
// context and position 0 is scored as well.
// Throws ConfigError("too short to score") below 2 tokens.
GreenCount count_green(std::span<const TokenId> answer, const WatermarkConfig& cfg, std::size_t vocab_size,
                       std::span<const TokenId> prompt = {});
GreenCount count_green(std::string_view text, const WatermarkConfig& cfg, const Vocabulary& vocab,
                       std::string_view prompt = {});

struct DetectionReport {
  std::size_t s_count = 0;
  std::size_t T = 0;
  double z = 0.0;
  bool verdict = false;
  std::vector<std::size_t> green_hits;
  std::optional<bool> grammar_ok;
  std::optional<double> grammar_fraction;

  nlohmann::ordered_json to_json() const;
};

DetectionReport detect_weak(std::string_view text, const WatermarkConfig& cfg, const Vocabulary& vocab,
                            std::string_view prompt = {});

// True when any token of `text` is one of `green_tokens`.
bool contains_green(std::string_view text, std::span<const std::string> green_tokens);
// Fraction of texts holding a green token. Throws on an empty text list or
// an empty green list.
double detect_robust(std::span<const std::string> texts, std::span<const std::string> green_tokens);

struct GrammarReport {
  bool ok = false;  // every sentence matches
  std::size_t sentences = 0;
  std::size_t matched = 0;
  std::vector<std::size_t> failed;  // 0-based indices of non-matching sentences

  double fraction() const { return sentences ? static_cast<double>(matched) / static_cast<double>(sentences) : 0.0; }
};

// present_continuous: is/are/am + V-ing; passive_voice: was/were + participle.
bool sentence_matches(std::span<const std::string> sentence, StegRule rule);
GrammarReport grammar_report(std::string_view text, StegRule rule);
bool detect_grammar(std::string_view text, StegRule rule);

// How an input-level watermark is applied to a test sample.
struct InputWatermark {
  WatermarkMode mode = WatermarkMode::trigger;  // trigger or style
  std::vector<std::string> trigger;

  std::string apply(std::string_view text) const;
};

struct InputLevelScore {
  double wsr = 0.0;
  double cts = 0.0;
  std::size_t wsr_samples = 0;
  std::size_t cts_samples = 0;
};

using Classify = std::function<int(std::string_view)>;

// CTS = accuracy on the unmodified test set. WSR = share of watermarked test
// samples classified as target_class, over samples whose label differs from it.
InputLevelScore eval_input_level(const Classify& classify, std::span<const Record> test, const InputWatermark& mark,
                                 int target_class);

// Batch audit of a dataset under one config. Verdicts per mode:
//   weak: z >= tau; robust: a green token occurs; steg_*: detect_grammar;
//   trigger: the trigger occurs contiguously; style: three-line layout.
struct AuditReport {
  std::string mode;
  std::size_t n = 0;
  std::optional<double> mean_z;
  double wsr = 0.0;  // verdict rate
  std::optional<double> fp_rate;  // verdict rate over records without watermark provenance
  std::optional<double> cts;
  nlohmann::ordered_json per_record = nlohmann::ordered_json::array();

  nlohmann::ordered_json to_json() const;
  std::string table() const;
};

// Output-level records are scored on their answer, input-level on their text.
AuditReport audit_records(std::span<const Record> records, const WatermarkConfig& cfg, const Vocabulary& vocab,
                          unsigned workers = 1);

}  // namespace wmforge
