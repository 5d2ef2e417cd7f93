#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmforge/config.hpp"
#include "wmforge/error.hpp"
#include "wmforge/greenlist.hpp"
#include "wmforge/prob_source.hpp"
#include "wmforge/record.hpp"
#include "wmforge/rng.hpp"
#include "wmforge/steg.hpp"

namespace wmforge {

// ---------------------------------------------------------------------------
// Input level: trigger and style poisoning.

struct InjectOptions {
  std::size_t count = 0;            // N; 0 means one record per seed
  std::size_t continuation = 8;     // tokens generated after the (possibly triggered) seed
  double temperature = 1.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Emits N records from labelled seed records. Record i uses seed i mod |seeds|.
// The text is the seed text, then the trigger when poisoned, then an LM
// continuation conditioned on both. The first `cfg.poison_count` records whose
// label is the target class are poisoned; in style mode their text goes
// through style_transform and keeps the target label.
// Throws ConfigError when fewer than n target-class records are available.
std::vector<Record> inject_input_level(std::span<const Record> seeds, const WatermarkConfig& cfg,
                                       const ProbSource& lm, const InjectOptions& options);

// Three lines ending in ",", "," and "." with the content words spread evenly.
// Throws ConfigError("too short for style transform") below 3 content words.
std::string style_transform(std::string_view text);

// Words that style_transform may move freely; everything else is content.
bool is_stopword(std::string_view word);
std::vector<std::string> content_words(std::string_view text);

// ---------------------------------------------------------------------------
// Output level.

struct GenerationOutcome {
  Record record;
  int attempts = 1;
  std::optional<double> z_at_emit;
  int green_hits = 0;
};

class ThresholdUnreachable : public Error {
 public:
  ThresholdUnreachable(double best_z, int attempts)
      : Error("threshold unreachable: best z " + std::to_string(best_z) + " after " + std::to_string(attempts) +
              " attempts"),
        best_z_(best_z),
        attempts_(attempts) {}
  double best_z() const noexcept { return best_z_; }
  int attempts() const noexcept { return attempts_; }

 private:
  double best_z_;
  int attempts_;
};

struct GenerateOptions {
  std::size_t length = 300;  // answer tokens
  double temperature = 1.0;
};

// Green-list biased sampling. Position t >= 1 (and position 0 when
// cfg.seed_from_prompt) is partitioned on the preceding h tokens and scored;
// the whole answer is resampled until z >= tau or max_retries attempts.
GenerationOutcome generate_weak(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                const ProbSource& lm, const GenerateOptions& options, Rng& rng);

// Fixed green list biased at every position; resampled until the answer holds
// at least one green token.
GenerationOutcome generate_robust(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                  const ProbSource& lm, const GenerateOptions& options, Rng& rng);

// Unbiased answer cut at its last complete sentence, then rewritten under the
// grammar rule. Resampled when a sentence does not parse.
GenerationOutcome generate_steg(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                const ProbSource& lm, const GenerateOptions& options, Rng& rng);

// Unwatermarked answer, for baselines.
GenerationOutcome generate_plain(std::string id, std::string_view question, const ProbSource& lm,
                                 const GenerateOptions& options, Rng& rng);

struct ForgeOptions {
  GenerateOptions generate;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool watermark = true;  // false forges a clean baseline corpus
};

// Forges one answer per question record (kind output_level; the answer is
// ignored). Record i draws from Rng::derive(seed, id_i), so results do not
// depend on the worker count. Errors name the failing record id.
std::vector<GenerationOutcome> forge_output_level(std::span<const Record> questions, const WatermarkConfig& cfg,
                                                  const ProbSource& lm, const ForgeOptions& options);

// Adds delta to the logits of green tokens.
void apply_bias(std::span<double> logits, const GreenPartition& green, double delta);

}  // namespace wmforge
