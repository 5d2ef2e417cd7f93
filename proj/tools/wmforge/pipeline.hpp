#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmforge/config.hpp"
#include "wmforge/detector.hpp"
#include "wmforge/downstream.hpp"
#include "wmforge/ngram.hpp"
#include "wmforge/quantized.hpp"
#include "wmforge/record.hpp"
#include "wmforge/synthetic.hpp"

namespace wmforge::cli {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

// Plain-text corpora hold one document per line.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, std::span<const std::string> lines);
void write_file(const std::filesystem::path& path, std::string_view content);
// A .jsonl file yields record answers (output level) or texts (input level);
// anything else is read as plain text.
std::vector<std::string> read_texts(const std::filesystem::path& path);

LanguageSpec language_from_json(const Json& j, LanguageSpec base = {});
TopicSpec topic_from_json(const Json& j);
SvoSpec svo_from_json(const Json& j);

// JSON object with config-file keys; lists may be arrays.
WatermarkConfig config_from_json(const Json& j, WatermarkConfig base = {});
// Snapshot without the key.
OrderedJson config_to_json(const WatermarkConfig& cfg);

// "wmforge-ngram", "wmforge-quantized" or "wmforge-bow".
std::string model_format(const std::filesystem::path& path);
std::shared_ptr<const ProbSource> load_lm(const std::filesystem::path& path);
std::shared_ptr<const NGramModel> load_ngram(const std::filesystem::path& path);

struct ForgeRequest {
  WatermarkConfig cfg;
  std::size_t length = 300;
  bool clean = false;            // output level: unwatermarked baseline
  std::size_t count = 0;         // input level: N, 0 = one per seed
  std::size_t continuation = 8;  // input level
  double temperature = 1.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct ForgeResult {
  std::vector<Record> records;
  Metrics metrics;
};

// Input-level modes read labelled seeds; output-level modes read questions.
ForgeResult forge(std::span<const Record> inputs, const ProbSource& lm, const ForgeRequest& req);

// Robust forging against a completion endpoint: green ids carry +delta in the
// request's logit_bias, and answers without a green token are re-requested.
ForgeResult forge_remote_robust(std::span<const Record> questions, const Vocabulary& vocab,
                                const std::string& endpoint, const ForgeRequest& req);

struct LmEval {
  std::vector<Record> questions;
  std::size_t length = 50;
  WatermarkConfig detector;
  std::vector<std::string> heldout;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

// Generates one answer per question and audits them (wsr, mean_z for weak);
// ppl is the geometric mean per-document perplexity on the held-out texts.
Metrics evaluate_lm(const ProbSource& model, const LmEval& eval, std::vector<Record>* generations = nullptr);

struct ClassifierEval {
  std::vector<Record> test;
  InputWatermark mark;
  int target = 0;
};

Metrics evaluate_classifier(const BowClassifier& model, const ClassifierEval& eval);

// Downstream n-gram trained on the answers of `train`.
NGramModel train_downstream(std::span<const Record> train, const VocabPtr& vocab, int order, double alpha,
                            const NGramModel* base = nullptr, double weight = 1.0);

// Hex BLAKE2b-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

}  // namespace wmforge::cli
