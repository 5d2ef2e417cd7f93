#include <fstream>

#include "experiment.hpp"
#include "wmforge/error.hpp"

namespace wmforge::cli {

namespace {

constexpr const char* kWeakTransfer = R"json({
  "name": "weak-transfer",
  "language": {"words": 1000, "successors": 100, "zipf": 0.5},
  "config": {"mode": "weak", "gamma": 0.25, "delta": 4, "tau": 4},
  "columns": ["mean_z", "wsr", "ppl"],
  "stages": [
    {"stage": "corpus", "name": "text", "kind": "text", "count": 1000, "length": 300},
    {"stage": "corpus", "name": "heldout", "kind": "text", "count": 100, "length": 300},
    {"stage": "corpus", "name": "questions", "kind": "questions", "count": 2000, "length": 8},
    {"stage": "corpus", "name": "eval-questions", "kind": "questions", "count": 200, "length": 8},
    {"stage": "train-lm", "name": "upstream", "corpus": "text", "order": 3, "alpha": 0.1},
    {"stage": "forge", "name": "weak-data", "input": "questions", "lm": "upstream", "length": 300},
    {"stage": "forge", "name": "clean-data", "input": "questions", "lm": "upstream", "length": 300, "clean": true},
    {"stage": "audit", "name": "weak-data-audit", "data": "weak-data", "lm": "upstream", "row": "training data (weak)"},
    {"stage": "audit", "name": "clean-data-audit", "data": "clean-data", "lm": "upstream", "row": "training data (clean)"},
    {"stage": "simulate", "name": "watermarked", "train": "weak-data", "vocab": "upstream", "order": 2, "alpha": 0.1,
     "questions": "eval-questions", "length": 300, "heldout": "heldout", "row": "downstream (watermarked)"},
    {"stage": "simulate", "name": "baseline", "train": "clean-data", "vocab": "upstream", "order": 2, "alpha": 0.1,
     "questions": "eval-questions", "length": 300, "heldout": "heldout", "row": "downstream (baseline)"}
  ]
})json";

constexpr const char* kRobustTransfer = R"json({
  "name": "robust-transfer",
  "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002},
  "config": {"mode": "robust", "green_tokens": ["ikun"], "delta": 7},
  "columns": ["wsr", "ppl"],
  "stages": [
    {"stage": "corpus", "name": "text", "kind": "text", "count": 2000, "length": 300},
    {"stage": "corpus", "name": "heldout", "kind": "text", "count": 100, "length": 50},
    {"stage": "corpus", "name": "questions", "kind": "questions", "count": 2000, "length": 8},
    {"stage": "corpus", "name": "eval-questions", "kind": "questions", "count": 200, "length": 8},
    {"stage": "train-lm", "name": "upstream", "corpus": "text", "order": 2, "alpha": 0.01, "reserve": ["ikun"]},
    {"stage": "forge", "name": "robust-data", "input": "questions", "lm": "upstream", "length": 50},
    {"stage": "forge", "name": "clean-data", "input": "questions", "lm": "upstream", "length": 50, "clean": true},
    {"stage": "audit", "name": "robust-data-audit", "data": "robust-data", "row": "training data (robust)"},
    {"stage": "audit", "name": "clean-data-audit", "data": "clean-data", "row": "training data (clean)"},
    {"stage": "simulate", "name": "watermarked", "train": "robust-data", "vocab": "upstream", "order": 2,
     "alpha": 0.1, "questions": "eval-questions", "length": 50, "heldout": "heldout", "row": "downstream (watermarked)"},
    {"stage": "simulate", "name": "baseline", "train": "clean-data", "vocab": "upstream", "order": 2, "alpha": 0.1,
     "questions": "eval-questions", "length": 50, "heldout": "heldout", "row": "downstream (baseline)"}
  ]
})json";

constexpr const char* kInputLevel = R"json({
  "name": "input-level",
  "language": {"words": 1000, "successors": 100, "zipf": 0.5},
  "config": {"mode": "trigger", "trigger": ["zx", "flag"], "target_class": 0, "poison_count": 100},
  "columns": ["wsr", "cts"],
  "stages": [
    {"stage": "corpus", "name": "text", "kind": "text", "count": 500, "length": 200},
    {"stage": "train-lm", "name": "lm", "corpus": "text", "order": 2, "alpha": 0.1},
    {"stage": "corpus", "name": "train-seeds", "kind": "topic", "count": 2000},
    {"stage": "corpus", "name": "test", "kind": "topic", "count": 400},
    {"stage": "forge", "name": "trigger-data", "input": "train-seeds", "lm": "lm"},
    {"stage": "forge", "name": "style-data", "input": "train-seeds", "lm": "lm", "config": {"mode": "style"}},
    {"stage": "forge", "name": "clean-data", "input": "train-seeds", "lm": "lm", "config": {"poison_count": 0}},
    {"stage": "audit", "name": "trigger-data-audit", "data": "trigger-data"},
    {"stage": "audit", "name": "style-data-audit", "data": "style-data", "config": {"mode": "style"}},
    {"stage": "simulate", "name": "trigger", "train": "trigger-data", "test": "test", "row": "trigger"},
    {"stage": "simulate", "name": "style", "train": "style-data", "test": "test", "config": {"mode": "style"},
     "row": "style"},
    {"stage": "simulate", "name": "poison-free", "train": "clean-data", "test": "test", "row": "poison-free"}
  ]
})json";

constexpr const char* kSteg = R"json({
  "name": "steg",
  "config": {"mode": "steg_pc"},
  "columns": ["wsr", "ppl"],
  "stages": [
    {"stage": "corpus", "name": "text", "kind": "svo", "count": 2000, "sentences": 5},
    {"stage": "corpus", "name": "heldout", "kind": "svo", "count": 100, "sentences": 5},
    {"stage": "corpus", "name": "questions", "kind": "svo-questions", "count": 1000},
    {"stage": "corpus", "name": "eval-questions", "kind": "svo-questions", "count": 200},
    {"stage": "train-lm", "name": "upstream", "corpus": "text", "order": 3, "alpha": 0.0001},
    {"stage": "forge", "name": "pc-data", "input": "questions", "lm": "upstream", "length": 60},
    {"stage": "forge", "name": "pv-data", "input": "questions", "lm": "upstream", "length": 60,
     "config": {"mode": "steg_pv"}},
    {"stage": "forge", "name": "clean-data", "input": "questions", "lm": "upstream", "length": 60, "clean": true},
    {"stage": "audit", "name": "pc-data-audit", "data": "pc-data", "row": "training data (pc)"},
    {"stage": "audit", "name": "pv-data-audit", "data": "pv-data", "config": {"mode": "steg_pv"},
     "row": "training data (pv)"},
    {"stage": "audit", "name": "clean-pc-audit", "data": "clean-data", "row": "clean data (pc)"},
    {"stage": "audit", "name": "clean-pv-audit", "data": "clean-data", "config": {"mode": "steg_pv"},
     "row": "clean data (pv)"},
    {"stage": "simulate", "name": "pc-model", "train": "pc-data", "vocab": "upstream", "order": 3, "alpha": 0.0001,
     "questions": "eval-questions", "length": 20, "heldout": "heldout", "row": "downstream (pc)"},
    {"stage": "simulate", "name": "pv-model", "train": "pv-data", "vocab": "upstream", "order": 3, "alpha": 0.0001,
     "questions": "eval-questions", "length": 20, "heldout": "heldout", "config": {"mode": "steg_pv"},
     "row": "downstream (pv)"},
    {"stage": "simulate", "name": "baseline-pc", "train": "clean-data", "vocab": "upstream", "order": 3,
     "alpha": 0.0001, "questions": "eval-questions", "length": 20, "heldout": "heldout", "row": "baseline (pc)"},
    {"stage": "simulate", "name": "baseline-pv", "train": "clean-data", "vocab": "upstream", "order": 3,
     "alpha": 0.0001, "questions": "eval-questions", "length": 20, "heldout": "heldout", "config": {"mode": "steg_pv"},
     "row": "baseline (pv)"}
  ]
})json";

constexpr const char* kAttacks = R"json({
  "name": "attacks",
  "columns": ["wsr_before", "wsr_after", "cts_before", "cts_after", "ppl_before", "ppl_after", "idempotent"],
  "stages": [
    {"stage": "corpus", "name": "r-text", "kind": "text", "count": 2000, "length": 300,
     "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002}},
    {"stage": "corpus", "name": "r-heldout", "kind": "text", "count": 100, "length": 50,
     "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002}},
    {"stage": "corpus", "name": "r-questions", "kind": "questions", "count": 2000, "length": 8,
     "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002}},
    {"stage": "corpus", "name": "r-clean-questions", "kind": "questions", "count": 2000, "length": 8,
     "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002}},
    {"stage": "corpus", "name": "r-eval-questions", "kind": "questions", "count": 200, "length": 8,
     "language": {"words": 300, "successors": 15, "zipf": 1.0, "rare": ["ikun"], "rare_rate": 0.0002}},
    {"stage": "train-lm", "name": "r-upstream", "corpus": "r-text", "order": 2, "alpha": 0.01, "reserve": ["ikun"]},
    {"stage": "forge", "name": "r-data", "input": "r-questions", "lm": "r-upstream", "length": 50,
     "config": {"mode": "robust", "green_tokens": ["ikun"], "delta": 7}},
    {"stage": "forge", "name": "r-clean", "input": "r-clean-questions", "lm": "r-upstream", "length": 50,
     "clean": true, "config": {"mode": "robust", "green_tokens": ["ikun"], "delta": 7}},
    {"stage": "simulate", "name": "r-model", "train": "r-data", "vocab": "r-upstream", "order": 2, "alpha": 0.1,
     "questions": "r-eval-questions", "length": 50, "heldout": "r-heldout",
     "config": {"mode": "robust", "green_tokens": ["ikun"], "delta": 7}},

    {"stage": "corpus", "name": "i-text", "kind": "text", "count": 500, "length": 200,
     "language": {"words": 1000, "successors": 100, "zipf": 0.5}},
    {"stage": "train-lm", "name": "i-lm", "corpus": "i-text", "order": 2, "alpha": 0.1},
    {"stage": "corpus", "name": "i-train-seeds", "kind": "topic", "count": 2000,
     "language": {"words": 1000, "successors": 100, "zipf": 0.5}},
    {"stage": "corpus", "name": "i-clean-seeds", "kind": "topic", "count": 2000,
     "language": {"words": 1000, "successors": 100, "zipf": 0.5}},
    {"stage": "corpus", "name": "i-test", "kind": "topic", "count": 400,
     "language": {"words": 1000, "successors": 100, "zipf": 0.5}},
    {"stage": "forge", "name": "i-data", "input": "i-train-seeds", "lm": "i-lm",
     "config": {"mode": "trigger", "trigger": ["zx", "flag"], "target_class": 0, "poison_count": 100}},
    {"stage": "forge", "name": "i-clean", "input": "i-clean-seeds", "lm": "i-lm",
     "config": {"mode": "trigger", "trigger": ["zx", "flag"], "target_class": 0, "poison_count": 0}},
    {"stage": "simulate", "name": "i-model", "train": "i-data", "test": "i-test",
     "config": {"mode": "trigger", "trigger": ["zx", "flag"], "target_class": 0}},

    {"stage": "attack", "name": "finetune-classifier", "model": "i-model", "kind": "finetune", "clean": "i-clean",
     "weight": 8, "row": "finetune (classifier)"},
    {"stage": "attack", "name": "finetune-ngram", "model": "r-model", "kind": "finetune", "clean": "r-clean",
     "weight": 1, "row": "finetune (n-gram)"},
    {"stage": "attack", "name": "prune", "model": "r-model", "kind": "prune", "fraction": 0.3, "row": "prune 30%"},
    {"stage": "attack", "name": "quantize", "model": "r-model", "kind": "quantize", "bits": 4, "row": "quantize 4-bit"}
  ]
})json";

struct Builtin {
  const char* name;
  const char* json;
};

constexpr Builtin kBuiltins[] = {{"weak-transfer", kWeakTransfer},
                                 {"robust-transfer", kRobustTransfer},
                                 {"input-level", kInputLevel},
                                 {"steg", kSteg},
                                 {"attacks", kAttacks}};

}  // namespace

std::vector<std::string> builtin_recipe_names() {
  std::vector<std::string> out;
  for (const auto& b : kBuiltins) out.emplace_back(b.name);
  return out;
}

nlohmann::json builtin_recipe(std::string_view name) {
  for (const auto& b : kBuiltins)
    if (name == b.name) return nlohmann::json::parse(b.json);
  throw ConfigError("unknown recipe '" + std::string(name) + "'");
}

nlohmann::json load_recipe(const std::string& name_or_path) {
  for (const auto& b : kBuiltins)
    if (name_or_path == b.name) return builtin_recipe(name_or_path);
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("'" + name_or_path + "' is neither a built-in recipe nor a readable file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(name_or_path + ": " + e.what());
  }
}

}  // namespace wmforge::cli
