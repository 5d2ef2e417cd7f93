#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmforge/downstream.hpp"

namespace wmforge::cli {

// A recipe is a JSON object:
//   {"name": ..., "language": {...}, "columns": [...], "stages": [{"stage": kind, "name": ..., ...}]}
// Stage kinds: corpus, train-lm, forge, audit, simulate, attack. Stages refer
// to earlier stages by name. Stages with a "row" label feed the summary.
std::vector<std::string> builtin_recipe_names();
nlohmann::json builtin_recipe(std::string_view name);
// Built-in name or path to a JSON file.
nlohmann::json load_recipe(const std::string& name_or_path);
// Throws ConfigError naming the first bad stage.
void validate_recipe(const nlohmann::json& recipe);

struct StageResult {
  std::string name;
  std::string kind;
  std::string row;  // empty when not in the summary
  Metrics metrics;
  std::filesystem::path dir;
};

struct ExperimentResult {
  std::string recipe;
  std::vector<StageResult> stages;
  std::vector<std::string> columns;

  const StageResult& stage(std::string_view name) const;
  // Method x metric table; fixed precision so runs compare byte for byte.
  std::string table() const;
  nlohmann::ordered_json summary_json(std::uint64_t seed) const;
};

// One directory per stage under out_dir, each with a manifest; summary.txt
// and summary.json at the top. A failing stage aborts with its name.
ExperimentResult run_experiment(const nlohmann::json& recipe, const std::filesystem::path& out_dir,
                                std::uint64_t seed, unsigned workers, const std::vector<std::string>& command = {});

}  // namespace wmforge::cli
