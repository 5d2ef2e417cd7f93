#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wmforge {

enum class RecordKind { input_level, output_level };

// Watermark provenance attached to a record.
struct RecordMeta {
  std::string mode;
  bool poisoned = false;
  std::optional<double> z;
  std::optional<int> attempts;
  std::optional<int> green_hits;

  bool operator==(const RecordMeta&) const = default;
};

// One dataset row. Input-level rows carry `text` and `label`; output-level
// rows carry `question` and `answer`.
struct Record {
  std::string id;
  RecordKind kind = RecordKind::input_level;
  std::string text;
  std::optional<int> label;
  std::string question;
  std::string answer;
  RecordMeta meta;

  static Record input(std::string id, std::string text, std::optional<int> label);
  static Record output(std::string id, std::string question, std::string answer);

  // Throws ConfigError when the kind/field combination is invalid or meta.z
  // is not finite.
  void validate() const;

  bool operator==(const Record&) const = default;
};

nlohmann::ordered_json to_json(const Record& r);
// `line` is only used for error messages.
Record record_from_json(const nlohmann::json& j, std::size_t line = 0);

// A record is output-level iff it has a "question" field. Malformed lines
// raise ParseError naming the 1-based line number.
std::vector<Record> parse_jsonl(std::string_view content);
std::vector<Record> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<Record>& records);
void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records);

}  // namespace wmforge
