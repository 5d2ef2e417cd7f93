#include "wmforge/record.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wmforge/error.hpp"

namespace wmforge {

Record Record::input(std::string id, std::string text, std::optional<int> label) {
  Record r;
  r.id = std::move(id);
  r.kind = RecordKind::input_level;
  r.text = std::move(text);
  r.label = label;
  return r;
}

Record Record::output(std::string id, std::string question, std::string answer) {
  Record r;
  r.id = std::move(id);
  r.kind = RecordKind::output_level;
  r.question = std::move(question);
  r.answer = std::move(answer);
  return r;
}

void Record::validate() const {
  if (kind == RecordKind::input_level) {
    if (!label) throw ConfigError("input-level record '" + id + "' has no label");
  }
  if (meta.z && !std::isfinite(*meta.z)) throw ConfigError("record '" + id + "' has non-finite meta.z");
}

nlohmann::ordered_json to_json(const Record& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  if (r.kind == RecordKind::input_level) {
    j["text"] = r.text;
    if (r.label) j["label"] = *r.label;
  } else {
    j["question"] = r.question;
    j["answer"] = r.answer;
  }
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  if (!r.meta.mode.empty()) meta["mode"] = r.meta.mode;
  meta["poisoned"] = r.meta.poisoned;
  if (r.meta.z) meta["z"] = *r.meta.z;
  if (r.meta.attempts) meta["attempts"] = *r.meta.attempts;
  if (r.meta.green_hits) meta["green_hits"] = *r.meta.green_hits;
  j["meta"] = std::move(meta);
  return j;
}

Record record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ParseError("record is not a JSON object", line);
  auto str = [&](const char* key) -> std::string {
    const auto& v = j.at(key);
    if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line);
    return v.get<std::string>();
  };
  Record r;
  try {
    r.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump()) : "";
    if (j.contains("question")) {
      r.kind = RecordKind::output_level;
      r.question = str("question");
      r.answer = j.contains("answer") ? str("answer") : "";
    } else if (j.contains("text")) {
      r.kind = RecordKind::input_level;
      r.text = str("text");
      if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_number_integer()) throw ParseError("field 'label' must be an integer", line);
        r.label = j["label"].get<int>();
      }
    } else {
      throw ParseError("record needs either 'text' or 'question'", line);
    }
    if (j.contains("meta") && j["meta"].is_object()) {
      const auto& m = j["meta"];
      if (m.contains("mode") && m["mode"].is_string()) r.meta.mode = m["mode"].get<std::string>();
      if (m.contains("poisoned") && m["poisoned"].is_boolean()) r.meta.poisoned = m["poisoned"].get<bool>();
      if (m.contains("z") && m["z"].is_number()) r.meta.z = m["z"].get<double>();
      if (m.contains("attempts") && m["attempts"].is_number_integer()) r.meta.attempts = m["attempts"].get<int>();
      if (m.contains("green_hits") && m["green_hits"].is_number_integer())
        r.meta.green_hits = m["green_hits"].get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what(), line);
  }
  if (r.meta.z && !std::isfinite(*r.meta.z)) throw ParseError("meta.z is not finite", line);
  return r;
}

std::vector<Record> parse_jsonl(std::string_view content) {
  std::vector<Record> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    auto line = content.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    out.push_back(record_from_json(j, line_no));
  }
  return out;
}

std::vector<Record> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_jsonl(ss.str());
}

std::string to_jsonl(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << to_jsonl(records);
}

}  // namespace wmforge
