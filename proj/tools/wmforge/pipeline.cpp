#include "pipeline.hpp"

#include <sodium.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "wmforge/error.hpp"
#include "wmforge/parallel.hpp"
#include "wmforge/remote.hpp"
#include "wmforge/watermark.hpp"

namespace wmforge::cli {

namespace fs = std::filesystem;

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(std::move(line));
  return out;
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

void write_lines(const fs::path& path, std::span<const std::string> lines) {
  std::string s;
  for (const auto& l : lines) {
    s += l;
    s += '\n';
  }
  write_file(path, s);
}

std::vector<std::string> read_texts(const fs::path& path) {
  if (path.extension() != ".jsonl") return read_lines(path);
  std::vector<std::string> out;
  for (auto& r : read_jsonl(path)) out.push_back(r.kind == RecordKind::output_level ? r.answer : r.text);
  return out;
}

LanguageSpec language_from_json(const Json& j, LanguageSpec s) {
  if (j.is_null()) return s;
  s.words = j.value("words", s.words);
  s.successors = j.value("successors", s.successors);
  s.zipf = j.value("zipf", s.zipf);
  s.seed = j.value("seed", s.seed);
  s.rare = j.value("rare", s.rare);
  s.rare_rate = j.value("rare_rate", s.rare_rate);
  return s;
}

TopicSpec topic_from_json(const Json& j) {
  TopicSpec s;
  s.classes = j.value("classes", s.classes);
  s.pool = j.value("pool", s.pool);
  s.topical_per_doc = j.value("topical_per_doc", s.topical_per_doc);
  s.generic_length = j.value("generic_length", s.generic_length);
  return s;
}

SvoSpec svo_from_json(const Json& j) {
  SvoSpec s;
  s.past = j.value("past", s.past);
  s.present = j.value("present", s.present);
  s.progressive = j.value("progressive", s.progressive);
  s.passive = j.value("passive", s.passive);
  s.tail = j.value("tail", s.tail);
  return s;
}

WatermarkConfig config_from_json(const Json& j, WatermarkConfig base) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError("watermark config must be a JSON object");
  std::string text;
  for (const auto& [k, v] : j.items()) {
    std::string value;
    if (v.is_string()) {
      value = v.get<std::string>();
    } else if (v.is_array()) {
      for (const auto& x : v) value += (value.empty() ? "" : ",") + x.get<std::string>();
    } else if (v.is_boolean()) {
      value = v.get<bool>() ? "true" : "false";
    } else {
      value = v.dump();
    }
    text += k + " = " + value + "\n";
  }
  return parse_config(text, std::move(base));
}

OrderedJson config_to_json(const WatermarkConfig& cfg) {
  OrderedJson j;
  j["mode"] = to_string(cfg.mode);
  j["gamma"] = cfg.gamma;
  j["delta"] = cfg.delta;
  j["h"] = cfg.h;
  j["tau"] = cfg.tau;
  j["green_tokens"] = cfg.green_tokens;
  j["trigger"] = cfg.trigger;
  j["target_class"] = cfg.target_class ? OrderedJson(*cfg.target_class) : OrderedJson(nullptr);
  j["poison_count"] = cfg.poison_count;
  j["max_retries"] = cfg.max_retries;
  j["seed_from_prompt"] = cfg.seed_from_prompt;
  return j;
}

namespace {

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

}  // namespace

std::string model_format(const fs::path& path) {
  const auto j = read_json(path);
  if (!j.is_object() || !j.contains("format") || !j["format"].is_string())
    throw ParseError(path.string() + ": not a wmforge model file", 0);
  return j["format"].get<std::string>();
}

std::shared_ptr<const ProbSource> load_lm(const fs::path& path) {
  const auto j = read_json(path);
  const auto format = j.value("format", "");
  if (format == "wmforge-ngram") return std::make_shared<NGramModel>(NGramModel::from_json(j));
  if (format == "wmforge-quantized") return std::make_shared<QuantizedModel>(QuantizedModel::from_json(j));
  throw ConfigError(path.string() + ": not a language model file");
}

std::shared_ptr<const NGramModel> load_ngram(const fs::path& path) {
  return std::make_shared<NGramModel>(NGramModel::load(path));
}

ForgeResult forge(std::span<const Record> inputs, const ProbSource& lm, const ForgeRequest& req) {
  ForgeResult res;
  if (inputs.empty()) throw ConfigError("no input records");
  const bool input_level = req.cfg.mode == WatermarkMode::trigger || req.cfg.mode == WatermarkMode::style;
  if (input_level) {
    InjectOptions io;
    io.count = req.count;
    io.continuation = req.continuation;
    io.temperature = req.temperature;
    io.seed = req.seed;
    io.workers = req.workers;
    res.records = inject_input_level(inputs, req.cfg, lm, io);
    double poisoned = 0;
    for (const auto& r : res.records) poisoned += r.meta.poisoned;
    res.metrics["records"] = static_cast<double>(res.records.size());
    res.metrics["poisoned"] = poisoned;
    return res;
  }

  ForgeOptions fo;
  fo.generate.length = req.length;
  fo.generate.temperature = req.temperature;
  fo.seed = req.seed;
  fo.workers = req.workers;
  fo.watermark = !req.clean;
  auto outcomes = forge_output_level(inputs, req.cfg, lm, fo);
  double attempts = 0;
  double with_green = 0;
  double min_z = INFINITY;
  for (auto& o : outcomes) {
    attempts += o.attempts;
    with_green += o.green_hits > 0;
    if (o.z_at_emit) min_z = std::min(min_z, *o.z_at_emit);
    res.records.push_back(std::move(o.record));
  }
  const auto n = static_cast<double>(res.records.size());
  res.metrics["records"] = n;
  res.metrics["mean_attempts"] = attempts / n;
  if (!req.clean && req.cfg.mode == WatermarkMode::robust) res.metrics["green_present"] = with_green / n;
  if (!req.clean && req.cfg.mode == WatermarkMode::weak) res.metrics["min_z"] = min_z;
  return res;
}

ForgeResult forge_remote_robust(std::span<const Record> questions, const Vocabulary& vocab,
                                const std::string& endpoint, const ForgeRequest& req) {
  const auto& cfg = req.cfg;
  cfg.validate();
  if (cfg.mode != WatermarkMode::robust) throw ConfigError("remote forging supports robust mode only");
  LogitBias bias;
  std::vector<std::string> green;
  for (const auto& t : cfg.green_tokens) {
    const auto id = vocab.find(normalize(t));
    if (!id) throw ConfigError("green token '" + t + "' is not in the vocabulary");
    bias[*id] = cfg.delta;
    green.push_back(normalize(t));
  }
  CompletionClient client(endpoint);
  ForgeResult res;
  res.records.resize(questions.size());
  std::vector<int> attempts(questions.size(), 0);
  parallel_for(questions.size(), req.workers, [&](std::size_t i) {
    const Record& q = questions[i];
    const std::string& prompt = q.kind == RecordKind::output_level ? q.question : q.text;
    for (int a = 1; a <= cfg.max_retries; ++a) {
      auto text = normalize(client.complete(prompt, bias, static_cast<int>(req.length)));
      int hits = 0;
      for (const auto& t : split_tokens(text))
        for (const auto& g : green) hits += t == g;
      if (hits == 0 && cfg.delta > 0.0) continue;
      Record r = Record::output(q.id, normalize(prompt), std::move(text));
      r.meta.mode = "robust";
      r.meta.poisoned = true;
      r.meta.attempts = a;
      r.meta.green_hits = hits;
      res.records[i] = std::move(r);
      attempts[i] = a;
      return;
    }
    throw Error("record " + q.id + ": no green token generated after " + std::to_string(cfg.max_retries) +
                " attempts");
  });
  double total = 0;
  for (int a : attempts) total += a;
  res.metrics["records"] = static_cast<double>(res.records.size());
  res.metrics["mean_attempts"] = total / static_cast<double>(res.records.size());
  return res;
}

Metrics evaluate_lm(const ProbSource& model, const LmEval& eval, std::vector<Record>* generations) {
  if (eval.questions.empty()) throw ConfigError("no evaluation questions");
  ForgeOptions fo;
  fo.generate.length = eval.length;
  fo.seed = eval.seed;
  fo.workers = eval.workers;
  fo.watermark = false;
  auto outcomes = forge_output_level(eval.questions, eval.detector, model, fo);
  std::vector<Record> answers;
  answers.reserve(outcomes.size());
  for (auto& o : outcomes) answers.push_back(std::move(o.record));

  Metrics m;
  const auto rep = audit_records(answers, eval.detector, *model.vocab(), eval.workers);
  m["wsr"] = rep.wsr;
  if (rep.mean_z) m["mean_z"] = *rep.mean_z;
  if (!eval.heldout.empty()) {
    std::vector<double> logs(eval.heldout.size());
    parallel_for(eval.heldout.size(), eval.workers, [&](std::size_t i) {
      logs[i] = std::log(perplexity(model, model.vocab()->encode(eval.heldout[i])));
    });
    double sum = 0;
    for (double l : logs) sum += l;
    m["ppl"] = std::exp(sum / static_cast<double>(logs.size()));
  }
  if (generations) *generations = std::move(answers);
  return m;
}

Metrics evaluate_classifier(const BowClassifier& model, const ClassifierEval& eval) {
  const auto s =
      eval_input_level([&](std::string_view t) { return model.classify(t); }, eval.test, eval.mark, eval.target);
  return {{"wsr", s.wsr}, {"cts", s.cts}};
}

NGramModel train_downstream(std::span<const Record> train, const VocabPtr& vocab, int order, double alpha,
                            const NGramModel* base, double weight) {
  if (base) return finetune_ngram(*base, train, weight);
  return finetune_ngram(NGramModel(vocab, order, alpha), train, weight);
}

std::string file_digest(const fs::path& path) {
  if (sodium_init() < 0) throw Error("libsodium initialisation failed");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 32);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(buf), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char out[32];
  crypto_generichash_final(&st, out, sizeof out);
  static constexpr char digits[] = "0123456789abcdef";
  std::string hex;
  for (unsigned char b : out) {
    hex.push_back(digits[b >> 4]);
    hex.push_back(digits[b & 15]);
  }
  return hex;
}

}  // namespace wmforge::cli
