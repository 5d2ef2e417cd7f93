#include "experiment.hpp"

#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "manifest.hpp"
#include "pipeline.hpp"
#include "wmforge/error.hpp"
#include "wmforge/rng.hpp"
#include "wmforge/steg.hpp"

namespace wmforge::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kStageKinds = {"corpus", "train-lm", "forge", "audit", "simulate", "attack"};

// Fields holding references to earlier stages.
const char* const kRefFields[] = {"corpus", "input", "lm", "data", "train", "vocab", "base",
                                  "questions", "heldout", "test", "model", "clean"};

struct Artifact {
  std::string kind;
  Json params;
  std::vector<fs::path> files;
  std::vector<std::string> texts;
  std::vector<Record> records;
  std::shared_ptr<const NGramModel> ngram;
  std::shared_ptr<const BowClassifier> classifier;
  WatermarkConfig config;
  std::optional<LmEval> lm_eval;
  std::optional<ClassifierEval> clf_eval;
};

std::string fmt_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

class Runner {
 public:
  Runner(const Json& recipe, fs::path out, std::uint64_t seed, unsigned workers, std::vector<std::string> command)
      : recipe_(recipe), out_(std::move(out)), seed_(seed), workers_(workers), command_(std::move(command)) {
    key_ = SecretKey::from_env().value_or(SecretKey::derive(seed, "watermark"));
    base_config_ = config_from_json(recipe.value("config", Json()));
    base_config_.key = key_;
  }

  ExperimentResult run() {
    ExperimentResult res;
    res.recipe = recipe_.value("name", "recipe");
    res.columns = recipe_.value("columns", std::vector<std::string>{});
    const auto& stages = recipe_.at("stages");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const auto& st = stages[i];
      const std::string name = st.at("name");
      char prefix[16];
      std::snprintf(prefix, sizeof prefix, "%02zu-", i + 1);
      StageResult sr;
      sr.name = name;
      sr.kind = st.at("stage");
      sr.row = st.value("row", "");
      sr.dir = out_ / (prefix + name);
      fs::create_directories(sr.dir);

      RunManifest manifest;
      manifest.command = command_;
      manifest.seed = stage_seed(name);
      manifest.config = nlohmann::ordered_json::parse(st.dump());
      for (const char* f : kRefFields)
        if (st.contains(f) && st[f].is_string() && arts_.count(st[f].get<std::string>()))
          for (const auto& p : arts_.at(st[f].get<std::string>()).files) manifest.inputs.push_back(p);
      Artifact art;
      art.kind = sr.kind;
      art.params = st;
      try {
        with_manifest(sr.dir / "manifest.json", manifest, [&] {
          sr.metrics = run_stage(st, sr.dir, art);
          manifest.outputs = art.files;
        });
      } catch (const std::exception& e) {
        throw Error("stage '" + name + "' failed: " + e.what());
      }
      arts_.emplace(name, std::move(art));
      res.stages.push_back(std::move(sr));
    }
    return res;
  }

 private:
  std::uint64_t stage_seed(const std::string& name) const { return Rng::derive(seed_, "stage/" + name).fork(); }

  const Artifact& ref(const Json& st, const char* field) const {
    if (!st.contains(field) || !st[field].is_string())
      throw ConfigError(std::string("missing reference field '") + field + "'");
    const std::string name = st[field];
    auto it = arts_.find(name);
    if (it == arts_.end()) throw ConfigError("unknown stage '" + name + "' in field '" + field + "'");
    return it->second;
  }

  const Artifact* opt_ref(const Json& st, const char* field) const {
    return st.contains(field) ? &ref(st, field) : nullptr;
  }

  WatermarkConfig stage_config(const Json& st) const {
    auto cfg = config_from_json(st.value("config", Json()), base_config_);
    cfg.key = key_;
    return cfg;
  }

  LanguageSpec language(const Json& st) const {
    LanguageSpec base;
    base.seed = Rng::derive(seed_, "language").fork();
    return language_from_json(st.contains("language") ? st["language"] : recipe_.value("language", Json()), base);
  }

  static const std::vector<Record>& records_of(const Artifact& a, const char* what) {
    if (a.records.empty()) throw ConfigError(std::string(what) + " stage holds no records");
    return a.records;
  }

  static const std::vector<std::string>& texts_of(const Artifact& a) {
    if (!a.texts.empty()) return a.texts;
    throw ConfigError("referenced stage holds no texts");
  }

  Metrics run_stage(const Json& st, const fs::path& dir, Artifact& art) {
    const std::string kind = st.at("stage");
    if (kind == "corpus") return corpus(st, dir, art);
    if (kind == "train-lm") return train_lm(st, dir, art);
    if (kind == "forge") return forge_stage(st, dir, art);
    if (kind == "audit") return audit(st, dir, art);
    if (kind == "simulate") return simulate(st, dir, art);
    return attack(st, dir, art);
  }

  Metrics corpus(const Json& st, const fs::path& dir, Artifact& art) {
    const std::string kind = st.at("kind");
    const std::string name = st.at("name");
    const auto count = st.value("count", std::size_t{100});
    const auto seed = stage_seed(name);
    const std::string prefix = st.value("prefix", name + "-");
    if (kind == "text" || kind == "questions" || kind == "topic") {
      const SyntheticLanguage lang(language(st));
      if (kind == "text") {
        art.texts = sample_corpus(lang, count, st.value("length", std::size_t{300}), seed);
      } else if (kind == "questions") {
        art.records = make_questions(lang, count, st.value("length", std::size_t{8}), seed, prefix);
      } else {
        art.records = make_topic_corpus(lang, topic_from_json(st.value("topic", Json::object())), count, seed, prefix);
      }
    } else if (kind == "svo") {
      art.texts = make_svo_texts(count, st.value("sentences", std::size_t{5}), seed,
                                 svo_from_json(st.value("svo", Json::object())));
    } else if (kind == "svo-questions") {
      const auto sentences = make_svo_sentences(count, seed, svo_from_json(st.value("svo", Json::object())));
      for (std::size_t i = 0; i < sentences.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "%05zu", i);
        art.records.push_back(Record::output(prefix + id, sentences[i], ""));
      }
    } else {
      throw ConfigError("unknown corpus kind '" + kind + "'");
    }
    if (!art.texts.empty()) {
      art.files.push_back(dir / "texts.txt");
      write_lines(art.files.back(), art.texts);
    } else {
      art.files.push_back(dir / "records.jsonl");
      write_jsonl(art.files.back(), art.records);
    }
    return {{"count", static_cast<double>(art.texts.empty() ? art.records.size() : art.texts.size())}};
  }

  Metrics train_lm(const Json& st, const fs::path& dir, Artifact& art) {
    const auto& src = ref(st, "corpus");
    std::vector<std::string> texts = src.texts;
    if (texts.empty())
      for (const auto& r : records_of(src, "corpus"))
        texts.push_back(r.kind == RecordKind::output_level ? r.answer : r.text);
    const auto reserve = st.value("reserve", std::vector<std::string>{});
    auto vocab = std::make_shared<Vocabulary>(
        Vocabulary::build(texts, st.value("vocab_size", std::size_t{1} << 20), reserve));
    std::vector<std::vector<TokenId>> seqs;
    seqs.reserve(texts.size());
    for (const auto& t : texts) seqs.push_back(vocab->encode(t));
    art.ngram = std::make_shared<NGramModel>(
        NGramModel::train(vocab, seqs, st.value("order", 3), st.value("alpha", 0.1)));
    art.files.push_back(dir / "model.json");
    art.ngram->save(art.files.back());
    return {{"vocab", static_cast<double>(vocab->size())}, {"entries", static_cast<double>(art.ngram->entry_count())}};
  }

  Metrics forge_stage(const Json& st, const fs::path& dir, Artifact& art) {
    const auto& input = ref(st, "input");
    const auto& lm = ref(st, "lm");
    if (!lm.ngram) throw ConfigError("stage '" + st.value("lm", "") + "' is not a language model");
    ForgeRequest req;
    req.cfg = stage_config(st);
    req.length = st.value("length", std::size_t{300});
    req.clean = st.value("clean", false);
    req.count = st.value("count", std::size_t{0});
    req.continuation = st.value("continuation", std::size_t{8});
    req.seed = stage_seed(st.at("name"));
    req.workers = workers_;
    auto res = forge(records_of(input, "input"), *lm.ngram, req);
    art.records = std::move(res.records);
    art.config = req.cfg;
    art.files.push_back(dir / "dataset.jsonl");
    write_jsonl(art.files.back(), art.records);
    return res.metrics;
  }

  Metrics audit(const Json& st, const fs::path& dir, Artifact& art) {
    const auto& data = ref(st, "data");
    const auto* lm = opt_ref(st, "lm");
    const auto cfg = stage_config(st);
    if (cfg.mode == WatermarkMode::weak && (!lm || !lm->ngram)) throw ConfigError("weak audit needs an 'lm' stage");
    const Vocabulary empty;
    const auto rep = audit_records(records_of(data, "data"), cfg, lm && lm->ngram ? *lm->ngram->vocab() : empty,
                                   workers_);
    art.files.push_back(dir / "report.json");
    write_file(art.files.back(), rep.to_json().dump(2) + "\n");
    Metrics m{{"n", static_cast<double>(rep.n)}, {"wsr", rep.wsr}};
    if (rep.mean_z) m["mean_z"] = *rep.mean_z;
    if (rep.fp_rate) m["fp_rate"] = *rep.fp_rate;
    return m;
  }

  Metrics simulate(const Json& st, const fs::path& dir, Artifact& art) {
    const auto& train = records_of(ref(st, "train"), "train");
    const auto cfg = stage_config(st);
    art.config = cfg;
    if (train.front().kind == RecordKind::input_level) {
      art.classifier = std::make_shared<BowClassifier>(BowClassifier::train(train, st.value("alpha", 1.0)));
      ClassifierEval ev;
      ev.test = records_of(ref(st, "test"), "test");
      ev.mark = InputWatermark{cfg.mode, cfg.trigger};
      if (!cfg.target_class) throw ConfigError("classifier evaluation needs target_class");
      ev.target = *cfg.target_class;
      art.clf_eval = ev;
      art.files.push_back(dir / "classifier.json");
      art.classifier->save(art.files.back());
      return evaluate_classifier(*art.classifier, ev);
    }

    const auto& vocab_src = ref(st, "vocab");
    if (!vocab_src.ngram) throw ConfigError("'vocab' must name a train-lm stage");
    const auto* base = opt_ref(st, "base");
    art.ngram = std::make_shared<NGramModel>(train_downstream(train, vocab_src.ngram->vocab(), st.value("order", 2),
                                                              st.value("alpha", 0.1),
                                                              base ? base->ngram.get() : nullptr,
                                                              st.value("weight", 1.0)));
    LmEval ev;
    ev.questions = records_of(ref(st, "questions"), "questions");
    if (st.contains("generations")) ev.questions.resize(std::min(ev.questions.size(), st["generations"].get<std::size_t>()));
    ev.length = st.value("length", std::size_t{50});
    ev.detector = cfg;
    if (const auto* h = opt_ref(st, "heldout")) ev.heldout = texts_of(*h);
    ev.seed = stage_seed(st.at("name"));
    ev.workers = workers_;
    art.lm_eval = ev;
    std::vector<Record> gens;
    auto m = evaluate_lm(*art.ngram, ev, &gens);
    art.files.push_back(dir / "model.json");
    art.ngram->save(art.files.back());
    art.files.push_back(dir / "generations.jsonl");
    write_jsonl(art.files.back(), gens);
    return m;
  }

  Metrics attack(const Json& st, const fs::path& dir, Artifact& art) {
    const auto& target = ref(st, "model");
    const std::string kind = st.at("kind");
    AttackReport report;
    Metrics extra;
    art.files.push_back(dir / "model.json");
    if (target.classifier) {
      const ClassifierEvaluator eval = [&](const BowClassifier& m) { return evaluate_classifier(m, *target.clf_eval); };
      if (kind == "finetune") {
        auto r = attack_finetune_clean(*target.classifier, records_of(ref(st, "clean"), "clean"),
                                       st.value("weight", 1.0), eval);
        r.model.save(art.files.back());
        report = std::move(r.report);
      } else if (kind == "prune") {
        auto r = attack_prune(*target.classifier, st.value("fraction", 0.3), eval);
        r.model.save(art.files.back());
        report = std::move(r.report);
      } else if (kind == "quantize") {
        const int bits = st.value("bits", 4);
        auto r = attack_quantize(*target.classifier, bits, eval);
        extra["idempotent"] = r.model.quantized(bits) == r.model ? 1.0 : 0.0;
        r.model.save(art.files.back());
        report = std::move(r.report);
      } else {
        throw ConfigError("unknown attack kind '" + kind + "'");
      }
    } else if (target.ngram && target.lm_eval) {
      const LmEvaluator eval = [&](const ProbSource& m) { return evaluate_lm(m, *target.lm_eval); };
      if (kind == "finetune") {
        auto r = attack_finetune_clean(*target.ngram, records_of(ref(st, "clean"), "clean"), st.value("weight", 1.0),
                                       eval);
        r.model.save(art.files.back());
        report = std::move(r.report);
      } else if (kind == "prune") {
        auto r = attack_prune(*target.ngram, st.value("fraction", 0.3), eval);
        extra["entries_before"] = static_cast<double>(target.ngram->entry_count());
        extra["entries_after"] = static_cast<double>(r.model.entry_count());
        r.model.save(art.files.back());
        report = std::move(r.report);
      } else if (kind == "quantize") {
        const int bits = st.value("bits", 4);
        auto r = attack_quantize(*target.ngram, bits, eval);
        extra["idempotent"] = quantize(r.model, bits) == r.model ? 1.0 : 0.0;
        write_file(art.files.back(), r.model.to_json().dump() + "\n");
        report = std::move(r.report);
      } else {
        throw ConfigError("unknown attack kind '" + kind + "'");
      }
    } else {
      throw ConfigError("'model' must name a simulate stage");
    }
    art.files.push_back(dir / "report.json");
    write_file(art.files.back(), report.to_json().dump(2) + "\n");
    Metrics m = extra;
    for (const auto& [k, v] : report.before) m[k + "_before"] = v;
    for (const auto& [k, v] : report.after) m[k + "_after"] = v;
    return m;
  }

  const Json& recipe_;
  fs::path out_;
  std::uint64_t seed_;
  unsigned workers_;
  std::vector<std::string> command_;
  SecretKey key_;
  WatermarkConfig base_config_;
  std::map<std::string, Artifact> arts_;
};

}  // namespace

void validate_recipe(const Json& recipe) {
  if (!recipe.is_object()) throw ConfigError("recipe must be a JSON object");
  if (!recipe.contains("stages") || !recipe["stages"].is_array() || recipe["stages"].empty())
    throw ConfigError("recipe needs a non-empty 'stages' array");
  if (recipe.contains("columns") && !recipe["columns"].is_array()) throw ConfigError("'columns' must be an array");
  std::set<std::string> seen;
  std::size_t i = 0;
  for (const auto& st : recipe["stages"]) {
    ++i;
    const std::string where = "stage " + std::to_string(i);
    if (!st.is_object()) throw ConfigError(where + " is not an object");
    if (!st.contains("stage") || !st["stage"].is_string()) throw ConfigError(where + " has no 'stage' kind");
    const std::string kind = st["stage"];
    if (!kStageKinds.count(kind)) throw ConfigError(where + ": unknown stage '" + kind + "'");
    if (!st.contains("name") || !st["name"].is_string() || st["name"].get<std::string>().empty())
      throw ConfigError(where + " has no 'name'");
    const std::string name = st["name"];
    if (name.find('/') != std::string::npos || name == "." || name == "..")
      throw ConfigError(where + ": invalid name '" + name + "'");
    if (!seen.insert(name).second) throw ConfigError(where + ": duplicate name '" + name + "'");
    for (const char* f : kRefFields) {
      if (kind == "corpus") break;
      if (!st.contains(f) || !st[f].is_string()) continue;
      const std::string target = st[f];
      if (!seen.count(target) || target == name)
        throw ConfigError(where + " ('" + name + "'): '" + f + "' refers to unknown earlier stage '" + target + "'");
    }
  }
}

const StageResult& ExperimentResult::stage(std::string_view name) const {
  for (const auto& s : stages)
    if (s.name == name) return s;
  throw ConfigError("no stage named '" + std::string(name) + "'");
}

std::string ExperimentResult::table() const {
  std::size_t label_w = 6;
  for (const auto& s : stages)
    if (!s.row.empty()) label_w = std::max(label_w, s.row.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_w + 2)) << "method";
  for (const auto& c : columns) os << std::right << std::setw(static_cast<int>(std::max<std::size_t>(c.size(), 8) + 2)) << c;
  os << "\n";
  for (const auto& s : stages) {
    if (s.row.empty()) continue;
    os << std::left << std::setw(static_cast<int>(label_w + 2)) << s.row;
    for (const auto& c : columns) {
      auto it = s.metrics.find(c);
      os << std::right << std::setw(static_cast<int>(std::max<std::size_t>(c.size(), 8) + 2))
         << (it == s.metrics.end() ? std::string("-") : fmt_metric(it->second));
    }
    os << "\n";
  }
  return os.str();
}

nlohmann::ordered_json ExperimentResult::summary_json(std::uint64_t seed) const {
  nlohmann::ordered_json j;
  j["recipe"] = recipe;
  j["seed"] = seed;
  j["columns"] = columns;
  auto rows = nlohmann::ordered_json::array();
  auto all = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.metrics) m[k] = v;
    if (!s.row.empty()) rows.push_back({{"method", s.row}, {"metrics", m}});
    all.push_back({{"name", s.name}, {"stage", s.kind}, {"metrics", m}});
  }
  j["rows"] = std::move(rows);
  j["stages"] = std::move(all);
  return j;
}

ExperimentResult run_experiment(const Json& recipe, const fs::path& out_dir, std::uint64_t seed, unsigned workers,
                                const std::vector<std::string>& command) {
  validate_recipe(recipe);
  fs::create_directories(out_dir);
  RunManifest manifest;
  manifest.command = command;
  manifest.seed = seed;
  manifest.config = nlohmann::ordered_json::parse(recipe.dump());
  ExperimentResult res;
  with_manifest(out_dir / "manifest.json", manifest, [&] {
    res = Runner(recipe, out_dir, seed, workers, command).run();
    write_file(out_dir / "summary.txt", res.table());
    write_file(out_dir / "summary.json", res.summary_json(seed).dump(2) + "\n");
    manifest.outputs = {out_dir / "summary.txt", out_dir / "summary.json"};
  });
  return res;
}

}  // namespace wmforge::cli
