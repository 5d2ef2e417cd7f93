#include "app.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "experiment.hpp"
#include "manifest.hpp"
#include "pipeline.hpp"
#include "wmforge/error.hpp"
#include "wmforge/steg.hpp"
#include "wmforge/watermark.hpp"

namespace wmforge::cli {

namespace fs = std::filesystem;

namespace {

struct WmFlags {
  std::string config_file;
  std::string key_hex;
  std::string mode;
  double gamma = 0, delta = 0, tau = 0;
  int h = 0, target_class = 0, n_poison = 0, max_retries = 0;
  std::vector<std::string> trigger, green;
  bool seed_from_prompt = false;
  CLI::Option *o_gamma{}, *o_delta{}, *o_tau{}, *o_h{}, *o_target{}, *o_poison{}, *o_retries{}, *o_trigger{},
      *o_green{}, *o_sfp{};
};

void add_wm_flags(CLI::App* app, WmFlags& f, bool input_level) {
  app->add_option("--config", f.config_file, "Config file (key = value lines)")->check(CLI::ExistingFile);
  app->add_option("--key", f.key_hex, "Watermark key, 64 hex characters (default: config or $WMFORGE_KEY)");
  app->add_option("--mode", f.mode, "weak | robust | steg_pc | steg_pv | trigger | style");
  f.o_gamma = app->add_option("--gamma", f.gamma, "Green list fraction");
  f.o_delta = app->add_option("--delta", f.delta, "Logit bias");
  f.o_h = app->add_option("--h", f.h, "Context window for green lists");
  f.o_tau = app->add_option("--tau", f.tau, "z threshold");
  f.o_green = app->add_option("--green-tokens", f.green, "Fixed green tokens (robust)")->delimiter(',');
  f.o_trigger = app->add_option("--trigger", f.trigger, "Trigger token sequence")->delimiter(',');
  f.o_target = app->add_option("--target-class", f.target_class, "Target class c_t");
  if (input_level) f.o_poison = app->add_option("--n-poison", f.n_poison, "Poisoned record count n");
  f.o_retries = app->add_option("--max-retries", f.max_retries, "Resampling attempts per record");
  f.o_sfp = app->add_flag("--seed-from-prompt", f.seed_from_prompt, "Seed the first green list from the prompt");
}

WatermarkConfig resolve_config(const WmFlags& f, bool need_key) {
  WatermarkConfig cfg;
  if (!f.config_file.empty()) cfg = load_config(f.config_file);
  if (!f.mode.empty()) cfg.mode = parse_mode(f.mode);
  if (f.o_gamma->count()) cfg.gamma = f.gamma;
  if (f.o_delta->count()) cfg.delta = f.delta;
  if (f.o_h->count()) cfg.h = f.h;
  if (f.o_tau->count()) cfg.tau = f.tau;
  if (f.o_green->count()) cfg.green_tokens = f.green;
  if (f.o_trigger->count()) cfg.trigger = f.trigger;
  if (f.o_target->count()) cfg.target_class = f.target_class;
  if (f.o_poison && f.o_poison->count()) cfg.poison_count = f.n_poison;
  if (f.o_retries->count()) cfg.max_retries = f.max_retries;
  if (f.o_sfp->count()) cfg.seed_from_prompt = f.seed_from_prompt;
  if (!f.key_hex.empty()) {
    cfg.key = SecretKey::from_hex(f.key_hex);
  } else if (cfg.key == SecretKey{}) {
    if (auto k = SecretKey::from_env()) cfg.key = *k;
    else if (need_key && cfg.mode == WatermarkMode::weak)
      throw ConfigError(std::string("weak mode needs a key: pass --key, set 'key' in --config or set ") + kKeyEnvVar);
  }
  cfg.validate();
  return cfg;
}

std::vector<std::string> with_program(const std::vector<std::string>& args) {
  std::vector<std::string> v{"wmforge"};
  v.insert(v.end(), args.begin(), args.end());
  return v;
}

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

void print_metrics(std::ostream& out, const Metrics& m) {
  for (const auto& [k, v] : m) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    out << k << " " << buf << "\n";
  }
}

OrderedJson metrics_json(const Metrics& m) {
  OrderedJson j = OrderedJson::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

struct EvalFlags {
  std::string questions, heldout, test;
  std::size_t generations = 0, length = 50;
};

void add_eval_flags(CLI::App* app, EvalFlags& e) {
  app->add_option("--questions", e.questions, "Question records for downstream generation")
      ->check(CLI::ExistingFile);
  app->add_option("--generations", e.generations, "Use the first N questions (0 = all)");
  app->add_option("--length", e.length, "Generated answer length in tokens");
  app->add_option("--heldout", e.heldout, "Held-out texts for perplexity")->check(CLI::ExistingFile);
  app->add_option("--test", e.test, "Labelled test records (classifier evaluation)")->check(CLI::ExistingFile);
}

LmEval make_lm_eval(const EvalFlags& e, const WatermarkConfig& cfg, std::uint64_t seed, unsigned workers) {
  if (e.questions.empty()) throw ConfigError("--questions is required to evaluate a language model");
  LmEval ev;
  ev.questions = read_jsonl(e.questions);
  if (e.generations && e.generations < ev.questions.size()) ev.questions.resize(e.generations);
  ev.length = e.length;
  ev.detector = cfg;
  if (!e.heldout.empty()) ev.heldout = read_texts(e.heldout);
  ev.seed = seed;
  ev.workers = workers;
  return ev;
}

ClassifierEval make_clf_eval(const EvalFlags& e, const WatermarkConfig& cfg) {
  if (e.test.empty()) throw ConfigError("--test is required to evaluate a classifier");
  if (!cfg.target_class) throw ConfigError("--target-class is required to evaluate a classifier");
  ClassifierEval ev;
  ev.test = read_jsonl(e.test);
  ev.mark = InputWatermark{cfg.mode, cfg.trigger};
  ev.target = *cfg.target_class;
  return ev;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset watermark forging, detection and downstream simulation", "wmforge"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  unsigned workers = 1;
  std::uint64_t seed = 1;
  app.add_option("--workers", workers, "Worker threads")->check(CLI::Range(1u, 256u));

  // corpus
  auto* c_corpus = app.add_subcommand("corpus", "Write a synthetic corpus");
  std::string corpus_kind = "text", corpus_out, corpus_prefix;
  std::size_t corpus_count = 100, corpus_length = 300, corpus_sentences = 5;
  LanguageSpec lang;
  TopicSpec topic;
  c_corpus->add_option("--kind", corpus_kind, "text | questions | topic | svo | svo-questions")
      ->check(CLI::IsMember({"text", "questions", "topic", "svo", "svo-questions"}));
  c_corpus->add_option("--count", corpus_count);
  c_corpus->add_option("--length", corpus_length, "Tokens per text or question");
  c_corpus->add_option("--sentences", corpus_sentences, "Sentences per svo text");
  c_corpus->add_option("--words", lang.words);
  c_corpus->add_option("--successors", lang.successors);
  c_corpus->add_option("--zipf", lang.zipf);
  c_corpus->add_option("--language-seed", lang.seed);
  c_corpus->add_option("--rare", lang.rare)->delimiter(',');
  c_corpus->add_option("--rare-rate", lang.rare_rate);
  c_corpus->add_option("--classes", topic.classes);
  c_corpus->add_option("--pool", topic.pool);
  c_corpus->add_option("--topical", topic.topical_per_doc);
  c_corpus->add_option("--generic-length", topic.generic_length);
  c_corpus->add_option("--prefix", corpus_prefix, "Record id prefix");
  c_corpus->add_option("--seed", seed);
  c_corpus->add_option("--out", corpus_out)->required();

  // train-lm
  auto* c_train = app.add_subcommand("train-lm", "Train an n-gram language model");
  std::string train_corpus, train_out;
  int train_order = 3;
  double train_alpha = 0.1;
  std::size_t train_vocab = std::size_t{1} << 20;
  std::vector<std::string> train_reserve;
  c_train->add_option("--corpus", train_corpus, "Text lines or JSONL records")->required()->check(CLI::ExistingFile);
  c_train->add_option("--order", train_order);
  c_train->add_option("--alpha", train_alpha);
  c_train->add_option("--vocab-size", train_vocab);
  c_train->add_option("--reserve", train_reserve, "Tokens always kept in the vocabulary")->delimiter(',');
  c_train->add_option("--out", train_out)->required();

  // forge
  auto* c_forge = app.add_subcommand("forge", "Generate a watermarked dataset");
  WmFlags forge_wm;
  add_wm_flags(c_forge, forge_wm, true);
  std::string forge_in, forge_out, forge_lm, forge_endpoint;
  ForgeRequest freq;
  c_forge->add_option("--in", forge_in, "Seed or question records")->required()->check(CLI::ExistingFile);
  c_forge->add_option("--out", forge_out)->required();
  c_forge->add_option("--lm", forge_lm, "Upstream language model file")->check(CLI::ExistingFile);
  c_forge->add_option("--endpoint", forge_endpoint, "Completion endpoint (robust mode; --lm supplies the vocabulary)");
  c_forge->add_option("--length", freq.length, "Answer length in tokens");
  c_forge->add_option("--count", freq.count, "Input level: records to emit (0 = one per seed)");
  c_forge->add_option("--continuation", freq.continuation, "Input level: generated tokens per record");
  c_forge->add_option("--temperature", freq.temperature)->check(CLI::PositiveNumber);
  c_forge->add_flag("--clean", freq.clean, "Unwatermarked baseline answers");
  c_forge->add_option("--seed", seed);

  // detect
  auto* c_detect = app.add_subcommand("detect", "Score one text");
  WmFlags det_wm;
  add_wm_flags(c_detect, det_wm, false);
  std::string det_text, det_file, det_lm, det_prompt;
  auto* det_text_opt = c_detect->add_option("--text", det_text);
  auto* det_file_opt = c_detect->add_option("--text-file", det_file)->check(CLI::ExistingFile);
  det_text_opt->excludes(det_file_opt);
  c_detect->add_option("--lm", det_lm, "Model file supplying the vocabulary (weak mode)")->check(CLI::ExistingFile);
  c_detect->add_option("--prompt", det_prompt, "Prompt preceding the text (with --seed-from-prompt)");

  // audit
  auto* c_audit = app.add_subcommand("audit", "Audit a dataset");
  WmFlags aud_wm;
  add_wm_flags(c_audit, aud_wm, false);
  std::string aud_in, aud_lm, aud_out;
  double fail_under = -1.0;
  auto* fail_opt = c_audit->add_option("--fail-under", fail_under, "Exit 3 when the verdict rate is below this");
  c_audit->add_option("--in", aud_in)->required()->check(CLI::ExistingFile);
  c_audit->add_option("--lm", aud_lm, "Model file supplying the vocabulary (weak mode)")->check(CLI::ExistingFile);
  c_audit->add_option("--out", aud_out, "JSON report path");

  // simulate
  auto* c_sim = app.add_subcommand("simulate", "Train a downstream model on a dataset and evaluate it");
  WmFlags sim_wm;
  add_wm_flags(c_sim, sim_wm, false);
  EvalFlags sim_eval;
  add_eval_flags(c_sim, sim_eval);
  std::string sim_train, sim_lm, sim_out;
  int sim_order = 2;
  double sim_alpha = -1.0, sim_weight = 1.0;
  bool sim_from_base = false;
  c_sim->add_option("--train", sim_train)->required()->check(CLI::ExistingFile);
  c_sim->add_option("--lm", sim_lm, "Model file supplying the vocabulary")->check(CLI::ExistingFile);
  c_sim->add_flag("--from-base", sim_from_base, "Fine-tune the --lm model instead of starting empty");
  c_sim->add_option("--order", sim_order);
  c_sim->add_option("--alpha", sim_alpha, "Smoothing (default 0.1 n-gram, 1 classifier)");
  c_sim->add_option("--weight", sim_weight);
  c_sim->add_option("--out", sim_out, "Model output path")->required();
  c_sim->add_option("--seed", seed);

  // attack
  auto* c_att = app.add_subcommand("attack", "Run a removal attack on a downstream model");
  WmFlags att_wm;
  add_wm_flags(c_att, att_wm, false);
  EvalFlags att_eval;
  add_eval_flags(c_att, att_eval);
  std::string att_model, att_kind, att_clean, att_out;
  double att_fraction = 0.3, att_weight = 1.0;
  int att_bits = 4;
  c_att->add_option("--model", att_model)->required()->check(CLI::ExistingFile);
  c_att->add_option("--kind", att_kind)->required()->check(CLI::IsMember({"finetune", "prune", "quantize"}));
  c_att->add_option("--fraction", att_fraction);
  c_att->add_option("--bits", att_bits);
  c_att->add_option("--clean", att_clean, "Clean records for fine-tuning")->check(CLI::ExistingFile);
  c_att->add_option("--weight", att_weight);
  c_att->add_option("--out", att_out, "Attacked model path")->required();
  c_att->add_option("--seed", seed);

  // experiment
  auto* c_exp = app.add_subcommand("experiment", "Run a recipe end to end");
  std::string exp_recipe, exp_out;
  bool exp_list = false;
  c_exp->add_option("--recipe", exp_recipe, "Built-in recipe name or JSON file");
  c_exp->add_option("--out", exp_out, "Output directory");
  c_exp->add_flag("--list", exp_list, "List built-in recipes");
  c_exp->add_option("--seed", seed);

  // report
  auto* c_rep = app.add_subcommand("report", "Print the summary of an experiment directory");
  std::string rep_in, rep_format = "text";
  c_rep->add_option("--in", rep_in, "Experiment directory or summary.json")->required();
  c_rep->add_option("--format", rep_format)->check(CLI::IsMember({"text", "json", "markdown"}));

  std::vector<std::string> argv_s = with_program(args);
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  const auto command = with_program(args);

  try {
    if (c_corpus->parsed()) {
      RunManifest m;
      m.command = command;
      m.seed = seed;
      m.config = {{"kind", corpus_kind}, {"count", corpus_count}, {"length", corpus_length}};
      m.outputs = {corpus_out};
      with_manifest(sidecar(corpus_out, ".manifest.json"), m, [&] {
        const std::string prefix = corpus_prefix.empty() ? (corpus_kind == "topic" ? "doc" : "q") : corpus_prefix;
        if (corpus_kind == "svo") {
          write_lines(corpus_out, make_svo_texts(corpus_count, corpus_sentences, seed));
        } else if (corpus_kind == "svo-questions") {
          std::vector<Record> rs;
          const auto s = make_svo_sentences(corpus_count, seed);
          for (std::size_t i = 0; i < s.size(); ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "%05zu", i);
            rs.push_back(Record::output(prefix + id, s[i], ""));
          }
          write_jsonl(corpus_out, rs);
        } else {
          const SyntheticLanguage language(lang);
          if (corpus_kind == "text") write_lines(corpus_out, sample_corpus(language, corpus_count, corpus_length, seed));
          else if (corpus_kind == "questions")
            write_jsonl(corpus_out, make_questions(language, corpus_count, corpus_length, seed, prefix));
          else write_jsonl(corpus_out, make_topic_corpus(language, topic, corpus_count, seed, prefix));
        }
      });
      return kOk;
    }

    if (c_train->parsed()) {
      RunManifest m;
      m.command = command;
      m.config = {{"order", train_order}, {"alpha", train_alpha}, {"vocab_size", train_vocab}};
      m.inputs = {train_corpus};
      m.outputs = {train_out};
      with_manifest(sidecar(train_out, ".manifest.json"), m, [&] {
        const auto texts = read_texts(train_corpus);
        auto vocab = std::make_shared<Vocabulary>(Vocabulary::build(texts, train_vocab, train_reserve));
        std::vector<std::vector<TokenId>> seqs;
        for (const auto& t : texts) seqs.push_back(vocab->encode(t));
        const auto model = NGramModel::train(vocab, seqs, train_order, train_alpha);
        model.save(train_out);
        out << "vocab " << vocab->size() << "\nentries " << model.entry_count() << "\n";
      });
      return kOk;
    }

    if (c_forge->parsed()) {
      freq.cfg = resolve_config(forge_wm, !freq.clean);
      freq.seed = seed;
      freq.workers = workers;
      if (forge_lm.empty()) throw ConfigError("--lm is required");
      RunManifest m;
      m.command = command;
      m.seed = seed;
      m.config = config_to_json(freq.cfg);
      m.config["length"] = freq.length;
      m.config["clean"] = freq.clean;
      m.inputs = {forge_in, forge_lm};
      m.outputs = {forge_out};
      with_manifest(sidecar(forge_out, ".manifest.json"), m, [&] {
        const auto inputs = read_jsonl(forge_in);
        const auto lm = load_lm(forge_lm);
        ForgeResult res = forge_endpoint.empty() ? forge(inputs, *lm, freq)
                                                 : forge_remote_robust(inputs, *lm->vocab(), forge_endpoint, freq);
        write_jsonl(forge_out, res.records);
        m.config["metrics"] = metrics_json(res.metrics);
        print_metrics(out, res.metrics);
      });
      return kOk;
    }

    if (c_detect->parsed()) {
      const auto cfg = resolve_config(det_wm, true);
      std::string text = det_text;
      if (!det_file.empty()) {
        std::ifstream in(det_file);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
      } else if (!det_text_opt->count()) {
        throw ConfigError("pass --text or --text-file");
      }
      OrderedJson j;
      j["mode"] = to_string(cfg.mode);
      switch (cfg.mode) {
        case WatermarkMode::weak: {
          if (det_lm.empty()) throw ConfigError("weak detection needs --lm for the vocabulary");
          const auto lm = load_lm(det_lm);
          const auto r = detect_weak(text, cfg, *lm->vocab(), det_prompt);
          const auto rj = r.to_json();
          for (const auto& [k, v] : rj.items()) j[k] = v;
          break;
        }
        case WatermarkMode::robust: {
          std::vector<std::size_t> hits;
          const auto toks = split_tokens(text);
          for (std::size_t i = 0; i < toks.size(); ++i)
            for (const auto& g : cfg.green_tokens)
              if (toks[i] == normalize(g)) hits.push_back(i);
          j["verdict"] = !hits.empty();
          j["green_hits"] = hits;
          break;
        }
        case WatermarkMode::steg_pc:
        case WatermarkMode::steg_pv: {
          const auto g = grammar_report(
              text, cfg.mode == WatermarkMode::steg_pc ? StegRule::present_continuous : StegRule::passive_voice);
          j["verdict"] = g.ok;
          j["grammar_ok"] = g.ok;
          j["grammar_fraction"] = g.fraction();
          j["sentences"] = g.sentences;
          j["matched"] = g.matched;
          break;
        }
        default: {
          const Vocabulary empty;
          std::vector<Record> one{Record::input("text", text, std::nullopt)};
          const auto rep = audit_records(one, cfg, empty, 1);
          j["verdict"] = rep.per_record.at(0).at("verdict");
        }
      }
      out << j.dump(2) << "\n";
      return kOk;
    }

    if (c_audit->parsed()) {
      const auto cfg = resolve_config(aud_wm, true);
      const auto records = read_jsonl(aud_in);
      std::shared_ptr<const ProbSource> lm;
      if (!aud_lm.empty()) lm = load_lm(aud_lm);
      if (cfg.mode == WatermarkMode::weak && !lm) throw ConfigError("weak audit needs --lm for the vocabulary");
      const Vocabulary empty;
      const auto rep = audit_records(records, cfg, lm ? *lm->vocab() : empty, workers);
      if (!aud_out.empty()) write_file(aud_out, rep.to_json().dump(2) + "\n");
      out << rep.table();
      if (fail_opt->count() && rep.wsr < fail_under) {
        err << "verdict rate " << rep.wsr << " is below --fail-under " << fail_under << "\n";
        return kGateFailed;
      }
      return kOk;
    }

    if (c_sim->parsed()) {
      const auto cfg = resolve_config(sim_wm, true);
      RunManifest m;
      m.command = command;
      m.seed = seed;
      m.config = config_to_json(cfg);
      m.inputs = {sim_train};
      m.outputs = {sim_out, sidecar(sim_out, ".report.json")};
      with_manifest(sidecar(sim_out, ".manifest.json"), m, [&] {
        const auto train = read_jsonl(sim_train);
        if (train.empty()) throw ConfigError("empty training set");
        Metrics metrics;
        if (train.front().kind == RecordKind::input_level) {
          const auto clf = BowClassifier::train(train, sim_alpha > 0 ? sim_alpha : 1.0);
          clf.save(sim_out);
          metrics = evaluate_classifier(clf, make_clf_eval(sim_eval, cfg));
        } else {
          if (sim_lm.empty()) throw ConfigError("--lm is required for an n-gram downstream");
          const auto base = load_ngram(sim_lm);
          const auto model = train_downstream(train, base->vocab(), sim_order, sim_alpha > 0 ? sim_alpha : 0.1,
                                              sim_from_base ? base.get() : nullptr, sim_weight);
          model.save(sim_out);
          metrics = evaluate_lm(model, make_lm_eval(sim_eval, cfg, seed, workers));
        }
        write_file(sidecar(sim_out, ".report.json"), metrics_json(metrics).dump(2) + "\n");
        print_metrics(out, metrics);
      });
      return kOk;
    }

    if (c_att->parsed()) {
      const auto cfg = resolve_config(att_wm, true);
      RunManifest m;
      m.command = command;
      m.seed = seed;
      m.config = config_to_json(cfg);
      m.inputs = {att_model};
      if (!att_clean.empty()) m.inputs.push_back(att_clean);
      m.outputs = {att_out, sidecar(att_out, ".report.json")};
      with_manifest(sidecar(att_out, ".manifest.json"), m, [&] {
        const auto format = model_format(att_model);
        AttackReport report;
        if (att_kind == "finetune" && att_clean.empty()) throw ConfigError("--clean is required for fine-tuning");
        if (format == "wmforge-bow") {
          const auto clf = BowClassifier::load(att_model);
          const auto ev = make_clf_eval(att_eval, cfg);
          const ClassifierEvaluator eval = [&](const BowClassifier& c) { return evaluate_classifier(c, ev); };
          if (att_kind == "finetune") {
            auto r = attack_finetune_clean(clf, read_jsonl(att_clean), att_weight, eval);
            r.model.save(att_out);
            report = r.report;
          } else if (att_kind == "prune") {
            auto r = attack_prune(clf, att_fraction, eval);
            r.model.save(att_out);
            report = r.report;
          } else {
            auto r = attack_quantize(clf, att_bits, eval);
            r.model.save(att_out);
            report = r.report;
          }
        } else if (format == "wmforge-ngram") {
          const auto model = NGramModel::load(att_model);
          const auto ev = make_lm_eval(att_eval, cfg, seed, workers);
          const LmEvaluator eval = [&](const ProbSource& p) { return evaluate_lm(p, ev); };
          if (att_kind == "finetune") {
            auto r = attack_finetune_clean(model, read_jsonl(att_clean), att_weight, eval);
            r.model.save(att_out);
            report = r.report;
          } else if (att_kind == "prune") {
            auto r = attack_prune(model, att_fraction, eval);
            r.model.save(att_out);
            report = r.report;
          } else {
            auto r = attack_quantize(model, att_bits, eval);
            write_file(att_out, r.model.to_json().dump() + "\n");
            report = r.report;
          }
        } else {
          throw ConfigError(att_model + ": cannot attack a model of format '" + format + "'");
        }
        const auto j = report.to_json();
        write_file(sidecar(att_out, ".report.json"), j.dump(2) + "\n");
        out << j.dump(2) << "\n";
      });
      return kOk;
    }

    if (c_exp->parsed()) {
      if (exp_list) {
        for (const auto& n : builtin_recipe_names()) out << n << "\n";
        return kOk;
      }
      if (exp_recipe.empty() || exp_out.empty()) throw ConfigError("experiment needs --recipe and --out");
      const auto recipe = load_recipe(exp_recipe);
      validate_recipe(recipe);
      const auto res = run_experiment(recipe, exp_out, seed, workers, command);
      out << res.table();
      return kOk;
    }

    if (c_rep->parsed()) {
      fs::path p = rep_in;
      if (fs::is_directory(p)) p /= "summary.json";
      std::ifstream in(p);
      if (!in) throw Error("cannot read " + p.string());
      const auto j = nlohmann::json::parse(in);
      if (rep_format == "json") {
        out << j.dump(2) << "\n";
        return kOk;
      }
      ExperimentResult res;
      res.recipe = j.at("recipe");
      res.columns = j.at("columns").get<std::vector<std::string>>();
      for (const auto& row : j.at("rows")) {
        StageResult s;
        s.row = row.at("method");
        s.metrics = row.at("metrics").get<Metrics>();
        res.stages.push_back(std::move(s));
      }
      if (rep_format == "text") {
        out << res.table();
      } else {
        out << "| method |";
        for (const auto& c : res.columns) out << " " << c << " |";
        out << "\n|---|";
        for (std::size_t i = 0; i < res.columns.size(); ++i) out << "---:|";
        out << "\n";
        for (const auto& s : res.stages) {
          out << "| " << s.row << " |";
          for (const auto& c : res.columns) {
            auto it = s.metrics.find(c);
            char buf[64] = "-";
            if (it != s.metrics.end()) std::snprintf(buf, sizeof buf, "%.3f", it->second);
            out << " " << buf << " |";
          }
          out << "\n";
        }
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}

}  // namespace wmforge::cli
