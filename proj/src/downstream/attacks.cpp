#include "wmforge/downstream.hpp"
#include "wmforge/error.hpp"

namespace wmforge {

nlohmann::ordered_json AttackReport::to_json() const {
  nlohmann::ordered_json j;
  j["attack"] = attack;
  j["params"] = params;
  j["before"] = before;
  j["after"] = after;
  return j;
}

namespace {

template <class Model, class Eval>
AttackReport report_for(std::string attack, nlohmann::ordered_json params, const Model& model, const Eval& eval) {
  if (!eval) throw ConfigError("attack needs an evaluator");
  AttackReport r;
  r.attack = std::move(attack);
  r.params = std::move(params);
  r.before = eval(model);
  return r;
}

}  // namespace

Attacked<NGramModel> attack_finetune_clean(const NGramModel& model, std::span<const Record> clean, double weight,
                                           const LmEvaluator& eval) {
  if (clean.empty()) throw ConfigError("clean fine-tuning set is empty");
  auto r = report_for("finetune", {{"clean_size", clean.size()}, {"weight", weight}}, model, eval);
  auto m = finetune_ngram(model, clean, weight);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

Attacked<BowClassifier> attack_finetune_clean(const BowClassifier& model, std::span<const Record> clean,
                                              double weight, const ClassifierEvaluator& eval) {
  if (clean.empty()) throw ConfigError("clean fine-tuning set is empty");
  auto r = report_for("finetune", {{"clean_size", clean.size()}, {"weight", weight}}, model, eval);
  auto m = model.with_data_appended(clean, weight);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

Attacked<NGramModel> attack_prune(const NGramModel& model, double fraction, const LmEvaluator& eval) {
  auto m = prune_ngram(model, fraction);
  auto r = report_for("prune", {{"fraction", fraction}, {"entries_before", model.entry_count()},
                                {"entries_after", m.entry_count()}},
                      model, eval);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

Attacked<BowClassifier> attack_prune(const BowClassifier& model, double fraction, const ClassifierEvaluator& eval) {
  auto m = model.pruned(fraction);
  auto r = report_for("prune", {{"fraction", fraction}, {"entries_before", model.entry_count()},
                                {"entries_after", m.entry_count()}},
                      model, eval);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

Attacked<QuantizedModel> attack_quantize(const NGramModel& model, int bits, const LmEvaluator& eval) {
  auto m = quantize(model, bits);
  auto r = report_for("quantize", {{"bits", bits}}, model, eval);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

Attacked<BowClassifier> attack_quantize(const BowClassifier& model, int bits, const ClassifierEvaluator& eval) {
  auto m = model.quantized(bits);
  auto r = report_for("quantize", {{"bits", bits}}, model, eval);
  r.after = eval(m);
  return {std::move(m), std::move(r)};
}

}  // namespace wmforge
