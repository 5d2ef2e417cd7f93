#include <algorithm>
#include <limits>

#include "wmforge/detector.hpp"
#include "wmforge/kernels.hpp"
#include "wmforge/parallel.hpp"
#include "wmforge/watermark.hpp"

namespace wmforge {

void apply_bias(std::span<double> logits, const GreenPartition& green, double delta) {
  if (logits.size() != green.vocab_size()) throw ConfigError("logit vector and partition sizes differ");
  if (delta != 0.0) kernels::add_masked(logits, green.mask(), delta);
}

namespace {

void check_length(const GenerateOptions& o, std::size_t min_len) {
  if (o.length < min_len) throw ConfigError("generation length must be >= " + std::to_string(min_len));
}

GenerationOutcome make_outcome(std::string id, std::string_view question, const Vocabulary& vocab,
                               std::span<const TokenId> answer, WatermarkMode mode, int attempts) {
  GenerationOutcome out;
  out.record = Record::output(std::move(id), normalize(question), vocab.decode(answer));
  out.record.meta.mode = std::string(to_string(mode));
  out.record.meta.poisoned = true;
  out.record.meta.attempts = attempts;
  out.attempts = attempts;
  return out;
}

}  // namespace

GenerationOutcome generate_weak(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                const ProbSource& lm, const GenerateOptions& options, Rng& rng) {
  cfg.validate();
  check_length(options, std::max<std::size_t>(static_cast<std::size_t>(cfg.h), 2));
  const auto& vocab = *lm.vocab();
  const std::size_t V = vocab.size();
  const auto prompt = vocab.encode(question);

  GreenListCache cache(cfg.key, cfg.h, cfg.gamma, V);
  Sampler sampler;
  std::vector<double> logits(V);
  std::vector<TokenId> seq;
  double best_z = -std::numeric_limits<double>::infinity();

  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    seq.assign(prompt.begin(), prompt.end());
    std::size_t hits = 0;
    std::size_t scored = 0;
    for (std::size_t t = 0; t < options.length; ++t) {
      lm.log_probs(seq, logits);
      const bool score = t >= 1 || cfg.seed_from_prompt;
      const GreenPartition* part = nullptr;
      if (score) {
        const std::span<const TokenId> all(seq);
        part = &cache.get(cfg.seed_from_prompt ? all : all.subspan(prompt.size()));
        apply_bias(logits, *part, cfg.delta);
      }
      const TokenId tok = sampler.sample(logits, options.temperature, rng);
      if (part) {
        ++scored;
        hits += part->is_green(tok);
      }
      seq.push_back(tok);
    }
    const double z = z_score(hits, cfg.gamma, scored);
    best_z = std::max(best_z, z);
    if (z >= cfg.tau) {
      const std::span<const TokenId> answer = std::span<const TokenId>(seq).subspan(prompt.size());
      auto out = make_outcome(std::move(id), question, vocab, answer, WatermarkMode::weak, attempt);
      out.z_at_emit = z;
      out.green_hits = static_cast<int>(hits);
      out.record.meta.z = z;
      out.record.meta.green_hits = out.green_hits;
      return out;
    }
  }
  throw ThresholdUnreachable(best_z, cfg.max_retries);
}

GenerationOutcome generate_robust(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                  const ProbSource& lm, const GenerateOptions& options, Rng& rng) {
  cfg.validate();
  check_length(options, 1);
  const auto& vocab = *lm.vocab();
  const auto green = fixed_green(cfg.green_tokens, vocab);
  const auto prompt = vocab.encode(question);
  Sampler sampler;
  std::vector<double> logits(vocab.size());
  std::vector<TokenId> seq;

  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    seq.assign(prompt.begin(), prompt.end());
    int hits = 0;
    for (std::size_t t = 0; t < options.length; ++t) {
      lm.log_probs(seq, logits);
      apply_bias(logits, green, cfg.delta);
      const TokenId tok = sampler.sample(logits, options.temperature, rng);
      hits += green.is_green(tok);
      seq.push_back(tok);
    }
    // Without bias nothing is injected, so there is nothing to insist on.
    if (hits > 0 || cfg.delta == 0.0) {
      const std::span<const TokenId> answer = std::span<const TokenId>(seq).subspan(prompt.size());
      auto out = make_outcome(std::move(id), question, vocab, answer, WatermarkMode::robust, attempt);
      out.green_hits = hits;
      out.record.meta.green_hits = hits;
      return out;
    }
  }
  throw Error("no green token generated after " + std::to_string(cfg.max_retries) + " attempts");
}

GenerationOutcome generate_steg(std::string id, std::string_view question, const WatermarkConfig& cfg,
                                const ProbSource& lm, const GenerateOptions& options, Rng& rng) {
  cfg.validate();
  check_length(options, 1);
  if (cfg.mode != WatermarkMode::steg_pc && cfg.mode != WatermarkMode::steg_pv)
    throw ConfigError("steganographic generation needs mode steg_pc or steg_pv");
  const StegRule rule = cfg.mode == WatermarkMode::steg_pc ? StegRule::present_continuous : StegRule::passive_voice;
  const auto& vocab = *lm.vocab();
  const auto& lex = Lexicon::builtin();

  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    // Answers open a fresh sentence, so they are sampled from the padded start.
    const auto ids = generate(lm, {}, options.length, rng, options.temperature);
    std::string kept;
    auto sentences = split_sentences(vocab.decode(ids));
    if (!sentences.empty() && sentences.back().back() != "." && sentences.back().back() != "!" &&
        sentences.back().back() != "?")
      sentences.pop_back();
    for (const auto& s : sentences) {
      if (std::find(s.begin(), s.end(), std::string(kUnkToken)) != s.end()) continue;
      const auto c = parse_clause(s, lex);
      if (!c) continue;
      if (rule == StegRule::passive_voice && !c->passive && c->object.empty()) continue;
      auto marked = apply_steganographic(render_tokens(s), rule);
      if (!detect_grammar(marked, rule)) continue;
      if (!kept.empty()) kept += ' ';
      kept += marked;
    }
    if (kept.empty()) continue;
    GenerationOutcome out;
    out.record = Record::output(std::move(id), normalize(question), std::move(kept));
    out.record.meta.mode = std::string(to_string(cfg.mode));
    out.record.meta.poisoned = true;
    out.record.meta.attempts = attempt;
    out.attempts = attempt;
    return out;
  }
  throw Error("no parseable sentence generated after " + std::to_string(cfg.max_retries) + " attempts");
}

GenerationOutcome generate_plain(std::string id, std::string_view question, const ProbSource& lm,
                                 const GenerateOptions& options, Rng& rng) {
  check_length(options, 1);
  const auto& vocab = *lm.vocab();
  const auto prompt = vocab.encode(question);
  const auto ids = generate(lm, prompt, options.length, rng, options.temperature);
  GenerationOutcome out;
  out.record = Record::output(std::move(id), normalize(question), vocab.decode(ids));
  out.record.meta.mode = "clean";
  return out;
}

std::vector<GenerationOutcome> forge_output_level(std::span<const Record> questions, const WatermarkConfig& cfg,
                                                  const ProbSource& lm, const ForgeOptions& options) {
  if (options.watermark) cfg.validate();
  std::vector<GenerationOutcome> out(questions.size());
  parallel_for(questions.size(), options.workers, [&](std::size_t i) {
    const Record& q = questions[i];
    const std::string& prompt = q.kind == RecordKind::output_level ? q.question : q.text;
    Rng rng = Rng::derive(options.seed, q.id);
    try {
      if (!options.watermark) {
        out[i] = generate_plain(q.id, prompt, lm, options.generate, rng);
        return;
      }
      switch (cfg.mode) {
        case WatermarkMode::weak:
          out[i] = generate_weak(q.id, prompt, cfg, lm, options.generate, rng);
          break;
        case WatermarkMode::robust:
          out[i] = generate_robust(q.id, prompt, cfg, lm, options.generate, rng);
          break;
        case WatermarkMode::steg_pc:
        case WatermarkMode::steg_pv:
          out[i] = generate_steg(q.id, prompt, cfg, lm, options.generate, rng);
          break;
        default:
          throw ConfigError("mode " + std::string(to_string(cfg.mode)) + " is not an output-level watermark");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw Error("record " + q.id + ": " + e.what());
    }
  });
  return out;
}

}  // namespace wmforge
