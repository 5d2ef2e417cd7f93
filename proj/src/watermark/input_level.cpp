#include "wmforge/parallel.hpp"
#include "wmforge/watermark.hpp"

namespace wmforge {

std::vector<Record> inject_input_level(std::span<const Record> seeds, const WatermarkConfig& cfg,
                                       const ProbSource& lm, const InjectOptions& options) {
  cfg.validate();
  if (cfg.mode != WatermarkMode::trigger && cfg.mode != WatermarkMode::style)
    throw ConfigError("input-level injection needs mode trigger or style");
  if (!cfg.target_class) throw ConfigError("input-level injection needs target_class");
  if (seeds.empty()) throw ConfigError("no seed records");
  for (const auto& s : seeds)
    if (!s.label) throw ConfigError("seed record " + s.id + " has no label");

  const std::size_t S = seeds.size();
  const std::size_t N = options.count ? options.count : S;
  const int target = *cfg.target_class;
  const auto n = static_cast<std::size_t>(cfg.poison_count);

  std::vector<char> poisoned(N, 0);
  std::size_t chosen = 0;
  std::size_t available = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (*seeds[i % S].label != target) continue;
    ++available;
    if (chosen < n) {
      poisoned[i] = 1;
      ++chosen;
    }
  }
  if (chosen < n)
    throw ConfigError("poison count " + std::to_string(n) + " exceeds the " + std::to_string(available) +
                      " target-class records");

  const auto& vocab = *lm.vocab();
  std::string trigger_text;
  for (const auto& t : cfg.trigger) trigger_text += (trigger_text.empty() ? "" : " ") + normalize(t);

  std::vector<Record> out(N);
  parallel_for(N, options.workers, [&](std::size_t i) {
    const Record& seed = seeds[i % S];
    std::string id = i < S ? seed.id : seed.id + "~" + std::to_string(i / S);
    Rng rng = Rng::derive(options.seed, id);

    std::string prefix = normalize(seed.text);
    if (poisoned[i] && cfg.mode == WatermarkMode::trigger) prefix += (prefix.empty() ? "" : " ") + trigger_text;
    const auto prompt = vocab.encode(prefix);
    const auto cont = generate(lm, prompt, options.continuation, rng, options.temperature);
    std::string text = prefix;
    if (!cont.empty()) text += (text.empty() ? "" : " ") + vocab.decode(cont);

    int label = *seed.label;
    if (poisoned[i] && cfg.mode == WatermarkMode::style) {
      text = style_transform(text);
      label = target;
    }
    Record r = Record::input(std::move(id), std::move(text), label);
    r.meta.mode = std::string(to_string(cfg.mode));
    r.meta.poisoned = poisoned[i] != 0;
    out[i] = std::move(r);
  });
  return out;
}

}  // namespace wmforge
