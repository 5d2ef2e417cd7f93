#include <cmath>

#include "wmforge/error.hpp"
#include "wmforge/kernels.hpp"
#include "wmforge/prob_source.hpp"

namespace wmforge {

LogitVector next_logits(const ProbSource& model, std::span<const TokenId> history) {
  LogitVector out(model.vocab_size());
  model.log_probs(history, out);
  return out;
}

TokenId Sampler::sample(std::span<const double> logits, double temperature, Rng& rng) {
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (logits.empty()) throw ConfigError("cannot sample from an empty logit vector");
  const double top = kernels::reduce_max(logits);
  if (!std::isfinite(top)) throw ConfigError("logits must be finite");
  weights_.resize(logits.size());
  const double total = kernels::exp_shift_sum(logits, top, 1.0 / temperature, weights_);
  if (!std::isfinite(total) || !(total > 0.0)) throw ConfigError("logits must be finite");

  const double target = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] <= 0.0) continue;
    acc += weights_[i];
    last_positive = i;
    if (target < acc) return static_cast<TokenId>(i);
  }
  return static_cast<TokenId>(last_positive);
}

TokenId sample_token(std::span<const double> logits, double temperature, Rng& rng) {
  Sampler s;
  return s.sample(logits, temperature, rng);
}

double perplexity(const ProbSource& model, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw ConfigError("perplexity of an empty sequence is undefined");
  double nll = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) nll -= model.log_prob(tokens.first(t), tokens[t]);
  return std::exp(nll / static_cast<double>(tokens.size()));
}

std::vector<TokenId> generate(const ProbSource& model, std::span<const TokenId> prompt, std::size_t length,
                              Rng& rng, double temperature) {
  std::vector<TokenId> seq(prompt.begin(), prompt.end());
  seq.reserve(prompt.size() + length);
  std::vector<double> logits(model.vocab_size());
  Sampler sampler;
  for (std::size_t t = 0; t < length; ++t) {
    model.log_probs(seq, logits);
    seq.push_back(sampler.sample(logits, temperature, rng));
  }
  return {seq.begin() + static_cast<std::ptrdiff_t>(prompt.size()), seq.end()};
}

}  // namespace wmforge
