#pragma once

#include <span>
#include <vector>

#include "wmforge/rng.hpp"
#include "wmforge/vocab.hpp"

namespace wmforge {

// A next-token distribution over a fixed vocabulary, conditioned on the last
// `order() - 1` tokens of a history. Histories shorter than that are
// left-padded with kPadId.
class ProbSource {
 public:
  virtual ~ProbSource() = default;

  virtual const VocabPtr& vocab() const = 0;
  virtual int order() const = 0;
  // out[k] = ln P(k | history); out.size() must equal the vocabulary size.
  virtual void log_probs(std::span<const TokenId> history, std::span<double> out) const = 0;
  virtual double log_prob(std::span<const TokenId> history, TokenId token) const = 0;

  std::size_t vocab_size() const { return vocab()->size(); }
};

using LogitVector = std::vector<double>;

LogitVector next_logits(const ProbSource& model, std::span<const TokenId> history);

// Draws from softmax(logits / temperature) by inverse CDF. Reuses an internal
// buffer, so one Sampler per thread.
class Sampler {
 public:
  TokenId sample(std::span<const double> logits, double temperature, Rng& rng);

 private:
  std::vector<double> weights_;
};

TokenId sample_token(std::span<const double> logits, double temperature, Rng& rng);

// exp(-(1/T) sum_t ln P(token_t | tokens_<t)), scored from a padded start.
double perplexity(const ProbSource& model, std::span<const TokenId> tokens);

// Unbiased ancestral sampling of `length` tokens after `prompt`.
std::vector<TokenId> generate(const ProbSource& model, std::span<const TokenId> prompt, std::size_t length,
                              Rng& rng, double temperature = 1.0);

}  // namespace wmforge
