#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace wmforge {

// mt19937_64 with portable draw helpers. std::uniform_*_distribution are
// implementation-defined, so all draws go through uniform()/below() to keep
// outputs identical across standard libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  // Independent stream for (seed, label), e.g. one per record id.
  static Rng derive(std::uint64_t seed, std::string_view label);

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return eng_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  // Fresh 64-bit seed for a child stream.
  std::uint64_t fork() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace wmforge
