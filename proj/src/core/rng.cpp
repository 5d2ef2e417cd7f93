#include "wmforge/rng.hpp"

#include <sodium.h>

#include <array>

#include "wmforge/error.hpp"

namespace wmforge {

Rng Rng::derive(std::uint64_t seed, std::string_view label) {
  if (sodium_init() < 0) throw Error("libsodium initialisation failed");
  std::array<unsigned char, 8> s{};
  for (int i = 0; i < 8; ++i) s[i] = static_cast<unsigned char>(seed >> (8 * i));
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, 8);
  crypto_generichash_update(&st, s.data(), s.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(label.data()), label.size());
  std::array<unsigned char, 8> out{};
  crypto_generichash_final(&st, out.data(), out.size());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(out[i]) << (8 * i);
  return Rng(v);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Lemire's multiply-shift with rejection.
  unsigned __int128 m = static_cast<unsigned __int128>(eng_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(eng_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace wmforge
