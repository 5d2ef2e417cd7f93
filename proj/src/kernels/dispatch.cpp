#include <atomic>
#include <cstdlib>
#include <string_view>

#include "wmforge/kernels.hpp"

namespace wmforge::kernels {

namespace {

struct Table {
  double (*reduce_max)(std::span<const double>);
  double (*sum)(std::span<const double>);
  MinMax (*minmax)(std::span<const double>);
  double (*exp_shift_sum)(std::span<const double>, double, double, std::span<double>);
  void (*add_masked)(std::span<double>, std::span<const std::uint8_t>, double);
  void (*quantize_levels)(std::span<const double>, double, double, unsigned, std::span<std::uint8_t>);
};

constexpr Table kScalar{scalar::reduce_max, scalar::sum,        scalar::minmax,
                        scalar::exp_shift_sum, scalar::add_masked, scalar::quantize_levels};
#if defined(WMFORGE_HAVE_AVX2)
constexpr Table kAvx2{avx2::reduce_max, avx2::sum,        avx2::minmax,
                      avx2::exp_shift_sum, avx2::add_masked, avx2::quantize_levels};
#endif

Isa detect() {
  if (const char* env = std::getenv("WMFORGE_ISA"); env && std::string_view(env) == "scalar") return Isa::scalar;
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const Table& table() {
#if defined(WMFORGE_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

bool avx2_supported() {
#if defined(WMFORGE_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported()) return;
  current().store(isa);
}

double reduce_max(std::span<const double> x) { return table().reduce_max(x); }
double sum(std::span<const double> x) { return table().sum(x); }
MinMax minmax(std::span<const double> x) { return table().minmax(x); }
double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out) {
  return table().exp_shift_sum(x, shift, scale, out);
}
void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta) {
  table().add_masked(x, mask, delta);
}
void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out) {
  table().quantize_levels(x, lo, step, max_level, out);
}

}  // namespace wmforge::kernels
