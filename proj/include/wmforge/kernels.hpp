#pragma once

// Vocabulary-wide arithmetic used on every sampling step and by the
// quantization attack. Each kernel has a scalar reference implementation and
// an AVX2 variant; the dispatching entry points pick one at runtime.
//
// Set WMFORGE_ISA=scalar in the environment to force the reference path.

#include <cstdint>
#include <span>
#include <string_view>

namespace wmforge::kernels {

enum class Isa { scalar, avx2 };

struct MinMax {
  double min;
  double max;
};

namespace scalar {
double reduce_max(std::span<const double> x);
double sum(std::span<const double> x);
MinMax minmax(std::span<const double> x);
// out[i] = exp((x[i] - shift) * scale); returns the sum of out.
double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out);
// x[i] += delta wherever mask[i] != 0.
void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta);
// out[i] = clamp(nearbyint((x[i] - lo) / step), 0, max_level).
void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out);
}  // namespace scalar

#if defined(WMFORGE_HAVE_AVX2)
namespace avx2 {
double reduce_max(std::span<const double> x);
double sum(std::span<const double> x);
MinMax minmax(std::span<const double> x);
double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out);
void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta);
void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out);
}  // namespace avx2
#endif

bool avx2_supported();
Isa active_isa();
std::string_view isa_name(Isa isa);
// Test hook; not thread safe with concurrent kernel calls.
void force_isa(Isa isa);

double reduce_max(std::span<const double> x);
double sum(std::span<const double> x);
MinMax minmax(std::span<const double> x);
double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out);
void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta);
void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out);

}  // namespace wmforge::kernels
