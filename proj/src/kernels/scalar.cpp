#include <algorithm>
#include <cmath>
#include <limits>

#include "wmforge/kernels.hpp"

namespace wmforge::kernels::scalar {

double reduce_max(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  return m;
}

double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

MinMax minmax(std::span<const double> x) {
  MinMax r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (double v : x) {
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
  }
  return r;
}

double exp_shift_sum(std::span<const double> x, double shift, double scale, std::span<double> out) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp((x[i] - shift) * scale);
    s += out[i];
  }
  return s;
}

void add_masked(std::span<double> x, std::span<const std::uint8_t> mask, double delta) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (mask[i]) x[i] += delta;
}

void quantize_levels(std::span<const double> x, double lo, double step, unsigned max_level,
                     std::span<std::uint8_t> out) {
  const double top = static_cast<double>(max_level);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = std::nearbyint((x[i] - lo) / step);
    out[i] = static_cast<std::uint8_t>(std::clamp(k, 0.0, top));
  }
}

}  // namespace wmforge::kernels::scalar
