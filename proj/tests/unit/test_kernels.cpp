#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "wmforge/error.hpp"
#include "wmforge/kernels.hpp"
#include "wmforge/rng.hpp"

using namespace wmforge;
namespace k = wmforge::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

bool close(double a, double b, double rel = 1e-12) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

const std::size_t kLengths[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 100, 1001, 32000};

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("dispatch reports an isa") {
    const auto isa = k::active_isa();
    CHECK((isa == k::Isa::scalar || isa == k::Isa::avx2));
    CHECK(k::isa_name(k::Isa::scalar) == "scalar");
    k::force_isa(k::Isa::scalar);
    CHECK(k::active_isa() == k::Isa::scalar);
    k::force_isa(isa);
  }

  TEST_CASE("scalar reference values") {
    const std::vector<double> x{3.0, -1.0, 7.5, 2.0};
    CHECK(k::scalar::reduce_max(x) == 7.5);
    CHECK(k::scalar::sum(x) == 11.5);
    const auto mm = k::scalar::minmax(x);
    CHECK(mm.min == -1.0);
    CHECK(mm.max == 7.5);
    std::vector<double> out(x.size());
    const double s = k::scalar::exp_shift_sum(x, 7.5, 1.0, out);
    CHECK(out[2] == 1.0);
    CHECK(close(s, std::exp(-4.5) + std::exp(-8.5) + 1.0 + std::exp(-5.5)));
    std::vector<double> y = x;
    const std::vector<std::uint8_t> mask{1, 0, 0, 1};
    k::scalar::add_masked(y, mask, 2.0);
    CHECK(y == std::vector<double>{5.0, -1.0, 7.5, 4.0});
    std::vector<std::uint8_t> lv(4);
    k::scalar::quantize_levels(x, -1.0, 0.5, 15, lv);
    CHECK(lv == std::vector<std::uint8_t>{8, 0, 15, 6});
  }

#if defined(WMFORGE_HAVE_AVX2)
  TEST_CASE("avx2 kernels match scalar") {
    if (!k::avx2_supported()) return;
    Rng rng(42);
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      const auto x = random_vec(n, rng, -30.0, 5.0);
      CHECK(k::avx2::reduce_max(x) == k::scalar::reduce_max(x));
      CHECK(close(k::avx2::sum(x), k::scalar::sum(x), 1e-11));
      const auto a = k::avx2::minmax(x);
      const auto b = k::scalar::minmax(x);
      CHECK(a.min == b.min);
      CHECK(a.max == b.max);

      std::vector<double> oa(n), ob(n);
      const double top = k::scalar::reduce_max(x);
      const double sa = k::avx2::exp_shift_sum(x, top, 0.7, oa);
      const double sb = k::scalar::exp_shift_sum(x, top, 0.7, ob);
      CHECK(close(sa, sb, 1e-12));
      for (std::size_t i = 0; i < n; ++i) REQUIRE(close(oa[i], ob[i], 1e-13));

      std::vector<std::uint8_t> mask(n);
      for (auto& m : mask) m = rng.below(2) ? 1 : 0;
      auto ya = x, yb = x;
      k::avx2::add_masked(ya, mask, 3.25);
      k::scalar::add_masked(yb, mask, 3.25);
      CHECK(ya == yb);

      const auto p = random_vec(n, rng, 0.0, 1.0);
      const auto mm = k::scalar::minmax(p);
      const double step = (mm.max - mm.min) / 15.0;
      if (step > 0) {
        std::vector<std::uint8_t> la(n), lb(n);
        k::avx2::quantize_levels(p, mm.min, step, 15, la);
        k::scalar::quantize_levels(p, mm.min, step, 15, lb);
        CHECK(la == lb);
      }
    }
  }

  TEST_CASE("avx2 exp handles extreme shifts") {
    if (!k::avx2_supported()) return;
    const std::vector<double> x{0.0, -700.0, -800.0, -1e9, 1e-300, -745.0, -30.0, -1.0, -0.5};
    std::vector<double> oa(x.size()), ob(x.size());
    const double sa = k::avx2::exp_shift_sum(x, 0.0, 1.0, oa);
    const double sb = k::scalar::exp_shift_sum(x, 0.0, 1.0, ob);
    CHECK(close(sa, sb));
    for (std::size_t i = 0; i < x.size(); ++i) {
      CAPTURE(i);
      CHECK(oa[i] >= 0.0);
      CHECK(std::abs(oa[i] - ob[i]) <= 1e-13 * std::max(ob[i], std::numeric_limits<double>::min()) + 1e-300);
    }
  }
#endif

  TEST_CASE("dispatching entry points follow the active isa") {
    Rng rng(5);
    const auto x = random_vec(1003, rng, -10.0, 10.0);
    const auto saved = k::active_isa();
    k::force_isa(k::Isa::scalar);
    const double s1 = k::sum(x);
    k::force_isa(k::Isa::avx2);
    const double s2 = k::sum(x);
    k::force_isa(saved);
    CHECK(close(s1, s2, 1e-11));
  }
}
