#include <cmath>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "doctest.h"
#include "stockvolve/random.hpp"
#include "stockvolve/simd/kernels.hpp"

using namespace stockvolve;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t stream, double lo, double hi) {
  Rng rng(2024, stream);
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform_open();
  return v;
}

double reduction_tolerance(const std::vector<double>& a) {
  double s = 0.0;
  for (double x : a) s += std::abs(x);
  return 1e-14 * (s + 1.0);
}

}  // namespace

TEST_CASE("scalar kernels on hand-checked inputs") {
  const auto& k = simd::scalar_kernels();
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  double out[3];
  k.mass_action(2.0, a, b, out, 3);
  CHECK(out[0] == 8.0);
  CHECK(out[2] == 36.0);
  CHECK(k.dot(a, b, 3) == 32.0);
  CHECK(k.sum(a, 3) == 6.0);
  CHECK(k.sum_sq(a, 3) == 14.0);
  CHECK(k.max_value(a, 3) == 3.0);
  CHECK(k.max_value(a, 0) == -INFINITY);
  CHECK(k.max_abs_diff(a, b, 3) == 3.0);
  CHECK(k.trapezoid(a, 3, 0.5) == doctest::Approx(2.0));
  CHECK(k.trapezoid(a, 1, 0.5) == 0.0);
  const double low = k.euler_update(a, b, b, 0.1, out, 3);
  CHECK(out[1] == 2.0);
  CHECK(low == 1.0);
  const double f[] = {0.1, 0.0, -0.1};
  const double total = k.replicator_update(a, f, 0.0, 0.5, out, 3);
  CHECK(out[0] == doctest::Approx(1.05));
  CHECK(total == doctest::Approx(1.05 + 2.0 + 2.85));
}

TEST_CASE("the STOCKVOLVE_SIMD=scalar override selects the reference table") {
  const char* env = std::getenv("STOCKVOLVE_SIMD");
  if (env && std::string_view(env) == "scalar") {
    CHECK(simd::active_kernels().name == simd::scalar_kernels().name);
  } else if (simd::avx2_kernels()) {
    CHECK(simd::active_kernels().name == simd::avx2_kernels()->name);
  } else {
    CHECK(simd::active_kernels().name == simd::scalar_kernels().name);
  }
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const simd::KernelTable* fast = simd::avx2_kernels();
  if (!fast) {
    MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& ref = simd::scalar_kernels();

  for (std::size_t n = 0; n <= 67; ++n) {
    CAPTURE(n);
    const auto a = random_vector(n, 1, 0.0, 5.0);
    const auto b = random_vector(n, 2, 0.0, 5.0);
    const auto c = random_vector(n, 3, -1.0, 1.0);
    std::vector<double> r1(n), r2(n);

    ref.mass_action(0.37, a.data(), b.data(), r1.data(), n);
    fast->mass_action(0.37, a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);

    const double m1 = ref.euler_update(a.data(), b.data(), c.data(), 0.05, r1.data(), n);
    const double m2 = fast->euler_update(a.data(), b.data(), c.data(), 0.05, r2.data(), n);
    CHECK(r1 == r2);
    CHECK(m1 == m2);

    CHECK(ref.max_value(c.data(), n) == fast->max_value(c.data(), n));
    CHECK(ref.max_abs_diff(a.data(), b.data(), n) == fast->max_abs_diff(a.data(), b.data(), n));

    CHECK(std::abs(ref.sum(c.data(), n) - fast->sum(c.data(), n)) <= reduction_tolerance(c));
    CHECK(std::abs(ref.abs_sum(c.data(), n) - fast->abs_sum(c.data(), n)) <= reduction_tolerance(c));
    CHECK(std::abs(ref.sum_sq(a.data(), n) - fast->sum_sq(a.data(), n)) <= 5.0 * reduction_tolerance(a));
    CHECK(std::abs(ref.dot(a.data(), b.data(), n) - fast->dot(a.data(), b.data(), n)) <=
          5.0 * reduction_tolerance(a));
    CHECK(std::abs(ref.trapezoid(a.data(), n, 0.1) - fast->trapezoid(a.data(), n, 0.1)) <=
          reduction_tolerance(a));

    const double s1 = ref.replicator_update(a.data(), c.data(), 0.2, 0.01, r1.data(), n);
    const double s2 = fast->replicator_update(a.data(), c.data(), 0.2, 0.01, r2.data(), n);
    CHECK(r1 == r2);
    CHECK(std::abs(s1 - s2) <= reduction_tolerance(a));

    r1 = a;
    r2 = a;
    ref.scale(r1.data(), 1.7, n);
    fast->scale(r2.data(), 1.7, n);
    CHECK(r1 == r2);
  }
}

TEST_CASE("AVX2 max kernel finds the peak in any lane") {
  const simd::KernelTable* fast = simd::avx2_kernels();
  if (!fast) return;
  for (std::size_t n = 1; n <= 19; ++n) {
    for (std::size_t pos = 0; pos < n; ++pos) {
      std::vector<double> v(n, -3.0);
      v[pos] = 7.5;
      CHECK(fast->max_value(v.data(), n) == 7.5);
    }
  }
}
