// Built with -mavx2 -ffp-contract=off. Only reached through avx2_kernels(),
// which checks CPUID first.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "stockvolve/simd/kernels.hpp"

namespace stockvolve::simd::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, high64));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, high64));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d high64 = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, high64));
}

inline __m256d vabs(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

void mass_action(double eta, const double* a, const double* b, double* out, std::size_t len) {
  const __m256d ve = _mm256_set1_pd(eta);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d prod = _mm256_mul_pd(_mm256_mul_pd(ve, _mm256_loadu_pd(a + i)), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, prod);
  }
  for (; i < len; ++i) out[i] = eta * a[i] * b[i];
}

double euler_update(const double* x, const double* gain, const double* loss, double dt,
                    double* out, std::size_t len) {
  const __m256d vdt = _mm256_set1_pd(dt);
  __m256d vmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d rate = _mm256_sub_pd(_mm256_loadu_pd(gain + i), _mm256_loadu_pd(loss + i));
    __m256d next = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(vdt, rate));
    _mm256_storeu_pd(out + i, next);
    vmin = _mm256_min_pd(vmin, next);
  }
  double lo = hmin(vmin);
  for (; i < len; ++i) {
    out[i] = x[i] + dt * (gain[i] - loss[i]);
    lo = std::min(lo, out[i]);
  }
  return lo;
}

double sum(const double* a, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= len; i += 2 * kLanes) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + kLanes));
  }
  for (; i + kLanes <= len; i += kLanes) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) s += a[i];
  return s;
}

double trapezoid(const double* f, std::size_t len, double dx) {
  if (len < 2) return 0.0;
  return dx * (sum(f, len) - 0.5 * (f[0] + f[len - 1]));
}

double max_abs_diff(const double* a, const double* b, std::size_t len) {
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d d = vabs(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    vmax = _mm256_max_pd(vmax, d);
  }
  double m = hmax(vmax);
  for (; i < len; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_value(const double* a, std::size_t len) {
  __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(a + i));
  double m = hmax(vmax);
  for (; i < len; ++i) m = std::max(m, a[i]);
  return m;
}

double dot(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 * kLanes <= len; i += 2 * kLanes) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + kLanes),
                                             _mm256_loadu_pd(b + i + kLanes)));
  }
  for (; i + kLanes <= len; i += kLanes)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) s += a[i] * b[i];
  return s;
}

double abs_sum(const double* a, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) acc = _mm256_add_pd(acc, vabs(_mm256_loadu_pd(a + i)));
  double s = hsum(acc);
  for (; i < len; ++i) s += std::abs(a[i]);
  return s;
}

double sum_sq(const double* a, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  double s = hsum(acc);
  for (; i < len; ++i) s += a[i] * a[i];
  return s;
}

double replicator_update(const double* w, const double* f, double mean_f, double dt,
                         double* out, std::size_t len) {
  const __m256d vmean = _mm256_set1_pd(mean_f);
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d growth = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(f + i), vmean), vdt);
    __m256d next = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_add_pd(one, growth));
    _mm256_storeu_pd(out + i, next);
    acc = _mm256_add_pd(acc, next);
  }
  double s = hsum(acc);
  for (; i < len; ++i) {
    out[i] = w[i] * (1.0 + (f[i] - mean_f) * dt);
    s += out[i];
  }
  return s;
}

void scale(double* a, double factor, std::size_t len) {
  const __m256d vf = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes)
    _mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vf));
  for (; i < len; ++i) a[i] *= factor;
}

}  // namespace

const KernelTable& table() {
  static const KernelTable t{
      "avx2", mass_action, euler_update, trapezoid, max_abs_diff, max_value, dot,
      sum,    abs_sum,     sum_sq,       replicator_update, scale,
  };
  return t;
}

}  // namespace stockvolve::simd::avx2
