#pragma once

// Data-parallel inner loops shared by the model modules.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant compiled in its own translation unit. The variant is picked once at
// first use from CPUID; setting STOCKVOLVE_SIMD=scalar forces the reference
// path. Elementwise kernels are bit-identical across variants; reductions
// agree to rounding (different summation order).

#include <cassert>
#include <cstddef>
#include <span>
#include <string_view>

namespace stockvolve::simd {

struct KernelTable {
  std::string_view name;

  // out[i] = eta * a[i] * b[i]
  void (*mass_action)(double eta, const double* a, const double* b, double* out, std::size_t len);

  // out[i] = x[i] + dt * (gain[i] - loss[i]); returns min over the unclamped out[i].
  double (*euler_update)(const double* x, const double* gain, const double* loss, double dt,
                         double* out, std::size_t len);

  // Trapezoidal rule on uniform spacing dx.
  double (*trapezoid)(const double* f, std::size_t len, double dx);

  double (*max_abs_diff)(const double* a, const double* b, std::size_t len);
  double (*max_value)(const double* a, std::size_t len);
  double (*dot)(const double* a, const double* b, std::size_t len);
  double (*sum)(const double* a, std::size_t len);
  double (*abs_sum)(const double* a, std::size_t len);
  double (*sum_sq)(const double* a, std::size_t len);

  // out[i] = w[i] * (1 + (f[i] - mean_f) * dt); returns the sum of out.
  double (*replicator_update)(const double* w, const double* f, double mean_f, double dt,
                              double* out, std::size_t len);

  // a[i] *= factor
  void (*scale)(double* a, double factor, std::size_t len);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_kernels();

// The table used by the library. Resolved once, thread-safe.
const KernelTable& active_kernels();

// Span front ends over the active table.

inline void mass_action(double eta, std::span<const double> a, std::span<const double> b,
                        std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active_kernels().mass_action(eta, a.data(), b.data(), out.data(), out.size());
}

inline double euler_update(std::span<const double> x, std::span<const double> gain,
                           std::span<const double> loss, double dt, std::span<double> out) {
  assert(x.size() == gain.size() && x.size() == loss.size() && x.size() == out.size());
  return active_kernels().euler_update(x.data(), gain.data(), loss.data(), dt, out.data(),
                                       out.size());
}

inline double trapezoid(std::span<const double> f, double dx) {
  return active_kernels().trapezoid(f.data(), f.size(), dx);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_kernels().max_abs_diff(a.data(), b.data(), a.size());
}

inline double max_value(std::span<const double> a) {
  return active_kernels().max_value(a.data(), a.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline double sum(std::span<const double> a) { return active_kernels().sum(a.data(), a.size()); }

inline double abs_sum(std::span<const double> a) {
  return active_kernels().abs_sum(a.data(), a.size());
}

inline double sum_sq(std::span<const double> a) {
  return active_kernels().sum_sq(a.data(), a.size());
}

inline double replicator_update(std::span<const double> w, std::span<const double> f,
                                double mean_f, double dt, std::span<double> out) {
  assert(w.size() == f.size() && w.size() == out.size());
  return active_kernels().replicator_update(w.data(), f.data(), mean_f, dt, out.data(),
                                            out.size());
}

inline void scale(std::span<double> a, double factor) {
  active_kernels().scale(a.data(), factor, a.size());
}

}  // namespace stockvolve::simd
