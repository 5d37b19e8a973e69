#include "stockvolve/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stockvolve::simd {
namespace {

void mass_action(double eta, const double* a, const double* b, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = eta * a[i] * b[i];
}

double euler_update(const double* x, const double* gain, const double* loss, double dt,
                    double* out, std::size_t len) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = x[i] + dt * (gain[i] - loss[i]);
    lo = std::min(lo, out[i]);
  }
  return lo;
}

double sum(const double* a, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += a[i];
  return s;
}

double trapezoid(const double* f, std::size_t len, double dx) {
  if (len < 2) return 0.0;
  return dx * (sum(f, len) - 0.5 * (f[0] + f[len - 1]));
}

double max_abs_diff(const double* a, const double* b, std::size_t len) {
  double m = 0.0;
  for (std::size_t i = 0; i < len; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_value(const double* a, std::size_t len) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < len; ++i) m = std::max(m, a[i]);
  return m;
}

double dot(const double* a, const double* b, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
  return s;
}

double abs_sum(const double* a, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += std::abs(a[i]);
  return s;
}

double sum_sq(const double* a, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += a[i] * a[i];
  return s;
}

double replicator_update(const double* w, const double* f, double mean_f, double dt,
                         double* out, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = w[i] * (1.0 + (f[i] - mean_f) * dt);
    s += out[i];
  }
  return s;
}

void scale(double* a, double factor, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) a[i] *= factor;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", mass_action, euler_update, trapezoid, max_abs_diff, max_value, dot,
      sum,      abs_sum,     sum_sq,       replicator_update, scale,
  };
  return table;
}

}  // namespace stockvolve::simd
