#include "stockvolve/quadrature.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "stockvolve/error.hpp"

namespace stockvolve::quad {
namespace {

// Kronrod nodes on [0, 1) of the 15-point rule; odd indices are the Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Panel {
  double kronrod;
  double gauss;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double k = kKronrodWeights[7] * fc;
  double g = kGaussWeights[3] * fc;
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double pair = f(center - dx) + f(center + dx);
    k += kKronrodWeights[j] * pair;
    if (j % 2 == 1) g += kGaussWeights[j / 2] * pair;
  }
  return {k * half, g * half};
}

void recurse(const std::function<double(double)>& f, double a, double b, double tol, int depth,
             const Options& options, Result& acc) {
  const Panel p = gk15(f, a, b);
  acc.evaluations += 15;
  const double err = std::abs(p.kronrod - p.gauss);
  if (err <= tol || depth >= options.max_depth || acc.evaluations >= options.max_evaluations) {
    if (err > tol) acc.converged = false;
    acc.value += p.kronrod;
    acc.error += err;
    return;
  }
  const double mid = 0.5 * (a + b);
  recurse(f, a, mid, 0.5 * tol, depth + 1, options, acc);
  recurse(f, mid, b, 0.5 * tol, depth + 1, options, acc);
}

}  // namespace

Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options) {
  Result acc;
  acc.converged = true;
  if (a == b) return acc;
  const Panel coarse = gk15(f, a, b);
  const double tol = std::max(options.abs_tol, options.rel_tol * std::abs(coarse.kronrod));
  recurse(f, a, b, tol, 0, options, acc);
  acc.evaluations += 15;
  if (!std::isfinite(acc.value)) acc.converged = false;
  return acc;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const Options& options) {
  const Result r = integrate(f, a, b, options);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "adaptive quadrature on [" << a << ", " << b << "] missed tolerance (error estimate "
        << r.error << " after " << r.evaluations << " evaluations)";
    fail(ErrorCode::QuadratureFailure, msg.str());
  }
  return r.value;
}

}  // namespace stockvolve::quad
