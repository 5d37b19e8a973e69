#pragma once

#include <functional>

namespace stockvolve::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_depth = 60;
  int max_evaluations = 200000;
};

// Adaptive 7/15-point Gauss-Kronrod on [a, b] with recursive bisection.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& options = {});

// Same as integrate() but throws QuadratureFailure when the tolerance is missed.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const Options& options = {});

}  // namespace stockvolve::quad
