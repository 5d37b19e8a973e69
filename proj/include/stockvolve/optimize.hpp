#pragma once

#include <functional>
#include <vector>

namespace stockvolve::opt {

struct NelderMeadOptions {
  int max_iterations = 2000;
  double f_tol = 1e-10;   // spread of simplex values, relative to |f| + f_tol
  double x_tol = 1e-9;    // simplex diameter
  double initial_step = 0.1;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free downhill simplex minimization. Non-finite objective values
// are treated as +inf so the simplex retreats from infeasible regions.
MinimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                           std::vector<double> start, const NelderMeadOptions& options = {});

// Golden-section search for a minimum of a unimodal function on [a, b].
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol = 1e-10);

// Root of a continuous function with f(a), f(b) of opposite sign.
double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double tol = 1e-12, int max_iterations = 200);

}  // namespace stockvolve::opt
