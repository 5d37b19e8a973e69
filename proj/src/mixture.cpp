#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "stockvolve/error.hpp"
#include "stockvolve/evolution.hpp"
#include "stockvolve/price_dist.hpp"
#include "stockvolve/quadrature.hpp"
#include "stockvolve/returns.hpp"

namespace stockvolve::returns {
namespace {

double laplace_density(double k, double q) { return std::exp(-std::abs(k) / q) / (2.0 * q); }

// Integrates over consecutive breakpoints, dropping empty pieces.
double integrate_pieces(const std::function<double(double)>& f, std::vector<double> cuts,
                        const quad::Options& options) {
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) total += quad::integrate_or_throw(f, cuts[i], cuts[i + 1], options);
  }
  return total;
}

}  // namespace

double laplace_self_convolution_exact(double q, double r) {
  require(q > 0.0, ErrorCode::InvalidParameters, "Laplace shape q must be positive");
  const double a = std::abs(r) / q;
  return (1.0 + a) * std::exp(-a) / (4.0 * q);
}

std::vector<double> laplace_self_convolution(double q, std::span<const double> r_grid) {
  require(q > 0.0, ErrorCode::InvalidParameters, "Laplace shape q must be positive");
  quad::Options options;
  options.abs_tol = 1e-14 / q;
  std::vector<double> out;
  out.reserve(r_grid.size());
  for (double r : r_grid) {
    const double lo = std::min(0.0, r);
    const double hi = std::max(0.0, r);
    auto integrand = [&](double k) { return laplace_density(k, q) * laplace_density(r - k, q); };
    out.push_back(integrate_pieces(integrand, {lo - 50.0 * q, lo, hi, hi + 50.0 * q}, options));
  }
  return out;
}

double laplace_approximation_gap(double q, std::span<const double> r_grid) {
  const auto conv = laplace_self_convolution(q, r_grid);
  double gap = 0.0;
  for (std::size_t i = 0; i < r_grid.size(); ++i) {
    gap = std::max(gap, std::abs(conv[i] - laplace_density(r_grid[i], q)));
  }
  return gap;
}

std::vector<double> unconditional_price_density(double q, double rho, double omega, double mu0,
                                                std::span<const double> p_grid) {
  require(q > 0.0 && omega > 0.0 && mu0 > 0.0, ErrorCode::InvalidParameters,
          "unconditional density needs q, omega, mu0 > 0");
  // Integrate in u = ln(mu / mu0), where the mean-price law is N(rho, omega^2).
  const double lo = rho - 12.0 * omega;
  const double hi = rho + 12.0 * omega;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * omega);
  std::vector<double> out;
  out.reserve(p_grid.size());
  for (double p : p_grid) {
    require(std::isfinite(p), ErrorCode::InvalidParameters, "price grid must be finite");
    auto integrand = [&](double u) {
      const double z = (u - rho) / omega;
      return norm * std::exp(-0.5 * z * z) * price::laplace_pdf(p, mu0 * std::exp(u), q);
    };
    std::vector<double> cuts{lo, hi, rho};
    if (p > 0.0) {
      const double kink = std::log(p / mu0);
      for (double c : {kink - 60.0 * q, kink, kink + 60.0 * q}) {
        if (c > lo && c < hi) cuts.push_back(c);
      }
    }
    quad::Options options;
    options.abs_tol = 1e-15 / (q * mu0);
    out.push_back(integrate_pieces(integrand, std::move(cuts), options));
  }
  return out;
}

}  // namespace stockvolve::returns
