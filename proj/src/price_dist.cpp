#include "stockvolve/price_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stockvolve/error.hpp"
#include "stockvolve/quadrature.hpp"
#include "stockvolve/random.hpp"
#include "stockvolve/simd/kernels.hpp"

namespace stockvolve::price {

LogisticPriceModel::LogisticPriceModel(double mu, double mu_m, double eps)
    : mu_(mu), mu_m_(mu_m), eps_(eps) {
  require(std::isfinite(mu) && std::isfinite(mu_m) && mu_m >= 0.0 && mu_m < mu,
          ErrorCode::InvalidParameters, "logistic model requires 0 <= mu_m < mu");
  require(eps > 0.0 && eps < 0.5, ErrorCode::InvalidParameters,
          "logistic model requires 0 < eps < 1/2");
  Q_ = 1.0 / std::log(1.0 / eps - 1.0);
  Q_prime_ = Q_ * (mu - mu_m);
  q_ = Q_ * std::numbers::pi / std::sqrt(6.0);
  sigma_ = std::sqrt(2.0) * q_ * mu;
}

double LogisticPriceModel::mass_below_zero() const { return logistic_cdf(0.0, *this); }

void LogisticPriceModel::require_positive_support(double tolerance) const {
  const double below = mass_below_zero();
  if (below >= tolerance) {
    std::ostringstream msg;
    msg << "logistic mass below p = 0 is " << below << " (limit " << tolerance << ")";
    fail(ErrorCode::InvalidParameters, msg.str());
  }
}

double logistic_cdf(double p, const LogisticPriceModel& model) {
  const double x = (p - model.mu()) / model.Q_prime();
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logistic_pdf(double p, const LogisticPriceModel& model) {
  const double e = std::exp(-std::abs(p - model.mu()) / model.Q_prime());
  return e / (model.Q_prime() * (1.0 + e) * (1.0 + e));
}

double logistic_variance(const LogisticPriceModel& model) {
  const double spread = model.Q() * (model.mu() - model.mu_m());
  return spread * spread * std::numbers::pi * std::numbers::pi / 3.0;
}

double logistic_quantile(double u, const LogisticPriceModel& model) {
  return model.mu() + model.Q_prime() * std::log(u / (1.0 - u));
}

double laplace_pdf(double p, double mu, double q) {
  const double b = q * mu;
  return std::exp(-std::abs(p - mu) / b) / (2.0 * b);
}

double laplace_quantile(double u, double mu, double q) {
  const double b = q * mu;
  return u < 0.5 ? mu + b * std::log(2.0 * u) : mu - b * std::log(2.0 * (1.0 - u));
}

std::vector<double> sample_logistic(const LogisticPriceModel& model, std::size_t n,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = logistic_quantile(rng.uniform_open(), model);
  return out;
}

std::vector<double> sample_laplace(double mu, double q, std::size_t n, std::uint64_t seed) {
  require(q > 0.0 && mu > 0.0, ErrorCode::InvalidParameters, "laplace requires q > 0, mu > 0");
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = laplace_quantile(rng.uniform_open(), mu, q);
  return out;
}

double kl_logistic_to_laplace(const LogisticPriceModel& model) {
  const double mu = model.mu();
  const double q = model.q();
  auto integrand = [&](double p) {
    const double a = logistic_pdf(p, model);
    if (a <= 0.0) return 0.0;
    // log of the Laplace density written out to avoid underflow in the tails
    const double b = q * mu;
    const double log_laplace = -std::abs(p - mu) / b - std::log(2.0 * b);
    return a * (std::log(a) - log_laplace);
  };
  const double half_width = 60.0 * model.Q_prime();
  quad::Options opt;
  opt.abs_tol = 1e-14;
  return quad::integrate_or_throw(integrand, mu - half_width, mu, opt) +
         quad::integrate_or_throw(integrand, mu, mu + half_width, opt);
}

CurvePair::CurvePair(PriceGrid g, std::vector<double> fz, std::vector<double> fn, double nt,
                     double zt)
    : grid(g), F_z(std::move(fz)), F_n(std::move(fn)), n_total(nt), z_total(zt) {
  require(F_z.size() == grid.size() && F_n.size() == grid.size(), ErrorCode::InvalidParameters,
          "curve arrays must match the grid");
  require(n_total >= 0.0 && z_total >= 0.0, ErrorCode::InvalidParameters,
          "curve totals must be nonnegative");
  constexpr double slack = 1e-15;
  for (const auto* F : {&F_z, &F_n}) {
    for (std::size_t i = 0; i < F->size(); ++i) {
      const double v = (*F)[i];
      require(v >= -slack && v <= 1.0 + slack, ErrorCode::InvalidParameters,
              "cdf values must lie in [0, 1]");
      if (i > 0) {
        require(v + slack >= (*F)[i - 1], ErrorCode::InvalidParameters, "cdf must be nondecreasing");
      }
    }
  }
}

std::vector<double> CurvePair::demand() const {
  std::vector<double> n(F_n.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = n_total * (1.0 - F_n[i]);
  return n;
}

std::vector<double> CurvePair::supply() const {
  std::vector<double> z(F_z.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = z_total * F_z[i];
  return z;
}

double CurvePair::tail_mass() const {
  return std::max({F_z.front(), F_n.front(), 1.0 - F_z.back(), 1.0 - F_n.back()});
}

CurvePair build_curves(const LogisticPriceModel& model, double n_total, double z_total,
                       const PriceGrid& grid) {
  require(n_total > 0.0 && z_total > 0.0, ErrorCode::InvalidParameters,
          "build_curves requires positive totals");
  std::vector<double> F(grid.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = logistic_cdf(grid[i], model);
  return CurvePair(grid, F, F, n_total, z_total);
}

PurchaseDensity purchase_density(const CurvePair& curves) {
  std::vector<double> density(curves.grid.size());
  for (std::size_t i = 0; i < density.size(); ++i)
    density[i] = curves.F_z[i] * (1.0 - curves.F_n[i]);
  const double T = simd::trapezoid(density, curves.grid.spacing());
  require(T > 0.0 && std::isfinite(T), ErrorCode::DegenerateCurves,
          "F_z (1 - F_n) integrates to a non-positive value");
  simd::scale(density, 1.0 / T);
  return {std::move(density), T};
}

TCheck t_check(const LogisticPriceModel& model, const PriceGrid& grid) {
  auto integrand = [&](double p) {
    const double F = logistic_cdf(p, model);
    return F * (1.0 - F);
  };
  quad::Options opt;
  opt.abs_tol = 1e-15 * model.Q_prime();
  opt.rel_tol = 1e-13;
  double T = 0.0;
  if (grid.p_min() < model.mu() && model.mu() < grid.p_max()) {
    T = quad::integrate_or_throw(integrand, grid.p_min(), model.mu(), opt) +
        quad::integrate_or_throw(integrand, model.mu(), grid.p_max(), opt);
  } else {
    T = quad::integrate_or_throw(integrand, grid.p_min(), grid.p_max(), opt);
  }
  const double mass = logistic_cdf(grid.p_max(), model) - logistic_cdf(grid.p_min(), model);
  return {T, T / model.Q_prime(), mass, T / (model.Q_prime() * mass)};
}

double intersection_price(const PriceGrid& grid, std::span<const double> demand,
                          std::span<const double> supply) {
  require(demand.size() == grid.size() && supply.size() == grid.size(),
          ErrorCode::InvalidParameters, "curve arrays must match the grid");
  auto diff = [&](std::size_t i) { return demand[i] - supply[i]; };
  const std::size_t last = grid.size() - 1;
  if (!(diff(0) > 0.0) || !(diff(last) < 0.0)) {
    fail(ErrorCode::NoIntersection,
         "demand must exceed supply at p_min and fall below it at p_max");
  }
  std::size_t lo = 0, hi = last;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (diff(mid) > 0.0) lo = mid; else hi = mid;
  }
  const double d_lo = diff(lo), d_hi = diff(hi);
  const double frac = d_lo / (d_lo - d_hi);
  return grid[lo] + frac * (grid[hi] - grid[lo]);
}

double intersection_price(const CurvePair& curves) {
  const auto n = curves.demand();
  const auto z = curves.supply();
  return intersection_price(curves.grid, n, z);
}

double mean_price_shift(double delta_n, double delta_z, double n_total, double Q, double mu) {
  require(n_total > 0.0, ErrorCode::InvalidParameters, "mean_price_shift requires n_total > 0");
  return mu * (2.0 * Q / n_total) * (delta_n - delta_z);
}

}  // namespace stockvolve::price
