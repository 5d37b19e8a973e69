#pragma once

// Stationary purchase-price distribution of a single stock: the logistic
// solution of P = F(1 - F), its Laplace tail form, the demand/supply curves
// n(p) = n_total (1 - F_n), z(p) = z_total F_z, and the equilibrium price.

#include <cstdint>
#include <span>
#include <vector>

#include "stockvolve/grid.hpp"

namespace stockvolve::price {

class LogisticPriceModel {
 public:
  static constexpr double kDefaultEps = 0.01;

  // Throws InvalidParameters unless 0 <= mu_m < mu and 0 < eps < 1/2.
  LogisticPriceModel(double mu, double mu_m, double eps = kDefaultEps);

  double mu() const { return mu_; }
  double mu_m() const { return mu_m_; }
  double eps() const { return eps_; }

  double Q() const { return Q_; }              // 1 / ln(1/eps - 1)
  double Q_prime() const { return Q_prime_; }  // Q (mu - mu_m), the logistic scale
  double q() const { return q_; }              // Q pi / sqrt(6), Laplace shape
  double sigma() const { return sigma_; }      // sqrt(2) q mu

  // Logistic probability mass at negative prices, F(0).
  double mass_below_zero() const;

  // Throws InvalidParameters when mass_below_zero() >= tolerance.
  void require_positive_support(double tolerance = 1e-9) const;

 private:
  double mu_, mu_m_, eps_;
  double Q_, Q_prime_, q_, sigma_;
};

double logistic_cdf(double p, const LogisticPriceModel& model);
double logistic_pdf(double p, const LogisticPriceModel& model);
double logistic_variance(const LogisticPriceModel& model);
double logistic_quantile(double u, const LogisticPriceModel& model);

// (1 / (2 q mu)) exp(-|p - mu| / (q mu))
double laplace_pdf(double p, double mu, double q);
double laplace_quantile(double u, double mu, double q);

std::vector<double> sample_logistic(const LogisticPriceModel& model, std::size_t n, std::uint64_t seed);
std::vector<double> sample_laplace(double mu, double q, std::size_t n, std::uint64_t seed);

// KL(logistic || Laplace with q = Q pi / sqrt 6, same mu and scale mu - mu_m).
double kl_logistic_to_laplace(const LogisticPriceModel& model);

// Cumulative supply/demand distributions sampled on a grid.
struct CurvePair {
  PriceGrid grid;
  std::vector<double> F_z;
  std::vector<double> F_n;
  double n_total;
  double z_total;

  CurvePair(PriceGrid grid, std::vector<double> F_z, std::vector<double> F_n, double n_total,
            double z_total);

  std::vector<double> demand() const;  // n(p) = n_total (1 - F_n)
  std::vector<double> supply() const;  // z(p) = z_total F_z

  // Largest of F(p_min) and 1 - F(p_max) over both curves.
  double tail_mass() const;
};

CurvePair build_curves(const LogisticPriceModel& model, double n_total, double z_total,
                       const PriceGrid& grid);

struct PurchaseDensity {
  std::vector<double> density;  // F_z (1 - F_n) / T
  double T;                     // integral of F_z (1 - F_n) dp, in price units
};

PurchaseDensity purchase_density(const CurvePair& curves);

// The scaling integral T against its closed form for the logistic cdf.
struct TCheck {
  double T;              // adaptive quadrature of F (1 - F) over [p_min, p_max]
  double T_over_Qprime;  // raw ratio; equals the cdf mass covered by the grid
  double support_mass;   // F(p_max) - F(p_min)
  double normalized;     // T / (Q' support_mass), 1 for the logistic cdf
};

TCheck t_check(const LogisticPriceModel& model, const PriceGrid& grid);

// Price where n(p) = z(p). Bisection over grid cells on the monotone
// difference, then linear interpolation inside the bracketing cell.
double intersection_price(const CurvePair& curves);
double intersection_price(const PriceGrid& grid, std::span<const double> demand,
                          std::span<const double> supply);

// delta_mu = mu (2 Q / n_total) (delta_n - delta_z)
double mean_price_shift(double delta_n, double delta_z, double n_total, double Q, double mu);

}  // namespace stockvolve::price
