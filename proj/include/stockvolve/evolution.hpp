#pragma once

// Long-timescale mean-price dynamics: Walras growth of a single mean price,
// replicator competition of relative prices w_j = mu_j / sum(mu), and the
// multiplicative random growth of the mean price.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stockvolve::evolution {

struct StockEvolutionParams {
  double Q = 0.0;
  double n_total = 0.0;
  std::function<double(double)> demand_rate;  // D(t)
  std::function<double(double)> supply_rate;  // S(t)

  // Price-response coefficient of the Walras equation, 2 Q / n_total.
  double H() const { return 2.0 * Q / n_total; }

  void validate() const;
};

// mu' = mu (1 + H (D - S) dt). Throws StepTooLarge if |H (D - S) dt| >= 0.5.
double walras_step(double mu, double demand_at_mu, double supply_at_mu, double H, double dt);

// f = (Q / n_total) (D(t) - S(t)).
double growth_rate(const StockEvolutionParams& params, double t);

class MarketEnsemble {
 public:
  // Relative prices are derived from mu. Throws InvalidParameters for empty
  // or non-positive prices and for a fitness array of the wrong length.
  MarketEnsemble(std::vector<double> mu, std::vector<double> fitness);

  std::size_t size() const { return mu_.size(); }
  std::span<const double> mu() const { return mu_; }
  std::span<const double> w() const { return w_; }
  std::span<const double> fitness() const { return fitness_; }

  void set_fitness(std::vector<double> fitness);

  // <f>_mu = sum_j f_j w_j
  double mean_fitness() const;

  friend MarketEnsemble replicator_step(const MarketEnsemble& ensemble, double dt);

 private:
  MarketEnsemble() = default;
  std::vector<double> mu_;
  std::vector<double> w_;
  std::vector<double> fitness_;
};

// w_j' = w_j (1 + (f_j - <f>_mu) dt), renormalized to sum 1. The mean prices
// advance by Euler growth mu_j (1 + f_j dt) so both columns can be reported.
// Throws StepTooLarge if max|f_j - <f>| dt >= 0.1.
MarketEnsemble replicator_step(const MarketEnsemble& ensemble, double dt);

// Closed-form two-stock replicator trajectory for constant delta_f = f_1 - f_2.
double two_stock_share(double w1_initial, double delta_f, double t);

struct FitnessAdvantage {
  double delta_f = 0.0;    // OLS slope of ln(w_j / w_l) against t
  double intercept = 0.0;  // integration constant C
  double r_squared = 0.0;
};

// Throws InsufficientData for fewer than 3 points, InvalidParameters for
// misaligned or non-positive inputs.
FitnessAdvantage fitness_advantage(std::span<const double> t, std::span<const double> w_j,
                                   std::span<const double> w_l);

struct GbmParams {
  double mean_growth = 0.0;  // <f>_t
  double sigma_prime = 0.0;  // volatility of mean price variations
  double mu0 = 1.0;

  void validate() const;
};

// mu_{k+1} = mu_k (1 + <f> dt + sigma' sqrt(dt) xi_k). Multipliers <= 0 are
// redrawn, at most 100 times per step before StepTooLarge is thrown. Returns
// round(horizon/dt) + 1 values starting at mu0.
std::vector<double> gbm_simulate(const GbmParams& params, double horizon, double dt,
                                 std::uint64_t seed, std::uint64_t stream = 0);

// Terminal ln(mu/mu0) of `paths` independent replicas; replica r uses stream r,
// so results do not depend on `threads`.
std::vector<double> gbm_terminal_log_returns(const GbmParams& params, double horizon, double dt,
                                             std::size_t paths, std::uint64_t seed,
                                             unsigned threads = 1);

// (1 / (sqrt(2 pi) omega mu)) exp(-(ln(mu/mu0) - rho)^2 / (2 omega^2))
double lognormal_pdf(double mu, double rho, double omega, double mu0);

}  // namespace stockvolve::evolution
