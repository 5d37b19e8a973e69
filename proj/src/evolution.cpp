#include "stockvolve/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "stockvolve/error.hpp"
#include "stockvolve/random.hpp"
#include "stockvolve/simd/kernels.hpp"

namespace stockvolve::evolution {

void StockEvolutionParams::validate() const {
  require(Q > 0.0 && n_total > 0.0, ErrorCode::InvalidParameters,
          "stock evolution requires Q > 0 and n_total > 0");
  require(static_cast<bool>(demand_rate) && static_cast<bool>(supply_rate),
          ErrorCode::InvalidParameters, "demand and supply rate functions are required");
}

double walras_step(double mu, double demand_at_mu, double supply_at_mu, double H, double dt) {
  require(mu > 0.0 && dt > 0.0, ErrorCode::InvalidParameters, "walras_step requires mu, dt > 0");
  const double change = H * (demand_at_mu - supply_at_mu) * dt;
  if (!(std::abs(change) < 0.5)) {
    std::ostringstream msg;
    msg << "relative price change " << change << " per step exceeds 0.5";
    fail(ErrorCode::StepTooLarge, msg.str());
  }
  return mu * (1.0 + change);
}

double growth_rate(const StockEvolutionParams& params, double t) {
  params.validate();
  return params.Q / params.n_total * (params.demand_rate(t) - params.supply_rate(t));
}

MarketEnsemble::MarketEnsemble(std::vector<double> mu, std::vector<double> fitness)
    : mu_(std::move(mu)), fitness_(std::move(fitness)) {
  require(!mu_.empty(), ErrorCode::InvalidParameters, "ensemble needs at least one stock");
  require(fitness_.size() == mu_.size(), ErrorCode::InvalidParameters,
          "fitness array must match the number of stocks");
  for (double m : mu_) {
    require(m > 0.0 && std::isfinite(m), ErrorCode::InvalidParameters, "mean prices must be > 0");
  }
  const double total = simd::sum(mu_);
  w_.resize(mu_.size());
  for (std::size_t j = 0; j < mu_.size(); ++j) w_[j] = mu_[j] / total;
}

void MarketEnsemble::set_fitness(std::vector<double> fitness) {
  require(fitness.size() == mu_.size(), ErrorCode::InvalidParameters,
          "fitness array must match the number of stocks");
  fitness_ = std::move(fitness);
}

double MarketEnsemble::mean_fitness() const { return simd::dot(fitness_, w_); }

MarketEnsemble replicator_step(const MarketEnsemble& ensemble, double dt) {
  require(dt > 0.0, ErrorCode::InvalidParameters, "replicator_step requires dt > 0");
  const double mean_f = ensemble.mean_fitness();
  double worst = 0.0;
  for (double f : ensemble.fitness_) worst = std::max(worst, std::abs(f - mean_f));
  if (!(worst * dt < 0.1)) {
    std::ostringstream msg;
    msg << "max|f - <f>| dt = " << worst * dt << " must stay below 0.1";
    fail(ErrorCode::StepTooLarge, msg.str());
  }

  MarketEnsemble next;
  next.fitness_ = ensemble.fitness_;
  next.w_.resize(ensemble.size());
  const double total = simd::replicator_update(ensemble.w_, ensemble.fitness_, mean_f, dt, next.w_);
  simd::scale(next.w_, 1.0 / total);

  next.mu_.resize(ensemble.size());
  simd::replicator_update(ensemble.mu_, ensemble.fitness_, 0.0, dt, next.mu_);
  return next;
}

double two_stock_share(double w1_initial, double delta_f, double t) {
  require(w1_initial > 0.0 && w1_initial < 1.0, ErrorCode::InvalidParameters,
          "initial share must lie in (0, 1)");
  const double x = std::log(w1_initial / (1.0 - w1_initial)) + delta_f * t;
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

FitnessAdvantage fitness_advantage(std::span<const double> t, std::span<const double> w_j,
                                   std::span<const double> w_l) {
  require(t.size() == w_j.size() && t.size() == w_l.size(), ErrorCode::InvalidParameters,
          "fitness_advantage series must be aligned");
  require(t.size() >= 3, ErrorCode::InsufficientData, "fitness_advantage needs at least 3 points");
  const std::size_t n = t.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    require(w_j[i] > 0.0 && w_l[i] > 0.0, ErrorCode::InvalidParameters,
            "relative prices must be > 0");
    y[i] = std::log(w_j[i] / w_l[i]);
  }
  double t_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    t_mean += t[i];
    y_mean += y[i];
  }
  t_mean /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = t[i] - t_mean, dy = y[i] - y_mean;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  require(stt > 0.0, ErrorCode::InsufficientData, "time values must not all coincide");
  FitnessAdvantage out;
  out.delta_f = sty / stt;
  out.intercept = y_mean - out.delta_f * t_mean;
  out.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  return out;
}

void GbmParams::validate() const {
  require(sigma_prime >= 0.0 && std::isfinite(sigma_prime), ErrorCode::InvalidParameters,
          "sigma_prime must be >= 0");
  require(mu0 > 0.0 && std::isfinite(mu0), ErrorCode::InvalidParameters, "mu0 must be > 0");
  require(std::isfinite(mean_growth), ErrorCode::InvalidParameters, "mean_growth must be finite");
}

namespace {

constexpr int kMaxRedraws = 100;

std::size_t step_count(double horizon, double dt) {
  require(dt > 0.0 && horizon >= 0.0, ErrorCode::InvalidParameters,
          "gbm requires dt > 0 and horizon >= 0");
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

double gbm_multiplier(const GbmParams& params, double dt, Rng& rng) {
  const double drift = params.mean_growth * dt;
  if (params.sigma_prime == 0.0) return 1.0 + drift;
  const double vol = params.sigma_prime * std::sqrt(dt);
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const double m = 1.0 + drift + vol * rng.normal();
    if (m > 0.0) return m;
  }
  fail(ErrorCode::StepTooLarge, "gbm multiplier stayed non-positive after 100 redraws; reduce dt");
}

}  // namespace

std::vector<double> gbm_simulate(const GbmParams& params, double horizon, double dt,
                                 std::uint64_t seed, std::uint64_t stream) {
  params.validate();
  const std::size_t steps = step_count(horizon, dt);
  require(params.sigma_prime > 0.0 || 1.0 + params.mean_growth * dt > 0.0,
          ErrorCode::StepTooLarge, "deterministic multiplier 1 + <f> dt must be > 0");
  Rng rng(seed, stream);
  std::vector<double> path(steps + 1);
  path[0] = params.mu0;
  for (std::size_t k = 0; k < steps; ++k) path[k + 1] = path[k] * gbm_multiplier(params, dt, rng);
  return path;
}

std::vector<double> gbm_terminal_log_returns(const GbmParams& params, double horizon, double dt,
                                             std::size_t paths, std::uint64_t seed,
                                             unsigned threads) {
  params.validate();
  const std::size_t steps = step_count(horizon, dt);
  std::vector<double> out(paths);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(seed, r);
      double log_growth = 0.0;
      for (std::size_t k = 0; k < steps; ++k) log_growth += std::log(gbm_multiplier(params, dt, rng));
      out[r] = log_growth;
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(paths, 1))));
  if (threads == 1) {
    run(0, paths);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (paths + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(paths, t * chunk);
    const std::size_t end = std::min(paths, begin + chunk);
    pool.emplace_back([&, t, begin, end] {
      try {
        run(begin, end);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double lognormal_pdf(double mu, double rho, double omega, double mu0) {
  require(omega > 0.0 && mu > 0.0 && mu0 > 0.0, ErrorCode::InvalidParameters,
          "lognormal_pdf requires omega, mu, mu0 > 0");
  const double u = std::log(mu / mu0) - rho;
  return std::exp(-u * u / (2.0 * omega * omega)) /
         (std::sqrt(2.0 * std::numbers::pi) * omega * mu);
}

}  // namespace stockvolve::evolution
