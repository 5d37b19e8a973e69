#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "stockvolve/error.hpp"
#include "stockvolve/evolution.hpp"

using namespace stockvolve;
using namespace stockvolve::evolution;

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double w_sum(const MarketEnsemble& e) {
  double s = 0.0;
  for (double w : e.w()) s += w;
  return s;
}

}  // namespace

TEST_CASE("Walras step") {
  CHECK(walras_step(100.0, 4.0, 4.0, 0.01, 1.0) == 100.0);
  CHECK(walras_step(100.0, 15.0, 5.0, 0.001, 1.0) == doctest::Approx(101.0).epsilon(1e-15));
  CHECK_THROWS_AS(walras_step(100.0, 1000.0, 0.0, 0.001, 1.0), Error);
  CHECK_THROWS_AS(walras_step(-1.0, 1.0, 0.0, 0.001, 1.0), Error);
}

TEST_CASE("Walras trajectory approaches the exponential at first order") {
  const double H = 0.002, excess = 10.0, horizon = 20.0;
  const double exact = 100.0 * std::exp(H * excess * horizon);
  double previous_error = 0.0;
  for (double dt : {0.1, 0.05, 0.025}) {
    double mu = 100.0;
    const auto steps = static_cast<int>(std::lround(horizon / dt));
    for (int k = 0; k < steps; ++k) mu = walras_step(mu, excess, 0.0, H, dt);
    const double err = std::abs(mu - exact);
    if (previous_error > 0.0) CHECK(previous_error / err == doctest::Approx(2.0).epsilon(0.02));
    previous_error = err;
  }
}

TEST_CASE("growth rate and the Walras coefficient") {
  StockEvolutionParams p;
  p.Q = 0.2;
  p.n_total = 1000.0;
  p.demand_rate = [](double) { return 75.0; };
  p.supply_rate = [](double) { return 25.0; };
  CHECK(growth_rate(p, 0.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(p.H() == doctest::Approx(4e-4).epsilon(1e-15));
  // One Walras step per unit time grows ln mu at H (D - S) = 2 f.
  const double mu = walras_step(1.0, 75.0, 25.0, p.H(), 1e-6);
  CHECK(std::log(mu) / 1e-6 == doctest::Approx(2.0 * growth_rate(p, 0.0)).epsilon(1e-6));

  p.supply_rate = p.demand_rate;
  CHECK(growth_rate(p, 3.0) == 0.0);
  p.n_total = 0.0;
  CHECK_THROWS_AS(growth_rate(p, 0.0), Error);
}

TEST_CASE("ensemble construction") {
  const MarketEnsemble e({1.0, 3.0}, {0.0, 0.0});
  CHECK(e.w()[0] == 0.25);
  CHECK(e.w()[1] == 0.75);
  CHECK_THROWS_AS(MarketEnsemble({}, {}), Error);
  CHECK_THROWS_AS(MarketEnsemble({1.0, 0.0}, {0.0, 0.0}), Error);
  CHECK_THROWS_AS(MarketEnsemble({1.0, 2.0}, {0.0}), Error);
}

TEST_CASE("replicator step examples") {
  MarketEnsemble equal({1.0, 2.0, 5.0}, {0.3, 0.3, 0.3});
  const auto same = replicator_step(equal, 0.01);
  for (std::size_t j = 0; j < 3; ++j) CHECK(same.w()[j] == doctest::Approx(equal.w()[j]).epsilon(1e-15));

  MarketEnsemble two({1.0, 1.0}, {0.1, 0.0});
  const auto next = replicator_step(two, 0.01);
  CHECK(next.w()[0] > 0.5);
  CHECK(next.w()[1] < 0.5);
  CHECK(std::abs(w_sum(next) - 1.0) <= 1e-15);
  CHECK(next.mu()[0] == doctest::Approx(1.001).epsilon(1e-15));

  CHECK_THROWS_AS(replicator_step(two, 10.0), Error);
  CHECK_THROWS_AS(replicator_step(two, 0.0), Error);
}

TEST_CASE("simplex is conserved over 1e5 replicator steps") {
  MarketEnsemble e({1.0, 2.0, 3.0, 4.0, 5.0}, {0.05, -0.02, 0.01, 0.03, -0.04});
  for (int k = 0; k < 100000; ++k) e = replicator_step(e, 1e-3);
  CHECK(std::abs(w_sum(e) - 1.0) <= 1e-9);
}

TEST_CASE("a fitter stock keeps gaining on a weaker one") {
  MarketEnsemble e({3.0, 1.0, 2.0}, {0.01, 0.04, 0.02});
  double prev = e.w()[1] / e.w()[2];
  for (int k = 0; k < 5000; ++k) {
    e = replicator_step(e, 0.01);
    const double ratio = e.w()[1] / e.w()[2];
    REQUIRE(ratio > prev);
    prev = ratio;
  }
}

TEST_CASE("relative prices ignore a common price scale") {
  const MarketEnsemble a({1.0, 2.0, 7.0}, {0.0, 0.0, 0.0});
  const MarketEnsemble b({1000.0, 2000.0, 7000.0}, {0.0, 0.0, 0.0});
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.w()[j] == doctest::Approx(b.w()[j]).epsilon(1e-15));
}

TEST_CASE("two-stock fixation follows the closed-form logistic") {
  const double df = 0.1, dt = 1e-4;
  MarketEnsemble e({1.0, 1.0}, {df, 0.0});
  double worst = 0.0;
  const int steps = 1000000;
  for (int k = 1; k <= steps; ++k) {
    e = replicator_step(e, dt);
    if (k % 100 == 0) worst = std::max(worst, std::abs(e.w()[0] - two_stock_share(0.5, df, k * dt)));
  }
  MESSAGE("max deviation from closed form: " << worst);
  CHECK(worst <= 1e-6);
  CHECK(e.w()[0] > 0.9999);
  CHECK(two_stock_share(0.5, df, 1e4) == doctest::Approx(1.0));
}

TEST_CASE("fitness advantage regression") {
  std::vector<double> t(50), a(50), b(50);
  for (std::size_t i = 0; i < 50; ++i) {
    t[i] = 0.5 * static_cast<double>(i);
    a[i] = 0.3 * std::exp(0.05 * t[i]);
    b[i] = 0.3;
  }
  const auto same = fitness_advantage(t, b, b);
  CHECK(same.delta_f == 0.0);
  CHECK(same.intercept == 0.0);
  const auto fit = fitness_advantage(t, a, b);
  CHECK(fit.delta_f == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(fit.intercept) <= 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));

  CHECK_THROWS_AS(fitness_advantage(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0},
                                    std::vector<double>{1.0, 1.0}),
                  Error);
  b[3] = 0.0;
  CHECK_THROWS_AS(fitness_advantage(t, a, b), Error);
}

TEST_CASE("fitness advantage recovered from a replicator simulation") {
  MarketEnsemble e({1.0, 1.0}, {0.02, 0.0});
  std::vector<double> t, w1, w2;
  const double dt = 1e-3;
  for (int k = 0; k <= 100000; ++k) {
    if (k % 100 == 0) {
      t.push_back(k * dt);
      w1.push_back(e.w()[0]);
      w2.push_back(e.w()[1]);
    }
    e = replicator_step(e, dt);
  }
  const auto fit = fitness_advantage(t, w1, w2);
  CHECK(fit.delta_f == doctest::Approx(0.02).epsilon(0.01));
}

TEST_CASE("GBM without volatility is deterministic compound growth") {
  const GbmParams p{0.05, 0.0, 2.0};
  const auto path = gbm_simulate(p, 1.0, 0.01, 1);
  REQUIRE(path.size() == 101);
  CHECK(path.front() == 2.0);
  for (std::size_t k : {1u, 37u, 100u}) {
    CHECK(path[k] == doctest::Approx(2.0 * std::pow(1.0005, static_cast<double>(k))).epsilon(1e-13));
  }
}

TEST_CASE("GBM determinism and positivity") {
  const GbmParams p{0.05, 0.8, 1.0};
  const auto a = gbm_simulate(p, 5.0, 0.01, 9);
  const auto b = gbm_simulate(p, 5.0, 0.01, 9);
  const auto c = gbm_simulate(p, 5.0, 0.01, 10);
  CHECK(a == b);
  CHECK(a != c);
  for (double v : a) CHECK(v > 0.0);
  CHECK_THROWS_AS(gbm_simulate(GbmParams{0.0, -1.0, 1.0}, 1.0, 0.1, 1), Error);
  CHECK_THROWS_AS(gbm_simulate(GbmParams{0.0, 0.1, 0.0}, 1.0, 0.1, 1), Error);
}

TEST_CASE("GBM terminal log returns carry the Ito correction") {
  const GbmParams p{0.05, 0.2, 1.0};
  const double T = 1.0;
  const std::size_t paths = 10000;
  const auto r = gbm_terminal_log_returns(p, T, 1e-3, paths, 2024, 4);
  const double rho = (p.mean_growth - 0.5 * p.sigma_prime * p.sigma_prime) * T;
  const double omega2 = p.sigma_prime * p.sigma_prime * T;
  const double n = static_cast<double>(paths);
  CHECK(std::abs(mean_of(r) - rho) <= 3.0 * std::sqrt(omega2 / n));
  CHECK(std::abs(variance_of(r) - omega2) <= 3.0 * omega2 * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("GBM ensembles do not depend on the thread count") {
  const GbmParams p{0.01, 0.3, 1.0};
  const auto one = gbm_terminal_log_returns(p, 1.0, 0.01, 257, 5, 1);
  const auto many = gbm_terminal_log_returns(p, 1.0, 0.01, 257, 5, 7);
  CHECK(one == many);
  const auto path = gbm_simulate(p, 1.0, 0.01, 5, 3);
  CHECK(std::log(path.back()) == doctest::Approx(one[3]).epsilon(1e-12));
}

TEST_CASE("lognormal density") {
  const double rho = 0.3, omega = 0.4, mu0 = 2.0;
  auto pdf = [&](double mu) { return lognormal_pdf(mu, rho, omega, mu0); };
  const double mode = mu0 * std::exp(rho - omega * omega);
  CHECK(pdf(mode) > pdf(mode * (1.0 + 1e-4)));
  CHECK(pdf(mode) > pdf(mode * (1.0 - 1e-4)));
  const double h = 1e-6 * mode;
  CHECK(std::abs(pdf(mode + h) - pdf(mode - h)) / (2.0 * h) <= 1e-6);

  using boost::math::quadrature::gauss_kronrod;
  const double centre = mu0 * std::exp(rho);
  const double mass = gauss_kronrod<double, 61>::integrate(pdf, 0.0, centre, 20, 1e-14) +
                      gauss_kronrod<double, 61>::integrate(pdf, centre, std::numeric_limits<double>::infinity(),
                                                           20, 1e-14);
  CHECK(std::abs(mass - 1.0) <= 1e-8);

  const double narrow = 1e-3;
  CHECK(lognormal_pdf(centre, 0.3, narrow, mu0) > 1e2 * lognormal_pdf(centre * 1.01, 0.3, narrow, mu0));
  CHECK_THROWS_AS(lognormal_pdf(1.0, 0.0, 0.0, 1.0), Error);
}
