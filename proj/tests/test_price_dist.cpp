#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"
#include "stockvolve/error.hpp"
#include "stockvolve/price_dist.hpp"

using namespace stockvolve;
using namespace stockvolve::price;
using boost::math::quadrature::gauss_kronrod;

namespace {

template <class F>
double integrate(F f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("model constants") {
  const LogisticPriceModel m(100.0, 1.0);
  CHECK(m.Q() == doctest::Approx(1.0 / std::log(99.0)).epsilon(1e-15));
  CHECK(m.Q() == doctest::Approx(0.2176).epsilon(1e-3));
  CHECK(m.Q_prime() == doctest::Approx(99.0 * m.Q()).epsilon(1e-15));
  CHECK(m.q() == doctest::Approx(m.Q() * std::numbers::pi / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(m.sigma() == doctest::Approx(std::sqrt(2.0) * m.q() * 100.0).epsilon(1e-15));
  CHECK_THROWS_AS(LogisticPriceModel(1.0, 1.0), Error);
  CHECK_THROWS_AS(LogisticPriceModel(1.0, -0.5), Error);
  CHECK_THROWS_AS(LogisticPriceModel(100.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(LogisticPriceModel(100.0, 1.0, 0.0), Error);
}

TEST_CASE("logistic cdf anchors") {
  const LogisticPriceModel m(100.0, 1.0);
  CHECK(logistic_cdf(100.0, m) == 0.5);
  CHECK(std::abs(logistic_cdf(1.0, m) - 0.01) <= 1e-12);
  double prev = 0.0;
  for (double p = -50.0; p <= 250.0; p += 0.5) {
    const double F = logistic_cdf(p, m);
    CHECK(F > prev);
    prev = F;
  }
}

TEST_CASE("logistic cdf at p = 120 against a 50-digit evaluation") {
  using big = boost::multiprecision::cpp_bin_float_50;
  const big Q = big(1) / log(big(99));
  const big x = (big(120) - big(100)) / (Q * big(99));
  const double ref = static_cast<double>(big(1) / (big(1) + exp(-x)));
  CHECK(logistic_cdf(120.0, LogisticPriceModel(100.0, 1.0)) == doctest::Approx(ref).epsilon(1e-15));
}

TEST_CASE("logistic pdf shape, normalization and variance") {
  const LogisticPriceModel m(100.0, 1.0);
  CHECK(logistic_pdf(100.0, m) == doctest::Approx(1.0 / (4.0 * m.Q() * 99.0)).epsilon(1e-15));
  for (double x : {0.3, 5.0, 40.0, 170.0}) CHECK(logistic_pdf(100.0 + x, m) == logistic_pdf(100.0 - x, m));
  const double s = m.sigma();
  auto pdf = [&](double p) { return logistic_pdf(p, m); };
  const double mass = integrate(pdf, 100.0 - 30.0 * s, 100.0) + integrate(pdf, 100.0, 100.0 + 30.0 * s);
  CHECK(std::abs(mass - 1.0) <= 1e-10);
  auto second = [&](double p) { return (p - 100.0) * (p - 100.0) * logistic_pdf(p, m); };
  const double var = integrate(second, 100.0 - 60.0 * s, 100.0) + integrate(second, 100.0, 100.0 + 60.0 * s);
  CHECK(var == doctest::Approx(logistic_variance(m)).epsilon(1e-6));

  const double h = 1e-4;
  for (double p : {60.0, 95.0, 130.0}) {
    const double numeric = (logistic_cdf(p + h, m) - logistic_cdf(p - h, m)) / (2.0 * h);
    CHECK(numeric == doctest::Approx(logistic_pdf(p, m)).epsilon(1e-7));
  }
}

TEST_CASE("logistic variance formula and Monte-Carlo check") {
  const LogisticPriceModel unit(2.0, 1.0, 1.0 / (1.0 + std::exp(1.0)));
  CHECK(unit.Q() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(logistic_variance(unit) == doctest::Approx(std::numbers::pi * std::numbers::pi / 3.0).epsilon(1e-13));

  const LogisticPriceModel m(100.0, 1.0);
  const auto x = sample_logistic(m, 1000000, 42);
  CHECK(sample_variance(x) == doctest::Approx(logistic_variance(m)).epsilon(0.01));
}

TEST_CASE("Laplace density and sampling") {
  CHECK(laplace_pdf(50.0, 50.0, 0.1) == doctest::Approx(1.0 / (2.0 * 0.1 * 50.0)).epsilon(1e-15));
  auto pdf = [](double p) { return laplace_pdf(p, 50.0, 0.1); };
  CHECK(integrate(pdf, -500.0, 50.0) + integrate(pdf, 50.0, 600.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto x = sample_laplace(50.0, 0.1, 1000000, 7);
  CHECK(std::sqrt(sample_variance(x)) == doctest::Approx(std::sqrt(2.0) * 0.1 * 50.0).epsilon(0.01));
}

TEST_CASE("standard deviations of the logistic and its Laplace tail form agree") {
  const LogisticPriceModel m(100.0, 0.0);
  CHECK(std::sqrt(logistic_variance(m)) == doctest::Approx(m.sigma()).epsilon(1e-14));
  const double kl = kl_logistic_to_laplace(m);
  MESSAGE("KL(logistic || Laplace) = " << kl);
  CHECK(kl > 0.0);
  CHECK(kl < 0.1);
}

TEST_CASE("logistic mass below zero") {
  const LogisticPriceModel wide(100.0, 1.0);
  CHECK(wide.mass_below_zero() == doctest::Approx(logistic_cdf(0.0, wide)));
  CHECK_THROWS_AS(wide.require_positive_support(), Error);
  const LogisticPriceModel narrow(100.0, 1.0, 1e-10);
  CHECK_NOTHROW(narrow.require_positive_support());
}

TEST_CASE("demand and supply curves") {
  const LogisticPriceModel m(100.0, 1.0, 1e-7);
  const PriceGrid g(0.0, 200.0, 1001);
  const auto c = build_curves(m, 1000.0, 1000.0, g);
  const auto n = c.demand();
  const auto z = c.supply();
  CHECK(n.front() == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK(z.front() <= 1e-3);
  CHECK(c.tail_mass() <= 1e-6);
  for (std::size_t i = 1; i < n.size(); ++i) {
    CHECK(n[i] <= n[i - 1]);
    CHECK(z[i] >= z[i - 1]);
  }
  CHECK_THROWS_AS(build_curves(m, 0.0, 1.0, g), Error);
  CHECK_THROWS_AS(CurvePair(g, std::vector<double>(1001, 0.5), std::vector<double>(1001, 1.5), 1.0, 1.0), Error);
}

TEST_CASE("intersection price") {
  const LogisticPriceModel m(100.0, 1.0);
  const PriceGrid g(0.0, 200.0, 2001);
  CHECK(std::abs(intersection_price(build_curves(m, 500.0, 500.0, g)) - 100.0) <= g.spacing());
  for (double k : {2.0, 3.0}) {
    const double exact = 100.0 + m.Q_prime() * std::log(k);
    CHECK(intersection_price(build_curves(m, k * 500.0, 500.0, g)) == doctest::Approx(exact).epsilon(1e-4));
  }
  const std::vector<double> zero(g.size(), 0.0);
  const auto z = build_curves(m, 1.0, 1.0, g).supply();
  CHECK_THROWS_AS(intersection_price(g, zero, z), Error);
}

TEST_CASE("purchase density normalization and symmetry") {
  const LogisticPriceModel m(100.0, 1.0);
  const PriceGrid g(0.0, 200.0, 2001);
  const auto c = build_curves(m, 1.0, 1.0, g);
  const auto pd = purchase_density(c);
  const double mass = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pd.density.size(); ++i) s += 0.5 * (pd.density[i] + pd.density[i + 1]);
    return s * g.spacing();
  }();
  CHECK(std::abs(mass - 1.0) <= 1e-8);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(pd.density[i] - pd.density[g.size() - 1 - i]) <= 1e-10);
  }
  const auto peak = std::max_element(pd.density.begin(), pd.density.end()) - pd.density.begin();
  CHECK(g[static_cast<std::size_t>(peak)] == doctest::Approx(100.0));
  // Raw T is the logistic integral of F (1 - F), Q' times the covered mass.
  const double covered = logistic_cdf(200.0, m) - logistic_cdf(0.0, m);
  CHECK(pd.T == doctest::Approx(m.Q_prime() * covered).epsilon(1e-5));
}

TEST_CASE("a right-shifted supply cdf moves the density peak by half the shift") {
  const LogisticPriceModel m(100.0, 1.0);
  const PriceGrid g(0.0, 200.0, 4001);
  const double shift = 10.0;
  std::vector<double> Fz(g.size()), Fn(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    Fz[i] = logistic_cdf(g[i] - shift, m);
    Fn[i] = logistic_cdf(g[i], m);
  }
  const auto pd = purchase_density(CurvePair(g, Fz, Fn, 1.0, 1.0));
  const auto peak = static_cast<std::size_t>(std::max_element(pd.density.begin(), pd.density.end()) - pd.density.begin());
  CHECK(std::abs(g[peak] - (100.0 + shift / 2.0)) <= g.spacing());
}

TEST_CASE("degenerate curves are rejected") {
  const PriceGrid g(0.0, 1.0, 16);
  const std::vector<double> zeros(16, 0.0);
  CHECK_THROWS_AS(purchase_density(CurvePair(g, zeros, zeros, 1.0, 1.0)), Error);
}

TEST_CASE("scaling integral check") {
  const PriceGrid g(0.0, 200.0, 512);
  const auto t = t_check(LogisticPriceModel(100.0, 1.0), g);
  CHECK(std::abs(t.normalized - 1.0) <= 1e-9);
  CHECK(t.T_over_Qprime == doctest::Approx(t.support_mass).epsilon(1e-12));
  const auto strict = t_check(LogisticPriceModel(100.0, 1.0, 1e-10), g);
  CHECK(std::abs(strict.T_over_Qprime - 1.0) <= 1e-9);
}

TEST_CASE("mean price shift") {
  CHECK(mean_price_shift(3.0, 3.0, 1000.0, 0.2, 100.0) == 0.0);
  CHECK(mean_price_shift(5.0, 0.0, 1000.0, 0.2, 100.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK_THROWS_AS(mean_price_shift(1.0, 0.0, 0.0, 0.2, 100.0), Error);
}
