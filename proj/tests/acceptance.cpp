// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stockvolve/analysis.hpp"
#include "stockvolve/evolution.hpp"
#include "stockvolve/kinetics.hpp"
#include "stockvolve/price_dist.hpp"
#include "stockvolve/random.hpp"
#include "stockvolve/returns.hpp"

using namespace stockvolve;
using boost::math::quadrature::gauss_kronrod;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
double integrate(F f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 30, 1e-15);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

void kinetics_stationarity(Verdict& v) {
  const PriceGrid grid(0.0, 200.0, 512);
  kinetics::MarketState s{grid, std::vector<double>(512), std::vector<double>(512),
                          std::vector<double>(512, 3.0), std::vector<double>(512, 3.0), 0.5};
  Rng rng(1);
  for (std::size_t i = 0; i < 512; ++i) {
    s.n[i] = 0.5 + 5.0 * rng.uniform_open();
    s.z[i] = 0.5 + 5.0 * rng.uniform_open();
  }
  const auto start = Clock::now();
  const auto out = kinetics::relax(s, 1e-6, 10000000);
  const double elapsed = seconds_since(start);
  const double residual = kinetics::stationarity_residual(out);
  v.detail << "residual " << residual << " in " << elapsed << " s";
  v.require(residual < 1e-6, "residual");
  v.require(elapsed < 1.0, "runtime");

  double worst = 0.0;
  for (std::size_t i = 0; i < 512; i += 7) {
    const auto r = kinetics::stability_eigenvalues(out.n[i], out.z[i], out.eta);
    const double expect = -out.eta * (out.n[i] + out.z[i]);
    worst = std::max(worst, std::abs(r.numeric_eigenvalues[0] - expect) / std::abs(expect));
    worst = std::max(worst, std::abs(r.numeric_eigenvalues[1]) / std::abs(expect));
  }
  v.detail << "; eigenvalue rel err " << worst;
  v.require(worst <= 1e-8, "eigenvalues");
}

void distribution_identities(Verdict& v) {
  const price::LogisticPriceModel m(100.0, 1.0);
  auto pdf = [&](double p) { return price::logistic_pdf(p, m); };
  const double s = m.sigma();
  double mass = 0.0, var = 0.0;
  for (int k = -60; k < 60; ++k) {
    const double a = 100.0 + k * s, b = a + s;
    mass += integrate(pdf, a, b);
    var += integrate([&](double p) { return (p - 100.0) * (p - 100.0) * pdf(p); }, a, b);
  }
  const double var_rel = std::abs(var - price::logistic_variance(m)) / price::logistic_variance(m);
  const double cdf_err = std::abs(price::logistic_cdf(1.0, m) - m.eps());
  const auto t = price::t_check(m, PriceGrid(0.0, 200.0, 512));
  const auto strict = price::t_check(price::LogisticPriceModel(100.0, 1.0, 1e-10), PriceGrid(0.0, 200.0, 512));
  v.detail << "|mass-1| " << std::abs(mass - 1.0) << "; var rel " << var_rel << "; |F(mu_m)-eps| " << cdf_err
           << "; T/(Q' mass) - 1 = " << t.normalized - 1.0 << " (raw T/Q' " << t.T_over_Qprime
           << ", strict-eps raw " << strict.T_over_Qprime << ")";
  v.require(std::abs(mass - 1.0) <= 1e-8, "mass");
  v.require(var_rel <= 1e-6, "variance");
  v.require(cdf_err <= 1e-12, "cdf anchor");
  v.require(std::abs(t.normalized - 1.0) <= 1e-9, "T check");
  v.require(std::abs(strict.T_over_Qprime - 1.0) <= 1e-9, "strict T check");
}

void perturbation_walras(Verdict& v) {
  const price::LogisticPriceModel m(100.0, 1.0);
  const PriceGrid grid(0.0, 200.0, 2001);
  const double n_total = 1e6, eta = 1e-6;
  auto s = kinetics::logistic_state(m, n_total, grid, eta);
  const double before = price::intersection_price(grid, s.n, s.z);
  const double dn = 1e-3 * n_total;
  for (double& x : s.n) x += dn;
  const auto relaxed = kinetics::relax(s, 1e-10, 1000000);
  const double after = price::intersection_price(grid, relaxed.n, relaxed.z);
  const double predicted = price::mean_price_shift(dn, 0.0, n_total, m.Q(), m.mu());
  const double rel = std::abs((after - before) - predicted) / std::abs(predicted);
  v.detail << "shift " << after - before << " vs predicted " << predicted << " (rel err " << rel << ")";
  v.require(rel <= 0.05, "shift");
}

void replicator(Verdict& v) {
  evolution::MarketEnsemble e({1.0, 2.0, 3.0, 4.0, 5.0}, {0.05, -0.02, 0.01, 0.03, -0.04});
  for (int k = 0; k < 100000; ++k) e = evolution::replicator_step(e, 1e-3);
  double sum = 0.0;
  for (double w : e.w()) sum += w;
  const double drift = std::abs(sum - 1.0);

  evolution::MarketEnsemble pair({1.0, 1.0}, {0.02, 0.0});
  std::vector<double> t, w1, w2;
  for (int k = 0; k <= 100000; ++k) {
    if (k % 100 == 0) {
      t.push_back(k * 1e-3);
      w1.push_back(pair.w()[0]);
      w2.push_back(pair.w()[1]);
    }
    pair = evolution::replicator_step(pair, 1e-3);
  }
  const double slope = evolution::fitness_advantage(t, w1, w2).delta_f;

  evolution::MarketEnsemble fix({1.0, 1.0}, {0.1, 0.0});
  double worst = 0.0;
  for (int k = 1; k <= 1000000; ++k) {
    fix = evolution::replicator_step(fix, 1e-4);
    if (k % 50 == 0) worst = std::max(worst, std::abs(fix.w()[0] - evolution::two_stock_share(0.5, 0.1, k * 1e-4)));
  }
  v.detail << "sum drift " << drift << "; recovered df " << slope << "; fixation max dev " << worst
           << " (final w1 " << fix.w()[0] << ")";
  v.require(drift < 1e-9, "simplex");
  v.require(std::abs(slope - 0.02) <= 0.01 * 0.02, "slope");
  v.require(worst <= 1e-6, "fixation");
}

void gbm_lognormal(Verdict& v) {
  const evolution::GbmParams p{0.05, 0.2, 1.0};
  const std::size_t paths = 10000;
  const auto start = Clock::now();
  const auto r = evolution::gbm_terminal_log_returns(p, 1.0, 1e-3, paths, 2024, 1);
  const double elapsed = seconds_since(start);
  const double n = static_cast<double>(paths);
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= n - 1.0;
  const double rho = p.mean_growth - 0.5 * p.sigma_prime * p.sigma_prime;
  const double omega2 = p.sigma_prime * p.sigma_prime;
  const double se_mean = std::sqrt(omega2 / n), se_var = omega2 * std::sqrt(2.0 / (n - 1.0));
  v.detail << "mean " << mean << " vs " << rho << " (" << (mean - rho) / se_mean << " SE); var " << var << " vs "
           << omega2 << " (" << (var - omega2) / se_var << " SE); " << elapsed << " s";
  v.require(std::abs(mean - rho) <= 3.0 * se_mean, "mean");
  v.require(std::abs(var - omega2) <= 3.0 * se_var, "variance");
  v.require(elapsed < 10.0, "runtime");
}

void ged_nesting(Verdict& v) {
  double worst2 = 0.0, worst1 = 0.0;
  for (double r : linspace(-10.0, 10.0, 20001)) {
    const double normal = std::exp(-0.5 * r * r) / std::sqrt(2.0 * std::numbers::pi);
    worst2 = std::max(worst2, std::abs(returns::pdf(returns::Ged{2.0, 1.0}, r) - normal));
    worst1 = std::max(worst1, std::abs(returns::pdf(returns::Ged{1.0, 1.0}, r) - 0.25 * std::exp(-std::abs(r) / 2.0)));
  }
  v.detail << "lambda=2 vs normal " << worst2 << "; lambda=1 vs Laplace(2) " << worst1;
  v.require(worst2 <= 1e-12, "normal");
  v.require(worst1 <= 1e-12, "Laplace");
}

void convolution_oracle(Verdict& v) {
  const double q = 0.01;
  const auto r = linspace(-20.0 * q, 20.0 * q, 801);
  const auto conv = returns::laplace_self_convolution(q, r);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    worst = std::max(worst, std::abs(conv[i] - returns::laplace_self_convolution_exact(q, r[i])));
  }
  const double gap = returns::laplace_approximation_gap(q, r);
  v.detail << "max |conv - closed form| " << worst << "; sup gap to single Laplace " << gap << " (1/(4q) = "
           << 1.0 / (4.0 * q) << ")";
  v.require(worst <= 1e-6, "closed form");
  v.require(std::abs(gap - 1.0 / (4.0 * q)) <= 1e-6, "gap");
}

returns::ReturnSeries as_series(std::vector<double> values) {
  returns::ReturnSeries s;
  s.values = std::move(values);
  s.timestamps.resize(s.values.size());
  std::iota(s.timestamps.begin(), s.timestamps.end(), 0.0);
  return s;
}

void mle_recovery(Verdict& v) {
  auto fit = [&](const returns::DistributionSpec& truth, std::uint64_t seed, double lo, double hi, const char* tag) {
    const auto s = as_series(returns::sample(truth, 100000, seed));
    const auto start = Clock::now();
    const auto f = returns::fit_mle(s, returns::Family::ged);
    const double elapsed = seconds_since(start);
    const double lambda = std::get<returns::Ged>(f.spec).lambda;
    v.detail << tag << " lambda " << lambda << " (" << elapsed << " s) ";
    v.require(lambda >= lo && lambda <= hi, std::string(tag) + " lambda");
    v.require(elapsed < 30.0, std::string(tag) + " runtime");
  };
  fit(returns::Laplace{0.01}, 1, 0.9, 1.1, "Laplace:");
  fit(returns::Normal{0.0, 0.02}, 2, 1.85, 2.15, "normal:");
}

void mixture_limits(Verdict& v) {
  {
    const double q = 0.02, rho = 0.1, mu0 = 50.0, omega = 1e-9;
    const double centre = mu0 * std::exp(rho), sd = std::numbers::sqrt2 * q * centre;
    const auto p = linspace(centre - 10.0 * sd, centre + 10.0 * sd, 2001);
    const auto mix = returns::unconditional_price_density(q, rho, omega, mu0, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(mix[i] - price::laplace_pdf(p[i], centre, q)));
    v.detail << "omega=1e-9 vs Laplace " << worst;
    v.require(worst <= 1e-4, "Laplace limit");
  }
  {
    const double q = 1e-5, rho = 0.05, omega = 0.3, mu0 = 1.0;
    const double centre = mu0 * std::exp(rho);
    const double sd = centre * std::sqrt((std::exp(omega * omega) - 1.0) * std::exp(omega * omega));
    const auto p = linspace(std::max(1e-3, centre - 10.0 * sd), centre + 10.0 * sd, 2001);
    const auto mix = returns::unconditional_price_density(q, rho, omega, mu0, p);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst = std::max(worst, std::abs(mix[i] - evolution::lognormal_pdf(p[i], rho, omega, mu0)));
    }
    v.detail << "; q=1e-5 vs lognormal " << worst;
    v.require(worst <= 1e-4, "lognormal limit");
  }
}

double brute_force(std::span<const double> y, std::span<const double> t, std::size_t max_segments, double penalty,
                   std::size_t min_len) {
  const std::size_t n = y.size();
  auto sse = [&](std::size_t a, std::size_t b) {
    return analysis::fit_line(t.subspan(a, b - a), y.subspan(a, b - a)).sse;
  };
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> go = [&](std::size_t start, std::size_t used, double acc) {
    if (n - start >= min_len) best = std::min(best, acc + sse(start, n));
    if (used + 1 >= max_segments) return;
    for (std::size_t cut = start + min_len; cut + min_len <= n; ++cut) go(cut, used + 1, acc + sse(start, cut) + penalty);
  };
  go(0, 0, 0.0);
  return best;
}

struct Synthetic {
  std::vector<double> t, y;
  std::size_t breakpoint = 0;
};

// Twenty years of daily observations: +0.30/yr, then -0.10/yr with the
// level dropping by `jump` at the break.
Synthetic two_slope(double jump, std::uint64_t seed) {
  Synthetic s;
  const auto n = static_cast<std::size_t>(std::llround(20.0 * analysis::kDaysPerYear));
  s.breakpoint = n / 2;
  const double tb = static_cast<double>(s.breakpoint) / analysis::kDaysPerYear;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / analysis::kDaysPerYear;
    s.t.push_back(t);
    s.y.push_back((i < s.breakpoint ? 0.30 * t : 0.30 * tb - jump - 0.10 * (t - tb)) + 0.05 * rng.normal());
  }
  return s;
}

void segmentation(Verdict& v) {
  Rng rng(8);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 60 + 14 * static_cast<std::size_t>(trial);
    std::vector<double> t(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(i) / 50.0;
      y[i] = std::sin(3.0 * t[i]) + 0.05 * rng.normal();
    }
    const double pen = 0.05 + 0.03 * trial;
    const std::size_t kmax = n <= 120 ? 4 : 3, min_len = 12;
    const auto seg = analysis::segment_trends(y, t, kmax, pen, min_len);
    const double dp = analysis::segmentation_objective(seg, pen);
    const double bf = brute_force(y, t, kmax, pen, min_len);
    worst = std::max(worst, std::abs(dp - bf) / std::max(1.0, std::abs(bf)));
  }
  v.detail << "DP vs exhaustive max rel diff " << worst;
  v.require(worst <= 1e-12, "exhaustive");

  const auto s = two_slope(0.25, 99);
  const auto seg = analysis::segment_trends(s.y, s.t, 6, analysis::default_penalty(s.y));
  const long off = seg.size() >= 2 ? static_cast<long>(seg[0].end_index) - static_cast<long>(s.breakpoint) : -1;
  v.detail << "; level-shift synthetic: " << seg.size() << " segments, break offset " << off << ", slopes "
           << seg.front().slope << " / " << seg.back().slope;
  v.require(seg.size() == 2, "segment count");
  v.require(std::abs(off) <= 3, "breakpoint");
  v.require(std::abs(seg.front().slope - 0.30) <= 0.05 * 0.30, "first slope");
  v.require(std::abs(seg.back().slope + 0.10) <= 0.05 * 0.10, "second slope");
}

// Same synthetic with a continuous kink; reported, not gated.
std::string continuous_kink_reading() {
  std::ostringstream out;
  const auto s = two_slope(0.0, 99);
  const auto seg = analysis::segment_trends(s.y, s.t, 6, analysis::default_penalty(s.y));
  out << "continuous-kink synthetic: " << seg.size() << " segments, break offset "
      << static_cast<long>(seg[0].end_index) - static_cast<long>(s.breakpoint) << " observations, slopes "
      << seg.front().slope << " / " << seg.back().slope;
  int hits = 0;
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) {
    const auto r = two_slope(0.0, 1000 + static_cast<std::uint64_t>(k));
    const auto g = analysis::segment_trends(r.y, r.t, 6, analysis::default_penalty(r.y));
    if (g.size() >= 2 && std::abs(static_cast<long>(g[0].end_index) - static_cast<long>(r.breakpoint)) <= 3) ++hits;
  }
  out << "; within +/-3 on " << hits << " of " << seeds << " seeds";
  return out.str();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*run)(Verdict&);
  };
  const Criterion criteria[] = {
      {1, "kinetics stationarity", kinetics_stationarity},
      {2, "distribution identities", distribution_identities},
      {3, "perturbation to Walras consistency", perturbation_walras},
      {4, "replicator", replicator},
      {5, "GBM / lognormal", gbm_lognormal},
      {6, "return-family nesting", ged_nesting},
      {7, "convolution oracle", convolution_oracle},
      {8, "MLE recovery", mle_recovery},
      {9, "mixture limits", mixture_limits},
      {10, "segmentation", segmentation},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    v.detail.precision(6);
    const auto start = Clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    if (!v.pass) ++failures;
    std::printf("%s  %2d  %-36s %7.2f s  %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(start),
                v.detail.str().c_str());
    if (c.id == 10) std::printf("          note: %s\n", continuous_kink_reading().c_str());
  }
  std::printf("SKIP  11  empirical fits on user-supplied price data (not part of CI)\n");
  return failures == 0 ? 0 : 1;
}
