#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "stockvolve/error.hpp"
#include "stockvolve/optimize.hpp"
#include "stockvolve/returns.hpp"
#include "stockvolve/simd/kernels.hpp"

namespace stockvolve::returns {
namespace {

constexpr std::size_t kMinObservations = 50;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = simd::sum(v) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return m;
}

// Method-of-moments shape: invert the GED kurtosis, which decreases in lambda.
double ged_shape_from_kurtosis(double excess_kurtosis) {
  constexpr double lo = 0.2, hi = 20.0;
  const double target = std::clamp(excess_kurtosis + 3.0, ged_kurtosis(hi) + 1e-9, ged_kurtosis(lo) - 1e-9);
  return opt::bisect_root([&](double l) { return ged_kurtosis(l) - target; }, lo, hi, 1e-10);
}

struct Best {
  DistributionSpec spec;
  double nll = kInf;
  int iterations = 0;
  bool converged = false;
};

template <class Decode>
void run_restarts(const std::vector<std::vector<double>>& starts,
                  const std::function<double(const DistributionSpec&)>& nll, Decode decode,
                  const FitOptions& options, Best& best) {
  opt::NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.initial_step = 0.25;
  for (const auto& start : starts) {
    auto objective = [&](const std::vector<double>& x) { return nll(decode(x)); };
    auto r = opt::nelder_mead(objective, start, nm);
    best.iterations += r.iterations;
    if (r.value < best.nll) {
      best.nll = r.value;
      best.spec = decode(r.x);
      best.converged = r.converged;
    }
  }
}

// Piecewise-linear log density on a uniform table, for families whose
// density needs quadrature per evaluation.
class LogDensityTable {
 public:
  LogDensityTable(const DistributionSpec& spec, double lo, double hi, std::size_t nodes)
      : lo_(lo), h_((hi - lo) / static_cast<double>(nodes - 1)), values_(nodes) {
    for (std::size_t i = 0; i < nodes; ++i) values_[i] = log_pdf(spec, lo + h_ * static_cast<double>(i));
  }

  double operator()(double x) const {
    const double pos = (x - lo_) / h_;
    const std::size_t last = values_.size() - 1;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(pos, 0.0)), last - 1);
    const double frac = pos - static_cast<double>(k);
    return values_[k] + frac * (values_[k + 1] - values_[k]);
  }

 private:
  double lo_, h_;
  std::vector<double> values_;
};

}  // namespace

double log_likelihood(const DistributionSpec& spec, std::span<const double> values) {
  validate(spec);
  double ll = 0.0;
  for (double v : values) ll += log_pdf(spec, v);
  return ll;
}

double sample_skewness(std::span<const double> values) { return moments(values).skewness; }

double sample_excess_kurtosis(std::span<const double> values) {
  return moments(values).excess_kurtosis;
}

FitResult fit_mle(const ReturnSeries& returns, Family family,
                  const std::optional<DistributionSpec>& init, const FitOptions& options) {
  returns.validate();
  require(returns.size() >= kMinObservations, ErrorCode::TooFewObservations,
          "maximum-likelihood fitting needs at least 50 returns");
  const Moments mom = moments(returns.values);
  require(mom.variance > 0.0, ErrorCode::TooFewDistinctReturns,
          "all returns are identical; no spread to fit");
  require(!init || family_of(*init) == family, ErrorCode::InvalidParameters,
          "initial spec belongs to a different family");

  std::vector<double> x(returns.values);
  for (double& v : x) v -= mom.mean;
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(mom.variance);
  const int restarts = std::max(1, options.restarts);

  Best best;
  auto generic_nll = [&](const DistributionSpec& spec) {
    double ll = 0.0;
    for (double v : x) ll += log_pdf(spec, v);
    return std::isfinite(ll) ? -ll : kInf;
  };

  switch (family) {
    case Family::normal: {
      best.spec = Normal{0.0, std::sqrt(simd::sum_sq(x) / n)};
      best.nll = generic_nll(best.spec);
      best.converged = true;
      break;
    }
    case Family::laplace: {
      best.spec = Laplace{simd::abs_sum(x) / n};
      best.nll = generic_nll(best.spec);
      best.converged = true;
      break;
    }
    case Family::ged: {
      // Sum of |x|^lambda through precomputed logs; exact zeros contribute 0.
      std::vector<double> log_abs(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) log_abs[i] = x[i] != 0.0 ? std::log(std::abs(x[i])) : -kInf;
      auto nll = [&](const DistributionSpec& spec) {
        const auto& g = std::get<Ged>(spec);
        double acc = 0.0;
        for (double la : log_abs) acc += std::exp(g.lambda * la);
        const double ll = n * (std::log(g.lambda) - (1.0 / g.lambda + 1.0) * std::numbers::ln2 -
                               std::lgamma(1.0 / g.lambda) - std::log(g.scale)) -
                          0.5 * acc * std::pow(g.scale, -g.lambda);
        return std::isfinite(ll) ? -ll : kInf;
      };
      auto decode = [](const std::vector<double>& p) -> DistributionSpec {
        return Ged{std::exp(p[0]), std::exp(p[1])};
      };
      const double shape0 = init ? std::get<Ged>(*init).lambda : ged_shape_from_kurtosis(mom.excess_kurtosis);
      static constexpr double kShapeFactors[] = {1.0, 0.5, 2.0, 0.75, 1.5, 0.6, 1.25, 0.9, 1.1, 3.0};
      std::vector<std::vector<double>> starts;
      for (int r = 0; r < restarts; ++r) {
        const double shape = std::clamp(shape0 * kShapeFactors[r % 10], 0.2, 20.0);
        const double scale = (init && r == 0) ? std::get<Ged>(*init).scale : sd / std::sqrt(ged_unit_variance(shape));
        starts.push_back({std::log(shape), std::log(scale)});
      }
      run_restarts(starts, nll, decode, options, best);
      break;
    }
    case Family::hyperbolic: {
      auto decode = [](const std::vector<double>& p) -> DistributionSpec {
        const double lambda = std::clamp(logistic(p[0]), 1e-8, 1.0 - 1e-12);
        return Hyperbolic{lambda, lambda * std::tanh(p[1])};
      };
      // Gaussian core of width 1/sqrt(alpha) matched to the sample spread.
      const double alpha = 1.0 / mom.variance;
      const double lambda0 = init ? std::get<Hyperbolic>(*init).lambda : 1.0 / std::sqrt(1.0 + alpha);
      std::vector<std::vector<double>> starts;
      for (int r = 0; r < restarts; ++r) {
        const double l = std::clamp(lambda0 * std::pow(1.5, (r % 5) - 2), 1e-6, 0.999);
        const double chi_ratio = init && r == 0 ? std::get<Hyperbolic>(*init).chi / lambda0 : 0.0;
        starts.push_back({logit(l), std::atanh(std::clamp(chi_ratio, -0.99, 0.99)) + 0.1 * (r / 5)});
      }
      run_restarts(starts, generic_nll, decode, options, best);
      break;
    }
    case Family::kanji_mixture:
    case Family::gauss_laplace_sum: {
      const bool is_sum = family == Family::gauss_laplace_sum;
      auto decode = [is_sum](const std::vector<double>& p) -> DistributionSpec {
        const double theta = logistic(p[0]);
        const Normal nrm{0.0, std::exp(p[1])};
        const Laplace lap{std::exp(p[2])};
        if (is_sum) return GaussLaplaceSum{theta, nrm, lap};
        return KanjiMixture{theta, nrm, lap};
      };
      const double pad = 0.05 * (*std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end()));
      const double lo = *std::min_element(x.begin(), x.end()) - pad;
      const double hi = *std::max_element(x.begin(), x.end()) + pad;
      auto tabulated_nll = [&](const DistributionSpec& spec) {
        const LogDensityTable table(spec, lo, hi, 257);
        double ll = 0.0;
        for (double v : x) ll += table(v);
        return std::isfinite(ll) ? -ll : kInf;
      };
      std::vector<std::vector<double>> starts;
      const int count = is_sum ? std::min(restarts, 3) : restarts;
      for (int r = 0; r < count; ++r) {
        double theta = 0.2 + 0.6 * static_cast<double>(r % 4) / 3.0;
        double omega = sd, q = sd / std::sqrt(2.0);
        if (is_sum) {
          // Both components rescaled so the sum keeps the sample variance.
          const double k = 1.0 / std::sqrt(theta * theta + (1.0 - theta) * (1.0 - theta));
          omega *= k;
          q *= k;
        }
        if (init && r == 0) {
          std::visit([&](const auto& s) {
            if constexpr (requires { s.theta; s.normal; s.laplace; }) {
              theta = s.theta;
              omega = s.normal.omega;
              q = s.laplace.q;
            }
          }, *init);
        }
        const double spread = std::pow(1.3, (r / 4) % 3);
        starts.push_back({logit(std::clamp(theta, 1e-6, 1.0 - 1e-6)), std::log(omega * spread), std::log(q / spread)});
      }
      if (is_sum) {
        run_restarts(starts, tabulated_nll, decode, options, best);
        // Report the exact likelihood, not the tabulated surrogate.
        best.nll = generic_nll(best.spec);
      } else {
        run_restarts(starts, generic_nll, decode, options, best);
      }
      break;
    }
  }

  FitResult out;
  out.spec = best.spec;
  out.location = mom.mean;
  out.log_likelihood = -best.nll;
  require(std::isfinite(out.log_likelihood), ErrorCode::FitFailed,
          "log-likelihood is not finite at the optimum");
  const double k = static_cast<double>(parameter_count(family));
  out.aic = 2.0 * k - 2.0 * out.log_likelihood;
  out.bic = k * std::log(n) - 2.0 * out.log_likelihood;
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.skewness = mom.skewness;
  out.observations = x.size();
  return out;
}

}  // namespace stockvolve::returns
