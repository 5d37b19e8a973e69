#pragma once

// Return series and the Laplace-Gaussian family of return distributions:
// Normal, Laplace, generalized exponential (GED), hyperbolic, Kanji mixture
// and the Gauss-Laplace sum, with sampling and maximum-likelihood fitting.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace stockvolve::returns {

struct ReturnSeries {
  std::vector<double> timestamps;  // strictly increasing
  std::vector<double> values;      // log-returns, finite

  std::size_t size() const { return values.size(); }
  void validate() const;
};

// r_k = ln(p_{k+step} / p_k). Timestamps default to the index k of the
// earlier price; pass `times` (same length as prices) to carry real ones.
ReturnSeries log_returns(std::span<const double> prices, std::size_t step = 1,
                         std::span<const double> times = {});

struct Normal {
  double rho = 0.0;    // mean return
  double omega = 1.0;  // standard deviation
};

// (1 / 2q) exp(-|r| / q), standard deviation sqrt(2) q.
struct Laplace {
  double q = 1.0;
};

// lambda 2^-(1/lambda + 1) / Gamma(1/lambda) exp(-|x|^lambda / 2) with
// x = r / scale. scale = 1 is the unscaled form: lambda = 2 gives the
// standard normal, lambda = 1 a Laplace with scale 2 (variance 8).
struct Ged {
  double lambda = 2.0;
  double scale = 1.0;
};

// C1 exp(C2 (lambda sqrt(1 + r^2) - chi r)) with
// C1 = sqrt(lambda^2 - chi^2) / (2 lambda K1(1/lambda^2 - 1)) and
// C2 = (lambda^2 - 1) / (lambda^2 sqrt(lambda^2 - chi^2)).
// Normalizable only for 0 < lambda < 1 and |chi| < lambda.
struct Hyperbolic {
  double lambda = 0.5;
  double chi = 0.0;
};

// theta Normal + (1 - theta) Laplace, as densities.
struct KanjiMixture {
  double theta = 0.5;
  Normal normal;
  Laplace laplace;
};

// Distribution of theta N' + (1 - theta) L' for independent N', L'.
struct GaussLaplaceSum {
  double theta = 0.5;
  Normal normal;
  Laplace laplace;
};

using DistributionSpec = std::variant<Normal, Laplace, Ged, Hyperbolic, KanjiMixture, GaussLaplaceSum>;

enum class Family { normal, laplace, ged, hyperbolic, kanji_mixture, gauss_laplace_sum };

Family family_of(const DistributionSpec& spec);
std::string_view family_name(Family family);
Family parse_family(std::string_view name);  // throws InvalidParameters
// Free parameters of a fit. The location is removed by centering in every
// family alike, so mixture means are held at zero and not counted.
std::size_t parameter_count(Family family);

// Throws InvalidParameters when the spec violates its domain.
void validate(const DistributionSpec& spec);

double pdf(const DistributionSpec& spec, double r);
double log_pdf(const DistributionSpec& spec, double r);

// Deterministic in seed. Normal draws use stream 0 and Laplace draws stream 1
// in every family that has them, so a theta = 1 Gauss-Laplace sum reproduces
// the Normal sampler value for value.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

double ged_kurtosis(double lambda);         // Gamma(5/l) Gamma(1/l) / Gamma(3/l)^2
double ged_unit_variance(double lambda);    // variance of the scale = 1 form
double log_bessel_k1(double x);

struct FitResult {
  DistributionSpec spec;
  double location = 0.0;  // sample mean removed before fitting
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int iterations = 0;
  bool converged = false;
  double skewness = 0.0;
  std::size_t observations = 0;
};

struct FitOptions {
  int restarts = 10;
  int max_iterations = 2000;
};

// Maximum-likelihood fit of `family` to the mean-centered returns.
// Throws TooFewObservations (< 50), TooFewDistinctReturns (zero spread) and
// FitFailed (non-finite likelihood at the optimum).
FitResult fit_mle(const ReturnSeries& returns, Family family,
                  const std::optional<DistributionSpec>& init = std::nullopt,
                  const FitOptions& options = {});

double log_likelihood(const DistributionSpec& spec, std::span<const double> values);
double sample_skewness(std::span<const double> values);
double sample_excess_kurtosis(std::span<const double> values);

nlohmann::json to_json(const DistributionSpec& spec);
DistributionSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

// CSV `timestamp,return`.
void write_return_csv(std::ostream& out, const ReturnSeries& series);
ReturnSeries read_return_csv(std::istream& in, const std::string& source_name = "returns");

// Numerical self-convolution of the Laplace density (1/2q) exp(-|k|/q) on
// the given return grid.
std::vector<double> laplace_self_convolution(double q, std::span<const double> r_grid);

// (1 / 4q)(1 + |r|/q) exp(-|r|/q)
double laplace_self_convolution_exact(double q, double r);

// sup over the grid of |convolution - (1/2q) exp(-|r|/q)|.
double laplace_approximation_gap(double q, std::span<const double> r_grid);

// Integral over mu of the Laplace price density around mu (scale q mu)
// weighted by the lognormal law of mu. Throws QuadratureFailure.
std::vector<double> unconditional_price_density(double q, double rho, double omega, double mu0,
                                                std::span<const double> p_grid);

}  // namespace stockvolve::returns
