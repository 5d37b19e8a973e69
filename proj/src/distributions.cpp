#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "stockvolve/csv.hpp"
#include "stockvolve/error.hpp"
#include "stockvolve/quadrature.hpp"
#include "stockvolve/random.hpp"
#include "stockvolve/returns.hpp"

namespace stockvolve::returns {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2 pi)

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_normal(const Normal& n) {
  require(std::isfinite(n.rho) && n.omega > 0.0 && std::isfinite(n.omega),
          ErrorCode::InvalidParameters, "normal requires omega > 0");
}

void check_laplace(const Laplace& l) {
  require(l.q > 0.0 && std::isfinite(l.q), ErrorCode::InvalidParameters, "laplace requires q > 0");
}

void check_theta(double theta) {
  require(theta >= 0.0 && theta <= 1.0, ErrorCode::InvalidParameters,
          "mixture weight theta must lie in [0, 1]");
}

double normal_log_pdf(const Normal& n, double r) {
  const double u = (r - n.rho) / n.omega;
  return -0.5 * u * u - std::log(n.omega) - kLogSqrt2Pi;
}

double laplace_log_pdf(const Laplace& l, double r) { return -std::abs(r) / l.q - std::log(2.0 * l.q); }

double ged_log_norm(double lambda) {
  return std::log(lambda) - (1.0 / lambda + 1.0) * std::numbers::ln2 - std::lgamma(1.0 / lambda);
}

double ged_log_pdf(const Ged& g, double r) {
  const double x = std::abs(r / g.scale);
  return ged_log_norm(g.lambda) - std::log(g.scale) - 0.5 * std::pow(x, g.lambda);
}

struct HyperbolicConstants {
  double log_c1;
  double c2;
};

HyperbolicConstants hyperbolic_constants(const Hyperbolic& h) {
  const double l2 = h.lambda * h.lambda;
  const double root = std::sqrt(l2 - h.chi * h.chi);
  const double arg = 1.0 / l2 - 1.0;
  return {std::log(root) - std::log(2.0 * h.lambda) - log_bessel_k1(arg), (l2 - 1.0) / (l2 * root)};
}

double hyperbolic_log_pdf(const Hyperbolic& h, double r) {
  const auto c = hyperbolic_constants(h);
  return c.log_c1 + c.c2 * (h.lambda * std::sqrt(1.0 + r * r) - h.chi * r);
}

// Density of theta N' + (1 - theta) L' by direct quadrature of the
// convolution over the Laplace variable.
double gauss_laplace_sum_pdf(const GaussLaplaceSum& g, double z) {
  if (g.theta == 1.0) return std::exp(normal_log_pdf(g.normal, z));
  if (g.theta == 0.0) return std::exp(laplace_log_pdf(g.laplace, z));
  const Normal x{g.theta * g.normal.rho, g.theta * g.normal.omega};
  const Laplace y{(1.0 - g.theta) * g.laplace.q};
  auto integrand = [&](double v) {
    return std::exp(laplace_log_pdf(y, v) + normal_log_pdf(x, z - v));
  };
  const double spike = z - x.rho;
  std::vector<double> cuts = {-45.0 * y.q, 45.0 * y.q, 0.0, spike, spike - 12.0 * x.omega,
                              spike + 12.0 * x.omega};
  const double lo = std::min(-45.0 * y.q, spike - 12.0 * x.omega);
  const double hi = std::max(45.0 * y.q, spike + 12.0 * x.omega);
  std::sort(cuts.begin(), cuts.end());
  quad::Options opt;
  opt.abs_tol = 1e-16;
  opt.rel_tol = 1e-10;
  double total = 0.0;
  double prev = lo;
  for (double c : cuts) {
    c = std::clamp(c, lo, hi);
    if (c > prev) {
      total += quad::integrate_or_throw(integrand, prev, c, opt);
      prev = c;
    }
  }
  if (hi > prev) total += quad::integrate_or_throw(integrand, prev, hi, opt);
  return total;
}

// Inverse-cdf sampler on a tabulated density, used where no direct
// transform exists.
std::vector<double> tabulated_sample(const std::function<double(double)>& log_density,
                                     double center, double half_width, std::size_t n, Rng& rng) {
  constexpr std::size_t kNodes = 1 << 15;
  std::vector<double> x(kNodes), cdf(kNodes);
  const double h = 2.0 * half_width / static_cast<double>(kNodes - 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kNodes; ++i) {
    x[i] = center - half_width + h * static_cast<double>(i);
    cdf[i] = log_density(x[i]);
    peak = std::max(peak, cdf[i]);
  }
  double prev = std::exp(cdf[0] - peak);
  cdf[0] = 0.0;
  for (std::size_t i = 1; i < kNodes; ++i) {
    const double cur = std::exp(cdf[i] - peak);
    cdf[i] = cdf[i - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  const double total = cdf.back();
  std::vector<double> out(n);
  for (double& v : out) {
    const double target = rng.uniform_open() * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, kNodes - 1);
    const double span = cdf[k] - cdf[k - 1];
    const double frac = span > 0.0 ? (target - cdf[k - 1]) / span : 0.5;
    v = x[k - 1] + frac * h;
  }
  return out;
}

double laplace_draw(double q, Rng& rng) {
  const double u = rng.uniform_open();
  return u < 0.5 ? q * std::log(2.0 * u) : -q * std::log(2.0 * (1.0 - u));
}

}  // namespace

void ReturnSeries::validate() const {
  require(timestamps.size() == values.size(), ErrorCode::InvalidParameters,
          "return timestamps and values must have equal length");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), ErrorCode::InvalidParameters, "returns must be finite");
    if (i > 0) {
      require(timestamps[i] > timestamps[i - 1], ErrorCode::InvalidParameters,
              "return timestamps must be strictly increasing");
    }
  }
}

ReturnSeries log_returns(std::span<const double> prices, std::size_t step,
                         std::span<const double> times) {
  require(step >= 1, ErrorCode::InvalidParameters, "return step must be >= 1");
  require(prices.size() > step, ErrorCode::InsufficientData, "need more prices than the return step");
  require(times.empty() || times.size() == prices.size(), ErrorCode::InvalidParameters,
          "times must match prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      std::ostringstream msg;
      msg << "price at index " << i << " is " << prices[i];
      fail(ErrorCode::NonPositivePrice, msg.str());
    }
  }
  ReturnSeries out;
  const std::size_t count = prices.size() - step;
  out.values.resize(count);
  out.timestamps.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.values[k] = std::log(prices[k + step] / prices[k]);
    out.timestamps[k] = times.empty() ? static_cast<double>(k) : times[k];
  }
  return out;
}

Family family_of(const DistributionSpec& spec) { return static_cast<Family>(spec.index()); }

std::string_view family_name(Family family) {
  switch (family) {
    case Family::normal: return "normal";
    case Family::laplace: return "laplace";
    case Family::ged: return "ged";
    case Family::hyperbolic: return "hyperbolic";
    case Family::kanji_mixture: return "kanji_mixture";
    case Family::gauss_laplace_sum: return "gauss_laplace_sum";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::normal, Family::laplace, Family::ged, Family::hyperbolic,
                   Family::kanji_mixture, Family::gauss_laplace_sum}) {
    if (family_name(f) == name) return f;
  }
  fail(ErrorCode::InvalidParameters, "unknown distribution family '" + std::string(name) + "'");
}

std::size_t parameter_count(Family family) {
  switch (family) {
    case Family::normal: return 1;
    case Family::laplace: return 1;
    case Family::ged: return 2;
    case Family::hyperbolic: return 2;
    case Family::kanji_mixture: return 3;
    case Family::gauss_laplace_sum: return 3;
  }
  return 0;
}

void validate(const DistributionSpec& spec) {
  std::visit(overloaded{
                 [](const Normal& n) { check_normal(n); },
                 [](const Laplace& l) { check_laplace(l); },
                 [](const Ged& g) {
                   require(g.lambda > 0.0 && std::isfinite(g.lambda) && g.scale > 0.0 &&
                               std::isfinite(g.scale),
                           ErrorCode::InvalidParameters, "GED requires lambda > 0 and scale > 0");
                 },
                 [](const Hyperbolic& h) {
                   require(h.lambda != 0.0 && h.lambda * h.lambda > h.chi * h.chi,
                           ErrorCode::InvalidParameters,
                           "hyperbolic requires lambda != 0 and lambda^2 > chi^2");
                   require(h.lambda > 0.0 && h.lambda < 1.0, ErrorCode::InvalidParameters,
                           "hyperbolic density is normalizable only for 0 < lambda < 1");
                 },
                 [](const KanjiMixture& k) {
                   check_theta(k.theta);
                   check_normal(k.normal);
                   check_laplace(k.laplace);
                 },
                 [](const GaussLaplaceSum& g) {
                   check_theta(g.theta);
                   check_normal(g.normal);
                   check_laplace(g.laplace);
                 },
             },
             spec);
}

double log_pdf(const DistributionSpec& spec, double r) {
  return std::visit(overloaded{
                        [r](const Normal& n) { return normal_log_pdf(n, r); },
                        [r](const Laplace& l) { return laplace_log_pdf(l, r); },
                        [r](const Ged& g) { return ged_log_pdf(g, r); },
                        [r](const Hyperbolic& h) { return hyperbolic_log_pdf(h, r); },
                        [r](const KanjiMixture& k) {
                          const double a = normal_log_pdf(k.normal, r);
                          const double b = laplace_log_pdf(k.laplace, r);
                          if (k.theta == 1.0) return a;
                          if (k.theta == 0.0) return b;
                          const double la = std::log(k.theta) + a;
                          const double lb = std::log1p(-k.theta) + b;
                          const double m = std::max(la, lb);
                          return m + std::log(std::exp(la - m) + std::exp(lb - m));
                        },
                        [r](const GaussLaplaceSum& g) { return std::log(gauss_laplace_sum_pdf(g, r)); },
                    },
                    spec);
}

double pdf(const DistributionSpec& spec, double r) {
  validate(spec);
  if (const auto* g = std::get_if<GaussLaplaceSum>(&spec)) return gauss_laplace_sum_pdf(*g, r);
  if (const auto* k = std::get_if<KanjiMixture>(&spec)) {
    return k->theta * std::exp(normal_log_pdf(k->normal, r)) +
           (1.0 - k->theta) * std::exp(laplace_log_pdf(k->laplace, r));
  }
  if (const auto* g = std::get_if<Ged>(&spec)) {
    const double x = std::abs(r / g->scale);
    const double norm = g->lambda * std::pow(2.0, -(1.0 / g->lambda + 1.0)) / std::tgamma(1.0 / g->lambda);
    return norm / g->scale * std::exp(-0.5 * std::pow(x, g->lambda));
  }
  return std::exp(log_pdf(spec, r));
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  validate(spec);
  Rng normal_stream(seed, 0);
  Rng laplace_stream(seed, 1);
  Rng aux_stream(seed, 2);
  std::vector<double> out(n);
  std::visit(overloaded{
                 [&](const Normal& p) {
                   for (double& v : out) v = p.rho + p.omega * normal_stream.normal();
                 },
                 [&](const Laplace& p) {
                   for (double& v : out) v = laplace_draw(p.q, laplace_stream);
                 },
                 [&](const Ged& p) {
                   // |x|^lambda / 2 is Gamma(1/lambda, 1) distributed.
                   for (double& v : out) {
                     const double g = aux_stream.gamma(1.0 / p.lambda);
                     const double mag = std::pow(2.0 * g, 1.0 / p.lambda);
                     v = p.scale * (aux_stream.uniform_open() < 0.5 ? -mag : mag);
                   }
                 },
                 [&](const Hyperbolic& p) {
                   const auto c = hyperbolic_constants(p);
                   auto logd = [&](double r) { return c.c2 * (p.lambda * std::sqrt(1.0 + r * r) - p.chi * r); };
                   const double alpha = -c.c2 * p.lambda, beta = -c.c2 * p.chi;
                   const double mode = beta / std::sqrt(alpha * alpha - beta * beta);
                   const double decay = std::min(alpha - beta, alpha + beta);
                   const double core = 1.0 / std::sqrt(alpha);
                   const double half_width = std::max(60.0 / decay, 40.0 * core) + std::abs(mode);
                   out = tabulated_sample(logd, mode, half_width, n, aux_stream);
                 },
                 [&](const KanjiMixture& p) {
                   for (double& v : out) {
                     v = aux_stream.bernoulli(p.theta)
                             ? p.normal.rho + p.normal.omega * normal_stream.normal()
                             : laplace_draw(p.laplace.q, laplace_stream);
                   }
                 },
                 [&](const GaussLaplaceSum& p) {
                   for (double& v : out) {
                     const double nv = p.normal.rho + p.normal.omega * normal_stream.normal();
                     const double lv = laplace_draw(p.laplace.q, laplace_stream);
                     v = p.theta * nv + (1.0 - p.theta) * lv;
                   }
                 },
             },
             spec);
  return out;
}

double ged_kurtosis(double lambda) {
  return std::exp(std::lgamma(5.0 / lambda) + std::lgamma(1.0 / lambda) - 2.0 * std::lgamma(3.0 / lambda));
}

double ged_unit_variance(double lambda) {
  return std::exp((2.0 / lambda) * std::numbers::ln2 + std::lgamma(3.0 / lambda) - std::lgamma(1.0 / lambda));
}

double log_bessel_k1(double x) {
  require(x > 0.0, ErrorCode::InvalidParameters, "K1 requires a positive argument");
  if (x < 500.0) return std::log(std::cyl_bessel_k(1.0, x));
  // Hankel expansion; the fourth term is below 1e-13 relative here.
  const double t = 1.0 / (8.0 * x);
  const double series = 1.0 + 3.0 * t - 15.0 / 2.0 * t * t + 105.0 / 2.0 * t * t * t;
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + std::log(series);
}

nlohmann::json to_json(const DistributionSpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(family_of(spec));
  std::visit(overloaded{
                 [&](const Normal& p) { j["rho"] = p.rho; j["omega"] = p.omega; },
                 [&](const Laplace& p) { j["q"] = p.q; j["sigma_r"] = std::sqrt(2.0) * p.q; },
                 [&](const Ged& p) { j["lambda"] = p.lambda; j["scale"] = p.scale; },
                 [&](const Hyperbolic& p) { j["lambda"] = p.lambda; j["chi"] = p.chi; },
                 [&](const KanjiMixture& p) {
                   j["theta"] = p.theta; j["rho"] = p.normal.rho; j["omega"] = p.normal.omega; j["q"] = p.laplace.q;
                 },
                 [&](const GaussLaplaceSum& p) {
                   j["theta"] = p.theta; j["rho"] = p.normal.rho; j["omega"] = p.normal.omega; j["q"] = p.laplace.q;
                 },
             },
             spec);
  return j;
}

DistributionSpec spec_from_json(const nlohmann::json& j) {
  try {
    const Family f = parse_family(j.at("family").get<std::string>());
    DistributionSpec spec;
    switch (f) {
      case Family::normal: spec = Normal{j.at("rho").get<double>(), j.at("omega").get<double>()}; break;
      case Family::laplace: spec = Laplace{j.at("q").get<double>()}; break;
      case Family::ged: spec = Ged{j.at("lambda").get<double>(), j.value("scale", 1.0)}; break;
      case Family::hyperbolic: spec = Hyperbolic{j.at("lambda").get<double>(), j.at("chi").get<double>()}; break;
      case Family::kanji_mixture:
        spec = KanjiMixture{j.at("theta").get<double>(), {j.at("rho").get<double>(), j.at("omega").get<double>()},
                            {j.at("q").get<double>()}};
        break;
      case Family::gauss_laplace_sum:
        spec = GaussLaplaceSum{j.at("theta").get<double>(),
                               {j.at("rho").get<double>(), j.at("omega").get<double>()},
                               {j.at("q").get<double>()}};
        break;
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidParameters, std::string("malformed distribution spec: ") + e.what());
  }
}

nlohmann::json to_json(const FitResult& fit) {
  nlohmann::json j;
  j["spec"] = to_json(fit.spec);
  j["location"] = fit.location;
  j["log_likelihood"] = fit.log_likelihood;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["skewness"] = fit.skewness;
  j["observations"] = fit.observations;
  return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
  try {
    FitResult f;
    f.spec = spec_from_json(j.at("spec"));
    f.location = j.at("location").get<double>();
    f.log_likelihood = j.at("log_likelihood").get<double>();
    f.aic = j.at("aic").get<double>();
    f.bic = j.at("bic").get<double>();
    f.iterations = j.at("iterations").get<int>();
    f.converged = j.at("converged").get<bool>();
    f.skewness = j.at("skewness").get<double>();
    f.observations = j.at("observations").get<std::size_t>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed fit result: ") + e.what());
  }
}

void write_return_csv(std::ostream& out, const ReturnSeries& series) {
  out << "timestamp,return\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    csv::write_row(out, {series.timestamps[i], series.values[i]});
  }
}

ReturnSeries read_return_csv(std::istream& in, const std::string& source_name) {
  const csv::Table t = csv::parse_table(in, source_name);
  const std::size_t ct = t.column("timestamp"), cr = t.column("return");
  ReturnSeries s;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string where = source_name + ":" + std::to_string(t.line_numbers[r]);
    s.timestamps.push_back(csv::parse_double(t.rows[r][ct], where));
    s.values.push_back(csv::parse_double(t.rows[r][cr], where));
  }
  require(!s.values.empty(), ErrorCode::EmptySeries, source_name + ": no return rows");
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ParseError, source_name + ": " + e.what());
  }
  return s;
}

}  // namespace stockvolve::returns
