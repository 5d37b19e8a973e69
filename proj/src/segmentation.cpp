#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "stockvolve/analysis.hpp"
#include "stockvolve/error.hpp"

namespace stockvolve::analysis {
namespace {

// Running sums over globally centered data so that any contiguous segment's
// least-squares residual is available in constant time.
class SegmentCosts {
 public:
  SegmentCosts(std::span<const double> t, std::span<const double> y) : n_(t.size()) {
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n_);
    const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n_);
    st_.assign(n_ + 1, 0.0);
    sy_ = stt_ = sty_ = syy_ = st_;
    for (std::size_t i = 0; i < n_; ++i) {
      const double a = t[i] - tm, b = y[i] - ym;
      st_[i + 1] = st_[i] + a;
      sy_[i + 1] = sy_[i] + b;
      stt_[i + 1] = stt_[i] + a * a;
      sty_[i + 1] = sty_[i] + a * b;
      syy_[i + 1] = syy_[i] + b * b;
    }
  }

  // Residual sum of squares of the OLS line on [i, j).
  double operator()(std::size_t i, std::size_t j) const {
    const double m = static_cast<double>(j - i);
    const double st = st_[j] - st_[i], sy = sy_[j] - sy_[i];
    const double ctt = (stt_[j] - stt_[i]) - st * st / m;
    const double cty = (sty_[j] - sty_[i]) - st * sy / m;
    const double cyy = (syy_[j] - syy_[i]) - sy * sy / m;
    const double sse = ctt > 0.0 ? cyy - cty * cty / ctt : cyy;
    return sse > 0.0 ? sse : 0.0;
  }

 private:
  std::size_t n_;
  std::vector<double> st_, sy_, stt_, sty_, syy_;
};

}  // namespace

LineFit fit_line(std::span<const double> t, std::span<const double> y) {
  require(t.size() == y.size() && t.size() >= 2, ErrorCode::InvalidParameters,
          "line fit needs at least two paired observations");
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ctt = 0.0, cty = 0.0, cyy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double a = t[i] - tm, b = y[i] - ym;
    ctt += a * a;
    cty += a * b;
    cyy += b * b;
  }
  require(ctt > 0.0, ErrorCode::InvalidParameters, "line fit needs distinct times");
  LineFit fit;
  fit.slope = cty / ctt;
  fit.intercept = ym - fit.slope * tm;
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * t[i]);
    sse += r * r;
  }
  fit.sse = sse;
  fit.r_squared = cyy > 0.0 ? 1.0 - sse / cyy : 1.0;
  return fit;
}

std::vector<TrendSegment> segment_trends(std::span<const double> y, std::span<const double> t,
                                         std::size_t max_segments, double penalty,
                                         std::size_t min_length) {
  require(y.size() == t.size(), ErrorCode::InvalidParameters, "y and t differ in length");
  require(min_length >= 2, ErrorCode::InvalidParameters, "minimum segment length must be at least 2");
  require(max_segments >= 1, ErrorCode::InvalidParameters, "max_segments must be at least 1");
  require(std::isfinite(penalty) && penalty > 0.0, ErrorCode::InvalidPenalty,
          "breakpoint penalty must be positive and finite");
  const std::size_t n = y.size();
  require(n >= 2 * min_length, ErrorCode::TooShort,
          "series of length " + std::to_string(n) + " is shorter than twice the minimum segment length " +
              std::to_string(min_length));
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(y[i]) && std::isfinite(t[i]), ErrorCode::InvalidParameters,
            "segmentation input must be finite");
    if (i > 0) require(t[i - 1] < t[i], ErrorCode::InvalidParameters, "times must be strictly increasing");
  }

  const SegmentCosts cost(t, y);
  const std::size_t k_max = std::min(max_segments, n / min_length);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // best[k][j]: least total SSE covering [0, j) with k + 1 segments.
  std::vector<std::vector<double>> best(k_max, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::uint32_t>> back(k_max, std::vector<std::uint32_t>(n + 1, 0));
  for (std::size_t j = min_length; j <= n; ++j) best[0][j] = cost(0, j);
  for (std::size_t k = 1; k < k_max; ++k) {
    for (std::size_t j = (k + 1) * min_length; j <= n; ++j) {
      double b = kInf;
      std::size_t arg = 0;
      for (std::size_t i = k * min_length; i + min_length <= j; ++i) {
        const double c = best[k - 1][i] + cost(i, j);
        if (c < b) {
          b = c;
          arg = i;
        }
      }
      best[k][j] = b;
      back[k][j] = static_cast<std::uint32_t>(arg);
    }
  }

  std::size_t k_best = 0;
  double objective = best[0][n];
  for (std::size_t k = 1; k < k_max; ++k) {
    const double v = best[k][n] + penalty * static_cast<double>(k);
    if (v < objective) {
      objective = v;
      k_best = k;
    }
  }

  std::vector<std::size_t> bounds{n};
  for (std::size_t k = k_best, j = n; k > 0; --k) {
    j = back[k][j];
    bounds.push_back(j);
  }
  bounds.push_back(0);
  std::reverse(bounds.begin(), bounds.end());

  std::vector<TrendSegment> segments;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const std::size_t a = bounds[s], b = bounds[s + 1];
    const LineFit fit = fit_line(t.subspan(a, b - a), y.subspan(a, b - a));
    segments.push_back({a, b, fit.slope, fit.intercept, fit.r_squared, fit.sse});
  }
  return segments;
}

double default_penalty(std::span<const double> y) {
  require(y.size() >= 3, ErrorCode::TooShort, "default penalty needs at least three observations");
  std::vector<double> d(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = y[i + 1] - y[i];
  const double m = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double var = 0.0;
  for (double v : d) var += (v - m) * (v - m);
  var /= static_cast<double>(d.size() - 1);
  const double noise_var = var / 2.0;
  const double penalty = 2.0 * noise_var * std::log(static_cast<double>(y.size()));
  // A noiseless series still needs a cost per breakpoint above rounding noise.
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double spread = 0.0;
  for (double v : y) spread += (v - ym) * (v - ym);
  return std::max(penalty, 1e-12 * std::max(1.0, spread));
}

double segmentation_objective(std::span<const TrendSegment> segments, double penalty) {
  double total = 0.0;
  for (const auto& s : segments) total += s.sse;
  return total + penalty * static_cast<double>(segments.size() > 0 ? segments.size() - 1 : 0);
}

std::vector<double> fitted_values(std::span<const TrendSegment> segments, std::span<const double> t) {
  std::vector<double> out(t.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& s : segments) {
    require(s.end_index <= t.size(), ErrorCode::InvalidParameters, "segment exceeds the time axis");
    for (std::size_t i = s.start_index; i < s.end_index; ++i) out[i] = s.intercept + s.slope * t[i];
  }
  return out;
}

}  // namespace stockvolve::analysis
