#pragma once

// Empirical trend pipeline: dated price series, alignment against an index,
// relative prices, the semi-log (Fisher-Pry) transform and penalized
// piecewise-linear segmentation of the transformed series.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stockvolve/returns.hpp"

namespace stockvolve::analysis {

using Date = std::chrono::sys_days;

// Strict YYYY-MM-DD. Throws ParseError mentioning `where`.
Date parse_iso_date(std::string_view text, const std::string& where);
std::string format_iso_date(Date date);

struct PriceSeries {
  std::vector<Date> dates;     // strictly increasing
  std::vector<double> prices;  // > 0
  std::string label;
  std::size_t dropped_rows = 0;  // rows skipped at load for missing or non-positive prices

  std::size_t size() const { return prices.size(); }
  void validate() const;
};

// Rows whose price is empty, "null", non-numeric placeholders or <= 0 are
// dropped and counted; the rest are sorted by date. Throws IoError,
// ParseError (with line number) on bad dates or duplicate dates, and
// EmptySeries when nothing is left.
PriceSeries load_price_csv(const std::filesystem::path& path, std::string_view date_column = "Date",
                           std::string_view price_column = "Adj Close", std::string label = {});
PriceSeries parse_price_csv(std::istream& in, const std::string& source_name,
                            std::string_view date_column, std::string_view price_column,
                            std::string label = {});

struct AlignedPair {
  PriceSeries stock;
  PriceSeries index;
};

// Inner join on exact dates. Throws NoOverlap.
AlignedPair align(const PriceSeries& stock, const PriceSeries& index);

// w(t) = stock / index on identical date sets (InvalidParameters otherwise).
std::vector<double> relative_price(const PriceSeries& stock, const PriceSeries& index);

// Elementwise ln(w). Throws NonPositiveValue.
std::vector<double> fisher_pry_transform(std::span<const double> w);

constexpr double kDaysPerYear = 365.25;

// Elapsed years since dates.front().
std::vector<double> years_since_start(std::span<const Date> dates);

struct TrendSegment {
  std::size_t start_index = 0;  // first observation
  std::size_t end_index = 0;    // one past the last observation
  double slope = 0.0;           // per year
  double intercept = 0.0;       // value of the fitted line at t = 0
  double r_squared = 0.0;
  double sse = 0.0;             // residual sum of squares

  std::size_t length() const { return end_index - start_index; }
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double sse = 0.0;
};

// Ordinary least squares of y on t.
LineFit fit_line(std::span<const double> t, std::span<const double> y);

constexpr std::size_t kDefaultMinSegmentLength = 60;

// Exact minimizer of sum(segment SSE) + penalty * (segments - 1) over all
// partitions into at most max_segments contiguous pieces of at least
// min_length observations. Throws TooShort when y.size() < 2 * min_length,
// InvalidPenalty when penalty <= 0 or is not finite.
std::vector<TrendSegment> segment_trends(std::span<const double> y, std::span<const double> t,
                                         std::size_t max_segments, double penalty,
                                         std::size_t min_length = kDefaultMinSegmentLength);

// 2 s^2 ln(n) with s^2 = var(diff(y)) / 2.
double default_penalty(std::span<const double> y);

double segmentation_objective(std::span<const TrendSegment> segments, double penalty);

enum class TrendClass { advantage, disadvantage, neutral };
std::string_view to_string(TrendClass c);
TrendClass classify(double slope, double neutral_threshold);

constexpr double kDefaultNeutralThreshold = 0.02;  // per year

struct TrendReport {
  std::string stock_label;
  std::string index_label;
  std::vector<TrendSegment> segments;
  std::vector<TrendClass> classes;
  std::vector<std::string> start_dates;  // empty strings when no dates are attached
  std::vector<std::string> end_dates;
  double neutral_threshold = kDefaultNeutralThreshold;
  double penalty = 0.0;
};

// `dates`, when nonempty, must have one entry per observation.
TrendReport trend_report(std::span<const TrendSegment> segments, std::string stock_label,
                         std::string index_label, std::span<const Date> dates = {},
                         double neutral_threshold = kDefaultNeutralThreshold);

// "advantage, Δf=+0.30/yr"
std::string describe(const TrendSegment& segment, TrendClass c);
std::string to_text(const TrendReport& report);
nlohmann::json to_json(const TrendReport& report);
TrendReport report_from_json(const nlohmann::json& j);

// Fitted segment line evaluated at every observation.
std::vector<double> fitted_values(std::span<const TrendSegment> segments, std::span<const double> t);

// CSV `t,ln_w,fitted`.
void write_plot_csv(std::ostream& out, std::span<const double> t, std::span<const double> y,
                    std::span<const double> fitted);

// Static line chart of y and the fitted overlay against t.
void write_svg(std::ostream& out, std::span<const double> t, std::span<const double> y,
               std::span<const double> fitted, const std::string& title);

struct DateRange {
  Date first;
  Date last;  // inclusive
};

// Log returns between consecutive observations, omitting every return whose
// start or end date falls inside an excluded range. Timestamps are days
// since 1970-01-01.
returns::ReturnSeries masked_log_returns(const PriceSeries& series,
                                         std::span<const DateRange> excluded);

}  // namespace stockvolve::analysis
