#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "stockvolve/analysis.hpp"
#include "stockvolve/csv.hpp"
#include "stockvolve/error.hpp"

namespace stockvolve::analysis {
namespace {

bool is_missing(std::string_view field) {
  if (field.empty()) return true;
  std::string lower(field);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "null" || lower == "nan" || lower == "na" || lower == "n/a" || lower == "." ||
         lower == "-";
}

}  // namespace

Date parse_iso_date(std::string_view text, const std::string& where) {
  const bool shape = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                     std::all_of(text.begin(), text.end(), [](char c) {
                       return c == '-' || std::isdigit(static_cast<unsigned char>(c));
                     });
  require(shape, ErrorCode::ParseError, where + ": expected YYYY-MM-DD, got '" + std::string(text) + "'");
  const int y = std::stoi(std::string(text.substr(0, 4)));
  const unsigned m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
  const unsigned d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  require(ymd.ok(), ErrorCode::ParseError, where + ": invalid calendar date '" + std::string(text) + "'");
  return Date{ymd};
}

std::string format_iso_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

void PriceSeries::validate() const {
  require(dates.size() == prices.size(), ErrorCode::InvalidParameters,
          "price series dates and prices differ in length");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    require(prices[i] > 0.0 && std::isfinite(prices[i]), ErrorCode::NonPositivePrice,
            "price series '" + label + "' has a non-positive price on " + format_iso_date(dates[i]));
    if (i > 0) {
      require(dates[i - 1] < dates[i], ErrorCode::InvalidParameters,
              "price series '" + label + "' dates are not strictly increasing");
    }
  }
}

PriceSeries parse_price_csv(std::istream& in, const std::string& source_name,
                            std::string_view date_column, std::string_view price_column,
                            std::string label) {
  const csv::Table table = csv::parse_table(in, source_name);
  const std::size_t dc = table.column(date_column);
  const std::size_t pc = table.column(price_column);

  std::vector<std::pair<Date, double>> rows;
  PriceSeries out;
  out.label = label.empty() ? source_name : std::move(label);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = source_name + ":" + std::to_string(table.line_numbers[r]);
    require(row.size() == table.header.size(), ErrorCode::ParseError,
            where + ": expected " + std::to_string(table.header.size()) + " fields, got " +
                std::to_string(row.size()));
    const Date date = parse_iso_date(row[dc], where);
    if (is_missing(row[pc])) {
      ++out.dropped_rows;
      continue;
    }
    const double price = csv::parse_double(row[pc], where);
    if (!(price > 0.0)) {
      ++out.dropped_rows;
      continue;
    }
    rows.emplace_back(date, price);
  }
  require(!rows.empty(), ErrorCode::EmptySeries, source_name + ": no usable price rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    require(rows[i - 1].first != rows[i].first, ErrorCode::ParseError,
            source_name + ": duplicate date " + format_iso_date(rows[i].first));
  }
  out.dates.reserve(rows.size());
  out.prices.reserve(rows.size());
  for (const auto& [d, p] : rows) {
    out.dates.push_back(d);
    out.prices.push_back(p);
  }
  return out;
}

PriceSeries load_price_csv(const std::filesystem::path& path, std::string_view date_column,
                           std::string_view price_column, std::string label) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return parse_price_csv(in, path.string(), date_column, price_column, std::move(label));
}

AlignedPair align(const PriceSeries& stock, const PriceSeries& index) {
  AlignedPair out;
  out.stock.label = stock.label;
  out.index.label = index.label;
  std::size_t i = 0, j = 0;
  while (i < stock.size() && j < index.size()) {
    if (stock.dates[i] < index.dates[j]) {
      ++i;
    } else if (index.dates[j] < stock.dates[i]) {
      ++j;
    } else {
      out.stock.dates.push_back(stock.dates[i]);
      out.stock.prices.push_back(stock.prices[i]);
      out.index.dates.push_back(index.dates[j]);
      out.index.prices.push_back(index.prices[j]);
      ++i;
      ++j;
    }
  }
  require(!out.stock.dates.empty(), ErrorCode::NoOverlap,
          "series '" + stock.label + "' and '" + index.label + "' share no dates");
  return out;
}

std::vector<double> relative_price(const PriceSeries& stock, const PriceSeries& index) {
  require(stock.dates == index.dates, ErrorCode::InvalidParameters,
          "relative_price needs aligned series; call align() first");
  stock.validate();
  index.validate();
  std::vector<double> w(stock.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = stock.prices[i] / index.prices[i];
  return w;
}

std::vector<double> fisher_pry_transform(std::span<const double> w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    require(w[i] > 0.0 && std::isfinite(w[i]), ErrorCode::NonPositiveValue,
            "relative price at index " + std::to_string(i) + " is not positive");
    out[i] = std::log(w[i]);
  }
  return out;
}

std::vector<double> years_since_start(std::span<const Date> dates) {
  std::vector<double> t(dates.size());
  for (std::size_t i = 0; i < dates.size(); ++i) {
    t[i] = static_cast<double>((dates[i] - dates.front()).count()) / kDaysPerYear;
  }
  return t;
}

returns::ReturnSeries masked_log_returns(const PriceSeries& series,
                                         std::span<const DateRange> excluded) {
  series.validate();
  auto inside = [&](Date d) {
    return std::any_of(excluded.begin(), excluded.end(),
                       [d](const DateRange& r) { return r.first <= d && d <= r.last; });
  };
  returns::ReturnSeries out;
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    if (inside(series.dates[k]) || inside(series.dates[k + 1])) continue;
    out.timestamps.push_back(static_cast<double>(series.dates[k].time_since_epoch().count()));
    out.values.push_back(std::log(series.prices[k + 1] / series.prices[k]));
  }
  return out;
}

}  // namespace stockvolve::analysis
