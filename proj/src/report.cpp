#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "stockvolve/analysis.hpp"
#include "stockvolve/csv.hpp"
#include "stockvolve/error.hpp"

namespace stockvolve::analysis {

std::string_view to_string(TrendClass c) {
  switch (c) {
    case TrendClass::advantage: return "advantage";
    case TrendClass::disadvantage: return "disadvantage";
    case TrendClass::neutral: return "neutral";
  }
  return "neutral";
}

TrendClass classify(double slope, double neutral_threshold) {
  if (std::abs(slope) < neutral_threshold) return TrendClass::neutral;
  return slope > 0.0 ? TrendClass::advantage : TrendClass::disadvantage;
}

TrendReport trend_report(std::span<const TrendSegment> segments, std::string stock_label,
                         std::string index_label, std::span<const Date> dates,
                         double neutral_threshold) {
  require(neutral_threshold >= 0.0, ErrorCode::InvalidParameters, "neutral threshold must be >= 0");
  TrendReport r;
  r.stock_label = std::move(stock_label);
  r.index_label = std::move(index_label);
  r.neutral_threshold = neutral_threshold;
  r.segments.assign(segments.begin(), segments.end());
  for (const auto& s : segments) {
    require(s.start_index < s.end_index, ErrorCode::InvalidParameters, "segment is empty");
    r.classes.push_back(classify(s.slope, neutral_threshold));
    if (dates.empty()) {
      r.start_dates.emplace_back();
      r.end_dates.emplace_back();
    } else {
      require(s.end_index <= dates.size(), ErrorCode::InvalidParameters, "segment exceeds the dates");
      r.start_dates.push_back(format_iso_date(dates[s.start_index]));
      r.end_dates.push_back(format_iso_date(dates[s.end_index - 1]));
    }
  }
  return r;
}

std::string describe(const TrendSegment& segment, TrendClass c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, ", Δf=%+.2f/yr", segment.slope);
  return std::string(to_string(c)) + buf;
}

std::string to_text(const TrendReport& report) {
  std::ostringstream out;
  out << report.stock_label << " relative to " << report.index_label << ": "
      << report.segments.size() << (report.segments.size() == 1 ? " segment\n" : " segments\n");
  for (std::size_t i = 0; i < report.segments.size(); ++i) {
    const auto& s = report.segments[i];
    out << "  [" << s.start_index << ", " << s.end_index << ")";
    if (!report.start_dates[i].empty()) out << " " << report.start_dates[i] << " .. " << report.end_dates[i];
    char r2[32];
    std::snprintf(r2, sizeof r2, "%.3f", s.r_squared);
    out << "  " << describe(s, report.classes[i]) << "  R2=" << r2 << "\n";
  }
  return out.str();
}

nlohmann::json to_json(const TrendReport& report) {
  nlohmann::json segs = nlohmann::json::array();
  for (std::size_t i = 0; i < report.segments.size(); ++i) {
    const auto& s = report.segments[i];
    segs.push_back({{"start_index", s.start_index},
                    {"end_index", s.end_index},
                    {"start_date", report.start_dates[i]},
                    {"end_date", report.end_dates[i]},
                    {"slope_per_year", s.slope},
                    {"intercept", s.intercept},
                    {"r_squared", s.r_squared},
                    {"sse", s.sse},
                    {"classification", to_string(report.classes[i])},
                    {"summary", describe(s, report.classes[i])}});
  }
  return {{"stock", report.stock_label},
          {"index", report.index_label},
          {"neutral_threshold", report.neutral_threshold},
          {"penalty", report.penalty},
          {"segments", segs}};
}

TrendReport report_from_json(const nlohmann::json& j) {
  try {
    TrendReport r;
    r.stock_label = j.at("stock").get<std::string>();
    r.index_label = j.at("index").get<std::string>();
    r.neutral_threshold = j.at("neutral_threshold").get<double>();
    r.penalty = j.at("penalty").get<double>();
    for (const auto& s : j.at("segments")) {
      TrendSegment seg;
      seg.start_index = s.at("start_index").get<std::size_t>();
      seg.end_index = s.at("end_index").get<std::size_t>();
      seg.slope = s.at("slope_per_year").get<double>();
      seg.intercept = s.at("intercept").get<double>();
      seg.r_squared = s.at("r_squared").get<double>();
      seg.sse = s.at("sse").get<double>();
      r.segments.push_back(seg);
      r.start_dates.push_back(s.at("start_date").get<std::string>());
      r.end_dates.push_back(s.at("end_date").get<std::string>());
      const auto cls = s.at("classification").get<std::string>();
      if (cls == "advantage") {
        r.classes.push_back(TrendClass::advantage);
      } else if (cls == "disadvantage") {
        r.classes.push_back(TrendClass::disadvantage);
      } else if (cls == "neutral") {
        r.classes.push_back(TrendClass::neutral);
      } else {
        fail(ErrorCode::ParseError, "unknown trend classification '" + cls + "'");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed trend report: ") + e.what());
  }
}

void write_plot_csv(std::ostream& out, std::span<const double> t, std::span<const double> y,
                    std::span<const double> fitted) {
  require(t.size() == y.size() && t.size() == fitted.size(), ErrorCode::InvalidParameters,
          "plot columns differ in length");
  out << "t,ln_w,fitted\n";
  for (std::size_t i = 0; i < t.size(); ++i) csv::write_row(out, {t[i], y[i], fitted[i]});
}

void write_svg(std::ostream& out, std::span<const double> t, std::span<const double> y,
               std::span<const double> fitted, const std::string& title) {
  require(t.size() == y.size() && t.size() == fitted.size() && !t.empty(),
          ErrorCode::InvalidParameters, "plot columns must be nonempty and equal in length");
  constexpr double W = 800, H = 420, L = 60, R = 20, T = 40, B = 40;
  const auto [tmin, tmax] = std::minmax_element(t.begin(), t.end());
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (double v : {y[i], fitted[i]}) {
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double tspan = *tmax > *tmin ? *tmax - *tmin : 1.0;
  auto px = [&](double v) { return L + (v - *tmin) / tspan * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  auto polyline = [&](std::span<const double> v, const char* colour, double width) {
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << width << "\" points=\"";
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(t[i]), py(v[i]));
      out << buf;
    }
    out << "\"/>\n";
  };

  std::string escaped;
  for (char c : title) {
    if (c == '<') escaped += "&lt;";
    else if (c == '>') escaped += "&gt;";
    else if (c == '&') escaped += "&amp;";
    else escaped += c;
  }
  char buf[160];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
      << escaped << "</text>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B, W - R, H - B);
  out << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L, H - B);
  out << buf;
  for (int k = 0; k <= 4; ++k) {
    const double v = ymin + (ymax - ymin) * k / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">%.3g</text>\n",
                  L - 6, py(v) + 4, v);
    out << buf;
    const double tv = *tmin + tspan * k / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">%.3g</text>\n",
                  px(tv), H - B + 16, tv);
    out << buf;
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 6
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">years</text>\n";
  out << "<text x=\"14\" y=\"" << H / 2 << "\" transform=\"rotate(-90 14 " << H / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">ln w</text>\n";
  polyline(y, "#4a6fa5", 1.0);
  polyline(fitted, "#c0392b", 2.0);
  out << "</svg>\n";
}

}  // namespace stockvolve::analysis
