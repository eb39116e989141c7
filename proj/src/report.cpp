#include "pibench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pibench {

namespace {

// 12 significant digits: enough to round-trip every printed value.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::optional<std::size_t> PiSeries::first_n_below(double threshold) const {
  for (const auto& p : points) {
    if (p.width < threshold) return p.n;
  }
  return std::nullopt;
}

PiSeries pi_series(const RepeatMeans& means, Probability confidence) {
  if (means.size() < 2) throw ValidationError("a prediction-interval series needs n >= 2");
  return {prefix_intervals(means, confidence)};
}

PiSeries pi_series(const ScoreMatrix& matrix, Probability confidence) {
  return pi_series(per_repeat_means(matrix), confidence);
}

HistogramSpec histogram(const RepeatMeans& means, double bin_width) {
  if (!(bin_width > 0.0) || std::isinf(bin_width)) {
    throw ValidationError("histogram bin width must be positive");
  }
  if (means.empty()) throw ValidationError("histogram of an empty sample");
  const auto& v = means.values();
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  // Relative slack so that a range that is a whole number of bins in
  // decimal (0.50 .. 0.52 at 0.01) does not grow a spurious extra bin.
  constexpr double kSlack = 1e-9;
  const auto bins = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - kSlack)));

  HistogramSpec spec;
  spec.bin_width = bin_width;
  spec.bins.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) spec.bins[k].lower_edge = lo + static_cast<double>(k) * bin_width;
  for (double x : v) {
    auto k = static_cast<std::size_t>(std::floor((x - lo) / bin_width + kSlack));
    spec.bins[std::min(k, bins - 1)].count += 1;
  }
  return spec;
}

ComparisonReport compare_runs(const RunResult& a, const RunResult& b, Probability alpha,
                              TTestVariant variant) {
  ComparisonReport report;
  report.run_a = a.metadata.run_id;
  report.run_b = b.metadata.run_id;
  report.summary_a = a.summary;
  report.summary_b = b.summary;
  report.test = two_sample_t_test(a.means, b.means, variant, alpha);
  report.alpha = alpha.value();
  report.significant = report.test.p_value < report.alpha;
  return report;
}

RenderFormat parse_render_format(std::string_view text) {
  if (text == "csv") return RenderFormat::csv;
  if (text == "svg") return RenderFormat::svg;
  if (text == "text") return RenderFormat::text;
  throw ValidationError("unsupported format '" + std::string(text) + "'");
}

std::string summary_line(const SummaryStats& s) {
  std::ostringstream out;
  out << "x̄=" << fixed(s.mean, 3) << " σ=" << (s.std_dev ? fixed(*s.std_dev, 3) : "n/a")
      << " ↓=" << fixed(s.min_score, 3) << " ↑=" << fixed(s.max_score, 3) << " n=" << s.repeats
      << " range=" << fixed(s.range(), 3);
  return out.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const {
    return kLeft + (x1 == x0 ? 0.5 : (x - x0) / (x1 - x0)) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

std::string svg_open(const std::string& title) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" width=\"960\" "
         "height=\"540\" font-family=\"sans-serif\" font-size=\"14\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"#ffffff\"/>\n"
      << "<text x=\"480\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  return out.str();
}

std::string svg_axes(const Axes& a, const std::string& x_label, const std::string& y_label,
                     const std::vector<double>& x_ticks) {
  std::ostringstream out;
  const double bottom = kHeight - kBottom;
  out << "<line x1=\"" << kLeft << "\" y1=\"" << bottom << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << bottom << "\" stroke=\"#000000\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << bottom << "\" stroke=\"#000000\"/>\n";
  for (double x : x_ticks) {
    out << "<text x=\"" << fixed(a.px(x), 2) << "\" y=\"" << bottom + 20
        << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double y = a.y0 + (a.y1 - a.y0) * k / 4.0;
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fixed(a.py(y) + 5, 2)
        << "\" text-anchor=\"end\">" << fixed(y, 3) << "</text>\n";
  }
  out << "<text x=\"480\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"20\" y=\"270\" text-anchor=\"middle\" transform=\"rotate(-90 20 270)\">"
      << y_label << "</text>\n";
  return out.str();
}

std::string polyline(const Axes& a, const std::vector<std::pair<double, double>>& pts,
                     const std::string& style) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    out << (k ? " " : "") << fixed(a.px(pts[k].first), 2) << "," << fixed(a.py(pts[k].second), 2);
  }
  out << "\"/>\n";
  return out.str();
}

std::string svg_series(const PiSeries& series, double threshold) {
  if (series.points.empty()) throw ValidationError("cannot plot an empty series");
  double lo = series.points.front().lower;
  double hi = series.points.front().upper;
  for (const auto& p : series.points) {
    lo = std::min(lo, p.lower);
    hi = std::max(hi, p.upper);
  }
  if (hi - lo < 1e-9) {
    lo -= 0.01;
    hi += 0.01;
  }
  const double pad = 0.05 * (hi - lo);
  const Axes axes{static_cast<double>(series.points.front().n),
                  static_cast<double>(series.points.back().n), lo - pad, hi + pad};

  std::vector<std::pair<double, double>> lower, upper, mean;
  std::vector<double> ticks;
  for (const auto& p : series.points) {
    const auto n = static_cast<double>(p.n);
    lower.emplace_back(n, p.lower);
    upper.emplace_back(n, p.upper);
    mean.emplace_back(n, p.mean);
    ticks.push_back(n);
  }
  if (ticks.size() > 15) {
    std::vector<double> thinned;
    const std::size_t step = (ticks.size() + 14) / 15;
    for (std::size_t k = 0; k < ticks.size(); k += step) thinned.push_back(ticks[k]);
    ticks = std::move(thinned);
  }

  std::ostringstream out;
  out << svg_open("Prediction interval by repeat");
  out << svg_axes(axes, "repeats (n)", "score", ticks);
  out << polyline(axes, upper, "stroke=\"#1f77b4\" stroke-width=\"2\"");
  out << polyline(axes, lower, "stroke=\"#1f77b4\" stroke-width=\"2\"");
  out << polyline(axes, mean, "stroke=\"#000000\" stroke-width=\"1.5\" stroke-dasharray=\"4 3\"");
  if (const auto first = series.first_n_below(threshold)) {
    const double x = axes.px(static_cast<double>(*first));
    out << "<line x1=\"" << fixed(x, 2) << "\" y1=\"" << kTop << "\" x2=\"" << fixed(x, 2)
        << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"#d62728\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << fixed(x + 6, 2) << "\" y=\"" << kTop + 16
        << "\" fill=\"#d62728\">width &lt; " << num(threshold) << " at n=" << *first << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_histogram(const HistogramSpec& h) {
  std::size_t max_count = 1;
  for (const auto& b : h.bins) max_count = std::max(max_count, b.count);
  const double x0 = h.bins.front().lower_edge;
  const double x1 = h.bins.back().lower_edge + h.bin_width;
  const Axes axes{x0, x1, 0.0, static_cast<double>(max_count)};
  std::vector<double> ticks;
  for (const auto& b : h.bins) ticks.push_back(b.lower_edge);
  if (ticks.size() > 12) {
    std::vector<double> thinned;
    const std::size_t step = (ticks.size() + 11) / 12;
    for (std::size_t k = 0; k < ticks.size(); k += step) thinned.push_back(ticks[k]);
    ticks = std::move(thinned);
  }

  std::ostringstream out;
  out << svg_open("Histogram of repeat mean scores");
  out << svg_axes(axes, "mean score", "count", ticks);
  for (const auto& b : h.bins) {
    const double left = axes.px(b.lower_edge);
    const double right = axes.px(b.lower_edge + h.bin_width);
    const double top = axes.py(static_cast<double>(b.count));
    out << "<rect x=\"" << fixed(left, 2) << "\" y=\"" << fixed(top, 2) << "\" width=\""
        << fixed(std::max(0.0, right - left - 1.0), 2) << "\" height=\""
        << fixed(kHeight - kBottom - top, 2) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

// ---------------------------------------------------------------------------

std::string render(const PiSeries& series, RenderFormat format, double threshold) {
  switch (format) {
    case RenderFormat::csv: {
      std::string out = "n,lower,upper,width,mean\n";
      for (const auto& p : series.points) {
        out += std::to_string(p.n) + "," + num(p.lower) + "," + num(p.upper) + "," +
               num(p.width) + "," + num(p.mean) + "\n";
      }
      return out;
    }
    case RenderFormat::svg:
      return svg_series(series, threshold);
    case RenderFormat::text: {
      std::ostringstream out;
      for (const auto& p : series.points) {
        out << "n=" << p.n << " mean=" << fixed(p.mean, 4) << " PI=[" << fixed(p.lower, 4)
            << ", " << fixed(p.upper, 4) << "] width=" << fixed(p.width, 4) << "\n";
      }
      const auto first = series.first_n_below(threshold);
      out << "first n with width < " << num(threshold) << ": "
          << (first ? std::to_string(*first) : std::string("none")) << "\n";
      return out.str();
    }
  }
  throw ValidationError("unsupported format");
}

std::string render(const HistogramSpec& h, RenderFormat format) {
  switch (format) {
    case RenderFormat::csv: {
      std::string out = "lower_edge,count\n";
      for (const auto& b : h.bins) out += num(b.lower_edge) + "," + std::to_string(b.count) + "\n";
      return out;
    }
    case RenderFormat::svg:
      return svg_histogram(h);
    case RenderFormat::text: {
      std::ostringstream out;
      for (const auto& b : h.bins) {
        out << "[" << fixed(b.lower_edge, 3) << ", " << fixed(b.lower_edge + h.bin_width, 3)
            << ") " << std::string(b.count, '#') << " " << b.count << "\n";
      }
      return out.str();
    }
  }
  throw ValidationError("unsupported format");
}

std::string render(const ComparisonReport& r, RenderFormat format) {
  switch (format) {
    case RenderFormat::csv: {
      std::string out = "field,value\n";
      auto row = [&](const std::string& field, const std::string& value) {
        out += field + "," + value + "\n";
      };
      row("run_a", r.run_a);
      row("run_b", r.run_b);
      row("mean_a", num(r.summary_a.mean));
      row("mean_b", num(r.summary_b.mean));
      row("std_dev_a", r.summary_a.std_dev ? num(*r.summary_a.std_dev) : "");
      row("std_dev_b", r.summary_b.std_dev ? num(*r.summary_b.std_dev) : "");
      row("n_a", std::to_string(r.summary_a.repeats));
      row("n_b", std::to_string(r.summary_b.repeats));
      row("variant", std::string(to_string(r.test.variant)));
      row("t_statistic", num(r.test.t_statistic));
      row("df", num(r.test.df));
      row("p_value", num(r.test.p_value));
      row("alpha", num(r.alpha));
      row("significant", r.significant ? "true" : "false");
      return out;
    }
    case RenderFormat::text: {
      std::ostringstream out;
      out << "run A (" << r.run_a << "): " << summary_line(r.summary_a) << "\n";
      out << "run B (" << r.run_b << "): " << summary_line(r.summary_b) << "\n";
      out << to_string(r.test.variant) << " t-test: t=" << fixed(r.test.t_statistic, 4)
          << " df=" << fixed(r.test.df, 2) << " p=" << fixed(r.test.p_value, 4) << "\n";
      out << "verdict at alpha=" << num(r.alpha) << ": "
          << (r.significant ? "significantly different" : "not significantly different") << "\n";
      return out.str();
    }
    case RenderFormat::svg:
      break;
  }
  throw ValidationError("unsupported format 'svg' for a comparison report");
}

std::string render(const RunResult& run, RenderFormat format, double threshold) {
  switch (format) {
    case RenderFormat::csv: {
      std::string out = "field,value\n";
      const auto& s = run.summary;
      out += "run_id," + run.metadata.run_id + "\n";
      out += "mean," + num(s.mean) + "\n";
      out += "std_dev," + (s.std_dev ? num(*s.std_dev) : std::string()) + "\n";
      out += "min," + num(s.min_score) + "\n";
      out += "max," + num(s.max_score) + "\n";
      out += "range," + num(s.range()) + "\n";
      out += "repeats," + std::to_string(s.repeats) + "\n";
      if (run.interval) {
        out += "pi_lower," + num(run.interval->lower) + "\n";
        out += "pi_upper," + num(run.interval->upper) + "\n";
        out += "pi_width," + num(run.interval->width()) + "\n";
      }
      out += "stop_reason," + std::string(to_string(run.stop_reason)) + "\n";
      return out;
    }
    case RenderFormat::svg:
      if (run.trace.empty()) throw ValidationError("run has fewer than 2 repeats; nothing to plot");
      return svg_series(PiSeries{run.trace}, threshold);
    case RenderFormat::text: {
      std::ostringstream out;
      out << run.metadata.run_id << ": " << summary_line(run.summary) << "\n";
      if (run.interval) {
        const auto& pi = *run.interval;
        out << "prediction interval (" << fixed(100.0 * pi.confidence, 0) << "%, n'=n): "
            << fixed(pi.mean, 4) << " ± " << fixed(pi.width() / 2.0, 4) << " ["
            << fixed(pi.lower, 4) << ", " << fixed(pi.upper, 4) << "] width=" << fixed(pi.width(), 4)
            << "\n";
      }
      out << "stop reason: " << to_string(run.stop_reason) << "\n";
      return out.str();
    }
  }
  throw ValidationError("unsupported format");
}

PiSeries parse_pi_series_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "n,lower,upper,width,mean") {
    throw ParseError(1, "expected header n,lower,upper,width,mean");
  }
  PiSeries series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    PiPoint p;
    char comma[4];
    std::istringstream row(line);
    if (!(row >> p.n >> comma[0] >> p.lower >> comma[1] >> p.upper >> comma[2] >> p.width >>
          comma[3] >> p.mean)) {
      throw ParseError(line_no, "malformed pi_series row");
    }
    series.points.push_back(p);
  }
  return series;
}

}  // namespace pibench
