#pragma once

// Analyses over stored runs: interval-by-repeat series, histograms of
// repeat means, cross-run significance tests, and their CSV / SVG / text
// renderings. All output is deterministic (no timestamps).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pibench/runner.hpp"
#include "pibench/stats.hpp"

namespace pibench {

struct PiSeries {
  std::vector<PiPoint> points;  ///< n = 2..N, strictly increasing

  /// Smallest n whose interval width is below `threshold`.
  std::optional<std::size_t> first_n_below(double threshold) const;
};

/// Interval over each prefix of the repeats, in repeat-index order.
PiSeries pi_series(const ScoreMatrix& matrix, Probability confidence);
PiSeries pi_series(const RepeatMeans& means, Probability confidence);

struct HistogramBin {
  double lower_edge = 0.0;
  std::size_t count = 0;
};

struct HistogramSpec {
  double bin_width = 0.01;
  std::vector<HistogramBin> bins;
};

/// Uniform bins starting at the smallest mean and covering the largest.
/// Bins are half-open except the last, which is closed.
HistogramSpec histogram(const RepeatMeans& means, double bin_width = 0.01);

struct ComparisonReport {
  std::string run_a;
  std::string run_b;
  SummaryStats summary_a;
  SummaryStats summary_b;
  TTestResult test;
  double alpha = 0.05;
  bool significant = false;
};

ComparisonReport compare_runs(const RunResult& a, const RunResult& b, Probability alpha,
                              TTestVariant variant = TTestVariant::welch);

enum class RenderFormat { csv, svg, text };

/// Throws ValidationError naming the format for anything else.
RenderFormat parse_render_format(std::string_view text);

/// "x̄=0.570 σ=0.020 ↓=0.550 ↑=0.590 n=3 range=0.040"
std::string summary_line(const SummaryStats& summary);

std::string render(const PiSeries& series, RenderFormat format, double threshold = 0.01);
std::string render(const HistogramSpec& histogram, RenderFormat format);
std::string render(const ComparisonReport& report, RenderFormat format);
std::string render(const RunResult& run, RenderFormat format, double threshold = 0.01);

/// Reads the pi_series CSV schema back (n,lower,upper,width,mean).
PiSeries parse_pi_series_csv(std::string_view csv);

}  // namespace pibench
