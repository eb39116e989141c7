#pragma once

// Score aggregation and the interval / significance machinery over
// per-repeat mean scores.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pibench/error.hpp"
#include "pibench/numerics.hpp"

namespace pibench {

/// Raised when a two-sample test is asked to compare two identical constant
/// samples, where t is 0/0.
class DegenerateSamplesError : public Error {
 public:
  DegenerateSamplesError() : Error("degenerate: identical constant samples") {}
};

/// q x n binary outcome matrix: entry (i, j) is 1 when question i was
/// answered correctly in repeat j. Stored column-major, one column per repeat.
class ScoreMatrix {
 public:
  /// `columns[j][i]` is the score of question i in repeat j.
  ScoreMatrix(std::vector<std::string> question_ids,
              std::vector<std::vector<std::uint8_t>> columns);

  std::size_t question_count() const noexcept { return question_ids_.size(); }
  std::size_t repeat_count() const noexcept { return repeats_; }
  const std::vector<std::string>& question_ids() const noexcept { return question_ids_; }

  std::uint8_t at(std::size_t question, std::size_t repeat) const;
  std::span<const std::uint8_t> column(std::size_t repeat) const;

  /// The first `repeats` columns.
  ScoreMatrix prefix(std::size_t repeats) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::vector<std::string> question_ids_;
  std::size_t repeats_ = 0;
  std::vector<std::uint8_t> entries_;
};

/// One mean score per repeat, ordered by repeat index.
class RepeatMeans {
 public:
  RepeatMeans() = default;
  explicit RepeatMeans(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t j) const { return values_[j]; }
  const std::vector<double>& values() const noexcept { return values_; }
  RepeatMeans prefix(std::size_t n) const;

  friend bool operator==(const RepeatMeans&, const RepeatMeans&) = default;

 private:
  std::vector<double> values_;
};

struct SummaryStats {
  double mean = 0.0;
  std::optional<double> std_dev;  ///< absent for a single repeat
  double min_score = 0.0;
  double max_score = 0.0;
  std::size_t repeats = 0;

  double range() const noexcept { return max_score - min_score; }
  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

/// Bounds symmetric about `mean`. Used for both prediction intervals
/// (n_future set) and confidence intervals (n_future absent).
struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  double mean = 0.0;
  double confidence = 0.95;
  std::size_t n = 0;
  std::optional<std::size_t> n_future;

  double width() const noexcept { return upper - lower; }
  friend bool operator==(const PredictionInterval&, const PredictionInterval&) = default;
};

/// One prefix of a repeat series: the interval over the first n repeat means.
struct PiPoint {
  std::size_t n = 0;
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
  double mean = 0.0;

  friend bool operator==(const PiPoint&, const PiPoint&) = default;
};

enum class TTestVariant { welch, pooled };

std::string_view to_string(TTestVariant variant);
TTestVariant parse_t_test_variant(std::string_view text);

struct TTestResult {
  double t_statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  TTestVariant variant = TTestVariant::welch;
  double significant_at = 0.05;

  bool significant() const noexcept { return p_value < significant_at; }
};

RepeatMeans per_repeat_means(const ScoreMatrix& matrix);

double grand_mean(const RepeatMeans& means);

/// Sample standard deviation (divisor n − 1). Requires n >= 2.
double sample_std(const RepeatMeans& means);

/// x̄ ± t_{α/2, n−1} · s · sqrt(1/n + 1/n_future). Bounds are not clamped.
PredictionInterval prediction_interval(const RepeatMeans& means, Probability confidence,
                                       std::size_t n_future);

/// Same with n_future = n, the form used throughout the harness.
PredictionInterval prediction_interval(const RepeatMeans& means, Probability confidence);

/// x̄ ± t_{α/2, n−1} · s / sqrt(n).
PredictionInterval confidence_interval(const RepeatMeans& means, Probability confidence);

TTestResult two_sample_t_test(const RepeatMeans& a, const RepeatMeans& b,
                              TTestVariant variant = TTestVariant::welch,
                              Probability alpha = Probability{0.05});

SummaryStats summarize(const ScoreMatrix& matrix);
SummaryStats summarize(const RepeatMeans& means);

/// Prediction interval (n' = n) for every prefix n = 2..N of `means`.
std::vector<PiPoint> prefix_intervals(const RepeatMeans& means, Probability confidence);

}  // namespace pibench
