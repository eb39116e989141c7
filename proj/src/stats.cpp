#include "pibench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pibench {

ScoreMatrix::ScoreMatrix(std::vector<std::string> question_ids,
                         std::vector<std::vector<std::uint8_t>> columns)
    : question_ids_(std::move(question_ids)), repeats_(columns.size()) {
  if (question_ids_.empty()) throw ValidationError("score matrix needs at least one question");
  if (columns.empty()) throw ValidationError("score matrix needs at least one repeat");
  const std::size_t q = question_ids_.size();
  entries_.reserve(q * repeats_);
  for (std::size_t j = 0; j < repeats_; ++j) {
    if (columns[j].size() != q) {
      throw ValidationError("repeat " + std::to_string(j + 1) + " has " +
                            std::to_string(columns[j].size()) + " scores, expected " +
                            std::to_string(q));
    }
    for (std::uint8_t v : columns[j]) {
      if (v > 1) throw ValidationError("score matrix entries must be 0 or 1");
      entries_.push_back(v);
    }
  }
}

std::uint8_t ScoreMatrix::at(std::size_t question, std::size_t repeat) const {
  if (question >= question_count() || repeat >= repeats_) {
    throw std::out_of_range("score matrix index out of range");
  }
  return entries_[repeat * question_count() + question];
}

std::span<const std::uint8_t> ScoreMatrix::column(std::size_t repeat) const {
  if (repeat >= repeats_) throw std::out_of_range("score matrix repeat out of range");
  return {entries_.data() + repeat * question_count(), question_count()};
}

ScoreMatrix ScoreMatrix::prefix(std::size_t repeats) const {
  if (repeats == 0 || repeats > repeats_) throw std::out_of_range("invalid score matrix prefix");
  std::vector<std::vector<std::uint8_t>> columns;
  columns.reserve(repeats);
  for (std::size_t j = 0; j < repeats; ++j) {
    auto col = column(j);
    columns.emplace_back(col.begin(), col.end());
  }
  return ScoreMatrix(question_ids_, std::move(columns));
}

RepeatMeans::RepeatMeans(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("repeat means must lie in [0, 1], got " + std::to_string(v));
    }
  }
}

RepeatMeans RepeatMeans::prefix(std::size_t n) const {
  if (n > values_.size()) throw std::out_of_range("repeat means prefix longer than sample");
  return RepeatMeans(std::vector<double>(values_.begin(), values_.begin() + n));
}

std::string_view to_string(TTestVariant variant) {
  return variant == TTestVariant::welch ? "welch" : "pooled";
}

TTestVariant parse_t_test_variant(std::string_view text) {
  if (text == "welch") return TTestVariant::welch;
  if (text == "pooled") return TTestVariant::pooled;
  throw ValidationError("unknown t-test variant '" + std::string(text) + "'");
}

RepeatMeans per_repeat_means(const ScoreMatrix& matrix) {
  const double q = static_cast<double>(matrix.question_count());
  std::vector<double> values;
  values.reserve(matrix.repeat_count());
  for (std::size_t j = 0; j < matrix.repeat_count(); ++j) {
    auto col = matrix.column(j);
    const auto correct = std::accumulate(col.begin(), col.end(), std::size_t{0});
    values.push_back(static_cast<double>(correct) / q);
  }
  return RepeatMeans(std::move(values));
}

double grand_mean(const RepeatMeans& means) {
  if (means.empty()) throw ValidationError("mean of an empty sample is undefined");
  const auto& v = means.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  // Exact for constant samples, and never outside [min, max] from rounding.
  if (*lo == *hi) return *lo;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return std::clamp(mean, *lo, *hi);
}

double sample_std(const RepeatMeans& means) {
  if (means.size() < 2) {
    throw ValidationError("sample standard deviation needs at least 2 repeats");
  }
  const double mean = grand_mean(means);
  const auto& v = means.values();
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(means.size() - 1));
}

namespace {

double critical_value(Probability confidence, std::size_t n) {
  const double c = confidence.value();
  if (!(c > 0.0 && c < 1.0)) throw DomainError("confidence must lie strictly in (0, 1)");
  return student_t_quantile(Probability{(1.0 + c) / 2.0},
                            DegreesOfFreedom{static_cast<double>(n - 1)});
}

}  // namespace

PredictionInterval prediction_interval(const RepeatMeans& means, Probability confidence,
                                       std::size_t n_future) {
  if (means.size() < 2) throw ValidationError("prediction interval needs at least 2 repeats");
  if (n_future < 1) throw ValidationError("n_future must be at least 1");
  const std::size_t n = means.size();
  const double mean = grand_mean(means);
  const double s = sample_std(means);
  const double t = critical_value(confidence, n);
  const double margin =
      t * s * std::sqrt(1.0 / static_cast<double>(n) + 1.0 / static_cast<double>(n_future));
  return {mean - margin, mean + margin, mean, confidence.value(), n, n_future};
}

PredictionInterval prediction_interval(const RepeatMeans& means, Probability confidence) {
  return prediction_interval(means, confidence, means.size());
}

PredictionInterval confidence_interval(const RepeatMeans& means, Probability confidence) {
  if (means.size() < 2) throw ValidationError("confidence interval needs at least 2 repeats");
  const std::size_t n = means.size();
  const double mean = grand_mean(means);
  const double s = sample_std(means);
  const double margin = critical_value(confidence, n) * s / std::sqrt(static_cast<double>(n));
  return {mean - margin, mean + margin, mean, confidence.value(), n, std::nullopt};
}

TTestResult two_sample_t_test(const RepeatMeans& a, const RepeatMeans& b, TTestVariant variant,
                              Probability alpha) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("two-sample t-test needs at least 2 repeats in each sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double mean_a = grand_mean(a);
  const double mean_b = grand_mean(b);
  const double var_a = std::pow(sample_std(a), 2);
  const double var_b = std::pow(sample_std(b), 2);
  const double diff = mean_a - mean_b;

  double se = 0.0;
  double df = 0.0;
  if (variant == TTestVariant::welch) {
    const double va = var_a / na;
    const double vb = var_b / nb;
    se = std::sqrt(va + vb);
    df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  } else {
    df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / df;
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  }

  TTestResult result;
  result.variant = variant;
  result.significant_at = alpha.value();
  if (se == 0.0) {
    if (diff == 0.0) throw DegenerateSamplesError();
    // Two constant samples with different means: separation is certain.
    result.t_statistic = std::copysign(std::numeric_limits<double>::infinity(), diff);
    result.df = variant == TTestVariant::welch ? na + nb - 2.0 : df;
    result.p_value = 0.0;
    return result;
  }
  result.t_statistic = diff / se;
  result.df = df;
  result.p_value = two_sided_p_value(result.t_statistic, DegreesOfFreedom{df});
  return result;
}

SummaryStats summarize(const RepeatMeans& means) {
  if (means.empty()) throw ValidationError("cannot summarize an empty sample");
  const auto& v = means.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  SummaryStats s;
  s.mean = grand_mean(means);
  s.min_score = *lo;
  s.max_score = *hi;
  s.repeats = v.size();
  if (v.size() >= 2) s.std_dev = sample_std(means);
  return s;
}

SummaryStats summarize(const ScoreMatrix& matrix) {
  return summarize(per_repeat_means(matrix));
}

std::vector<PiPoint> prefix_intervals(const RepeatMeans& means, Probability confidence) {
  std::vector<PiPoint> points;
  for (std::size_t n = 2; n <= means.size(); ++n) {
    const auto pi = prediction_interval(means.prefix(n), confidence);
    points.push_back({n, pi.lower, pi.upper, pi.width(), pi.mean});
  }
  return points;
}

}  // namespace pibench
