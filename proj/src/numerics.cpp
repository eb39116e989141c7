#include "pibench/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pibench {
namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2π) / 2
constexpr double kStirlingMin = 10.0;

// Coefficients of the Stirling correction series
//   ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π] = Σ c_k / x^(2k−1),
// c_k = B_2k / (2k (2k − 1)).
constexpr std::array<double, 7> kStirling = {
    1.0 / 12.0,         -1.0 / 360.0,   1.0 / 1260.0,       -1.0 / 1680.0,
    1.0 / 1188.0,       -691.0 / 360360.0, 1.0 / 156.0,
};

// Stirling correction term for x >= kStirlingMin; below 1e-16 relative
// to the leading term at x = 10.
double stirling_correction(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double sum = 0.0;
  for (auto it = kStirling.rbegin(); it != kStirling.rend(); ++it) {
    sum = sum * inv2 + *it;
  }
  return sum * inv;
}

// ln Γ via upward recurrence into the Stirling regime. Keeps the product of
// shifted arguments bounded so it never overflows.
double ln_gamma_positive(double x) {
  if (x >= kStirlingMin) {
    return (x - 0.5) * std::log(x) - x + kHalfLog2Pi + stirling_correction(x);
  }
  double product = 1.0;
  double shifted = x;
  while (shifted < kStirlingMin) {
    product *= shifted;
    ++shifted;
  }
  return ln_gamma_positive(shifted) - std::log(product);
}

// ln Γ(a) − ln Γ(a + b) for a >= kStirlingMin, b > 0, without forming the
// two large logarithms separately.
double ln_gamma_ratio_large(double a, double b) {
  const double sum = a + b;
  return (a - 0.5) * std::log1p(-b / sum) - b * std::log(sum) + b +
         stirling_correction(a) - stirling_correction(sum);
}

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2); callers swap arguments otherwise.
double beta_continued_fraction(double x, double y, double a, double b) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIterations = 200000;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  // 1 − (a + b) x / (a + 1), rewritten through y = 1 − x so that it does
  // not cancel when x sits just below the swap point with a large.
  double d = ((1.0 - b) + qab * y) / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge for a=" +
                    std::to_string(a) + ", b=" + std::to_string(b) +
                    ", x=" + std::to_string(x));
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw DomainError("ln_gamma requires a positive finite argument, got " + std::to_string(x));
  }
  return ln_gamma_positive(x);
}

double ln_beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw DomainError("ln_beta requires positive arguments");
  }
  if (a < b) std::swap(a, b);
  // Now a >= b.
  if (b >= kStirlingMin) {
    // Both large: every Stirling piece combined analytically.
    const double sum = a + b;
    return kHalfLog2Pi + (a - 0.5) * std::log1p(-b / sum) + (b - 0.5) * std::log(b) -
           b * std::log(sum) + stirling_correction(a) + stirling_correction(b) -
           stirling_correction(sum);
  }
  if (a >= kStirlingMin) {
    return ln_gamma_positive(b) + ln_gamma_ratio_large(a, b);
  }
  return ln_gamma_positive(a) + ln_gamma_positive(b) - ln_gamma_positive(a + b);
}

double regularized_incomplete_beta(double x, double a, double b) {
  return regularized_incomplete_beta(x, 1.0 - x, a, b);
}

double regularized_incomplete_beta(double x, double y, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || std::isinf(a) || std::isinf(b)) {
    throw DomainError("incomplete beta requires finite a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw DomainError("incomplete beta requires x in [0, 1], got " + std::to_string(x));
  }
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;

  // Evaluate the fraction on whichever side converges, then reflect.
  const bool swap = x > (a + 1.0) / (a + b + 2.0);
  const double xs = swap ? y : x;
  const double ys = swap ? x : y;
  const double as = swap ? b : a;
  const double bs = swap ? a : b;

  // Near 1, log of the complement-derived value keeps the digits x loses to rounding.
  const double log_x = xs > 0.5 ? std::log1p(-ys) : std::log(xs);
  const double log_y = ys > 0.5 ? std::log1p(-xs) : std::log(ys);
  const double log_front = as * log_x + bs * log_y - ln_beta(as, bs);
  const double value = std::exp(log_front) * beta_continued_fraction(xs, ys, as, bs) / as;
  const double result = swap ? 1.0 - value : value;
  return std::clamp(result, 0.0, 1.0);
}

namespace {

// P(T > t) for t >= 0, computed directly so small tails keep full precision.
double upper_tail(double t, double nu) {
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  if (std::isinf(t2)) return 0.0;
  const double denom = nu + t2;
  // x = ν / (ν + t²), 1 − x = t² / (ν + t²)
  return 0.5 * regularized_incomplete_beta(nu / denom, t2 / denom, 0.5 * nu, 0.5);
}

}  // namespace

double student_t_pdf(double t, DegreesOfFreedom df) {
  const double nu = df.value();
  const double log_pdf =
      -0.5 * std::log(nu) - ln_beta(0.5 * nu, 0.5) - 0.5 * (nu + 1.0) * std::log1p(t * t / nu);
  return std::exp(log_pdf);
}

double student_t_cdf(double t, DegreesOfFreedom df) {
  if (std::isnan(t)) throw DomainError("student_t_cdf: t is NaN");
  const double tail = upper_tail(std::fabs(t), df.value());
  return t >= 0.0 ? 1.0 - tail : tail;
}

double two_sided_p_value(double t, DegreesOfFreedom df) {
  if (std::isnan(t)) throw DomainError("two_sided_p_value: t is NaN");
  return std::min(1.0, 2.0 * upper_tail(std::fabs(t), df.value()));
}

double student_t_quantile(Probability p, DegreesOfFreedom df) {
  const double prob = p.value();
  if (!(prob > 0.0 && prob < 1.0)) {
    throw DomainError("student_t_quantile requires 0 < p < 1");
  }
  if (prob == 0.5) return 0.0;
  // Solve in the upper half on the tail probability, then mirror.
  const bool upper = prob > 0.5;
  const double target = upper ? 1.0 - prob : prob;
  const double nu = df.value();

  // upper_tail is decreasing in t: bracket [lo, hi] with tail(lo) >= target >= tail(hi).
  double lo = 0.0;
  double hi = 1.0;
  while (upper_tail(hi, nu) > target) {
    lo = hi;
    hi *= 2.0;
    if (std::isinf(hi)) return upper ? hi : -hi;
  }

  // Newton on the tail, falling back to bisection whenever a step leaves
  // the bracket or fails to shrink it fast enough.
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double f = upper_tail(t, nu) - target;
    if (f == 0.0) return upper ? t : -t;
    if (f > 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double slope = -student_t_pdf(t, df);
    double next = slope != 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == t) break;
    t = next;
  }
  return upper ? t : -t;
}

}  // namespace pibench
