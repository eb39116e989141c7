#pragma once

// Special functions behind Student-t probabilities and quantiles.
//
// Accuracy contract (verified in tests/numerics_test.cpp):
//   ln_gamma                    max(1e-10 absolute, 1e-14 relative) on [0.5, 1e6]
//   regularized_incomplete_beta 1e-10 absolute
//   student_t_quantile          solved to a few ulp in t, far inside 1e-8 in probability
//
// Everything here is a pure function; safe to call concurrently.

#include <cmath>

#include "pibench/error.hpp"

namespace pibench {

/// A probability in [0, 1].
class Probability {
 public:
  explicit Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw DomainError("probability must lie in [0, 1], got " + std::to_string(value));
    }
  }

  double value() const noexcept { return value_; }
  friend bool operator==(Probability, Probability) = default;

 private:
  double value_;
};

/// Degrees of freedom of a Student-t distribution. Fractional values are
/// allowed (Welch-Satterthwaite produces them).
class DegreesOfFreedom {
 public:
  explicit DegreesOfFreedom(double value) : value_(value) {
    if (!(value > 0.0) || std::isinf(value)) {
      throw DomainError("degrees of freedom must be positive and finite, got " +
                        std::to_string(value));
    }
  }

  double value() const noexcept { return value_; }
  friend bool operator==(DegreesOfFreedom, DegreesOfFreedom) = default;

 private:
  double value_;
};

/// ln Γ(x) for x > 0.
double ln_gamma(double x);

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b), evaluated without the
/// cancellation that the naive sum suffers when a or b is large.
double ln_beta(double a, double b);

/// I_x(a, b), the regularized incomplete beta function.
double regularized_incomplete_beta(double x, double a, double b);

/// Same as above with the complement y = 1 − x supplied by the caller, for
/// callers that can form 1 − x more accurately than the subtraction would.
double regularized_incomplete_beta(double x, double y, double a, double b);

double student_t_pdf(double t, DegreesOfFreedom df);

/// P(T <= t).
double student_t_cdf(double t, DegreesOfFreedom df);

/// t such that P(T <= t) = p, for 0 < p < 1.
double student_t_quantile(Probability p, DegreesOfFreedom df);

/// 2 · P(T > |t|).
double two_sided_p_value(double t, DegreesOfFreedom df);

}  // namespace pibench
