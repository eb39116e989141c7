"""Prediction-interval statistics for repeated LLM benchmark runs."""

from ._pibench import (
    DegenerateSamplesError,
    DomainError,
    ParseError,
    ProviderError,
    ValidationError,
    analyze_run,
    confidence_interval,
    ln_gamma,
    pi_series,
    prediction_interval,
    regularized_incomplete_beta,
    simulate,
    student_t_cdf,
    student_t_quantile,
    two_sample_t_test,
    two_sided_p_value,
)

__all__ = [
    "DegenerateSamplesError",
    "DomainError",
    "ParseError",
    "ProviderError",
    "ValidationError",
    "analyze_run",
    "confidence_interval",
    "ln_gamma",
    "pi_series",
    "prediction_interval",
    "regularized_incomplete_beta",
    "simulate",
    "student_t_cdf",
    "student_t_quantile",
    "two_sample_t_test",
    "two_sided_p_value",
]
