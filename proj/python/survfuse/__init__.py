"""Survival modelling from fused radiology-report and radiomics features."""

from ._core import (
    ConvergenceError,
    SingularHessianError,
    ValidationError,
    clean_report,
    concordance_index,
    cox_npll,
    cox_npll_gradient,
    evaluate,
    fit_linear_cox,
    kaplan_meier,
    log_rank,
    process_report,
    simulate,
    train,
)

__all__ = [
    "ConvergenceError",
    "SingularHessianError",
    "ValidationError",
    "clean_report",
    "concordance_index",
    "cox_npll",
    "cox_npll_gradient",
    "evaluate",
    "fit_linear_cox",
    "kaplan_meier",
    "log_rank",
    "process_report",
    "simulate",
    "train",
]
