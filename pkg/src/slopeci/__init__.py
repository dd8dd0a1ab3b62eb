"""Nonparametric confidence intervals for the slope of a straight-line regression.

Provides Theil's interval from Kendall's K, the a-la-Tukey interval over Walsh
averages of pairwise slopes (shown by simulation and by an exact n=5
computation to undercover), and the machinery behind both.
"""
from .errors import InvalidDataset, InvalidParameter, SlopeCIError, TooLarge, UnachievableLevel
from .exactdist import (
    ExactDistribution,
    kendall_null_distribution,
    kendall_upper_quantile,
    signed_rank_null_distribution,
    signed_rank_upper_quantile,
)
from .intervals import (
    Interval,
    KendallTestResult,
    kendall_slope_test,
    theil_ci,
    theil_type_confidence,
    tukey_ci,
)
from .slopes import Dataset, SlopeSet, pairwise_slopes, theil_estimate, walsh_select

__version__ = "0.1.0"

__all__ = [
    "Dataset", "ExactDistribution", "Interval", "InvalidDataset", "InvalidParameter",
    "KendallTestResult", "SlopeCIError", "SlopeSet", "TooLarge", "UnachievableLevel",
    "kendall_null_distribution", "kendall_slope_test", "kendall_upper_quantile",
    "pairwise_slopes", "signed_rank_null_distribution", "signed_rank_upper_quantile",
    "theil_ci", "theil_estimate", "theil_type_confidence", "tukey_ci", "walsh_select",
]
