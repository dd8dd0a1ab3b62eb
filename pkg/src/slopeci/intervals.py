"""Kendall slope test, Theil and a-la-Tukey confidence intervals for the slope."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import InvalidParameter, UnachievableLevel
from .exactdist import (
    as_fraction,
    kendall_null_distribution,
    kendall_upper_quantile,
    signed_rank_quantile_is_exact,
    signed_rank_upper_quantile,
)
from .slopes import Dataset, SlopeSet, pairwise_slopes, walsh_select

TUKEY_WARNING = (
    "WARNING: the a-la-Tukey interval applies the signed-rank (Walsh average) "
    "interval to dependent pairwise slopes. Its true coverage falls well below "
    "the nominal level (about 93% at most for n=5, under 30% for n>160). "
    "Use the Theil interval for inference."
)


@dataclass(frozen=True)
class Interval:
    """Open interval (lower, upper) built from order statistics.

    ``lower_index``/``upper_index`` are 1-based ranks among the sorted slopes
    (Theil) or the sorted Walsh averages (Tukey).
    """

    lower: float
    upper: float
    lower_index: int
    upper_index: int
    method: Literal["theil", "tukey"]
    level: float
    achieved_confidence: Fraction | None = None
    quantile: int | None = None
    quantile_exact: bool = True
    degenerate: bool = False

    def contains(self, value: float) -> bool:
        return self.lower < value < self.upper


@dataclass(frozen=True)
class KendallTestResult:
    K: int
    N_c: int
    N_d: int
    tau: Fraction
    critical_value: int | None
    reject: bool | None
    ties: int = 0

    @property
    def tie_flag(self) -> bool:
        return self.ties > 0


def _check_level(level) -> Fraction:
    if not 0 < level < 1:
        raise InvalidParameter(f"confidence level must lie in (0, 1), got {level!r}")
    return as_fraction(level)


def _check_alpha(alpha) -> Fraction:
    if not 0 < alpha < 1:
        raise InvalidParameter(f"significance level must lie in (0, 1), got {alpha!r}")
    return as_fraction(alpha)


def kendall_slope_test(ds: Dataset, beta_star: float, alpha: float = 0.05) -> KendallTestResult:
    """Test H0: slope == beta_star with Kendall's K on D_i = y_i - beta_star * x_i."""
    a2 = _check_alpha(alpha) / 2
    x = np.asarray(ds.x)
    d = np.asarray(ds.y) - beta_star * x
    i, j = np.triu_indices(ds.n, k=1)
    sign = np.sign(x[j] - x[i]) * np.sign(d[j] - d[i])
    n_c = int(np.count_nonzero(sign > 0))
    n_d = int(np.count_nonzero(sign < 0))
    N = ds.n * (ds.n - 1) // 2
    ties = N - n_c - n_d
    K = n_c - n_d
    crit = kendall_upper_quantile(ds.n, a2) if a2 < Fraction(1, 2) else None
    reject = None if crit is None else abs(K) >= crit
    return KendallTestResult(K, n_c, n_d, Fraction(K, N), crit, reject, ties)


def theil_type_confidence(n: int, l: int, u: int) -> Fraction:
    """Exact true confidence 1 - 2 P(K >= k) of (s_l, s_u), k = N - 2(l - 1)."""
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    N = n * (n - 1) // 2
    if not (1 <= l and u <= N and l + u == N + 1):
        raise InvalidParameter(f"indices ({l}, {u}) are not a symmetric pair in 1..{N}")
    if l > u:
        raise InvalidParameter(f"lower index {l} exceeds upper index {u}")
    k = N - 2 * (l - 1)
    return 1 - 2 * kendall_null_distribution(n).sf(k)


def theil_indices(n: int, level: float = 0.95) -> tuple[int, int, int]:
    """Slope ranks (l, u) of the Theil interval plus the Kendall quantile k.

    Raises :class:`UnachievableLevel` when k_n((1 - level) / 2) does not exist.
    """
    lv = _check_level(level)
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    N = n * (n - 1) // 2
    a2 = (1 - lv) / 2
    k = kendall_upper_quantile(n, a2) if a2 < Fraction(1, 2) else None
    if k is None:
        best = 1 - 2 * kendall_null_distribution(n).sf(N)
        raise UnachievableLevel(
            f"Theil interval at level {level} needs n larger than {n}; "
            f"the widest interval (s_1, s_{N}) has confidence {best} (~{float(best):.4f})",
            method="theil", n=n, level=level, max_level=best,
        )
    return (N - k) // 2 + 1, (N + k) // 2, k


def theil_ci(ds: Dataset, level: float = 0.95, slopes: SlopeSet | None = None) -> Interval:
    l, u, k = theil_indices(ds.n, level)
    ss = slopes if slopes is not None else pairwise_slopes(ds)
    s = ss.slopes
    achieved = 1 - 2 * kendall_null_distribution(ds.n).sf(k)
    return Interval(
        lower=float(s[l - 1]), upper=float(s[u - 1]),
        lower_index=l, upper_index=u, method="theil", level=float(level),
        achieved_confidence=achieved, quantile=k,
        degenerate=bool(s[l - 1] == s[u - 1]),
    )


def tukey_indices(n: int, level: float = 0.95) -> tuple[int, int, int, bool]:
    """Walsh ranks (L, U) of the a-la-Tukey interval plus the signed-rank quantile.

    Returns ``(L, U, t, exact)``; raises :class:`UnachievableLevel` when the
    signed-rank quantile does not exist.
    """
    lv = _check_level(level)
    if n < 2:
        raise InvalidParameter(f"n must be >= 2, got {n}")
    N = n * (n - 1) // 2
    P = N * (N + 1) // 2
    a2 = (1 - lv) / 2
    t = signed_rank_upper_quantile(N, a2) if a2 < Fraction(1, 2) else None
    if t is None:
        raise UnachievableLevel(
            f"a-la-Tukey interval at level {level} does not exist for n={n}: "
            f"the signed-rank quantile t_{N}({float(a2):g}) does not exist",
            method="tukey", n=n, level=level, max_level=None,
        )
    return P - t + 1, t, t, signed_rank_quantile_is_exact(N)


def tukey_ci(ds: Dataset, level: float = 0.95, slopes: SlopeSet | None = None) -> Interval:
    """The a-la-Tukey interval (w_L, w_U) over Walsh averages of the slopes.

    Its true coverage is not the nominal level; ``achieved_confidence`` is
    therefore ``None``.
    """
    L, U, t, exact = tukey_indices(ds.n, level)
    ss = slopes if slopes is not None else pairwise_slopes(ds)
    lo = walsh_select(ss, L)
    hi = walsh_select(ss, U)
    degenerate = lo >= hi
    if degenerate:
        warnings.warn("degenerate a-la-Tukey interval (tied Walsh averages)", stacklevel=2)
    return Interval(
        lower=lo, upper=hi, lower_index=L, upper_index=U, method="tukey",
        level=float(level), achieved_confidence=None, quantile=t,
        quantile_exact=exact, degenerate=degenerate,
    )
