"""Exact null distributions of the Kendall K and Wilcoxon signed-rank T+ statistics.

Both distributions are held as integer counts over a common denominator
(``n!`` for Kendall, ``2**N`` for the signed-rank statistic), so every
probability derived from them is an exact :class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from statistics import NormalDist
from typing import Literal

import numpy as np

from .errors import InvalidParameter, TooLarge

# Largest number of signed-rank inputs handled by the exact DP; beyond this the
# normal approximation is used for quantiles.
SIGNED_RANK_EXACT_MAX = 2000

# counts stay below 2**62 up to here, so the DP can run in int64
_INT64_SAFE_N = 60


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Exact discrete distribution over an evenly spaced integer support.

    ``counts[i]`` is the number of equally likely outcomes landing on
    ``support[i]``; the probability is ``counts[i] / total``.
    """

    kind: Literal["kendall", "signed_rank"]
    size_parameter: int
    support_start: int
    support_step: int
    counts: tuple[int, ...]
    total: int

    @property
    def support(self) -> range:
        stop = self.support_start + self.support_step * len(self.counts)
        return range(self.support_start, stop, self.support_step)

    @cached_property
    def mass(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c, self.total) for c in self.counts)

    @cached_property
    def _upper_tail_counts(self) -> tuple[int, ...]:
        # tail[i] = number of outcomes with value >= support[i]
        tail = [0] * (len(self.counts) + 1)
        acc = 0
        for i in range(len(self.counts) - 1, -1, -1):
            acc += self.counts[i]
            tail[i] = acc
        return tuple(tail)

    def _index(self, k: int) -> int:
        """Index of the first support point >= k (may be 0 or len(counts))."""
        if k <= self.support_start:
            return 0
        steps = -(-(k - self.support_start) // self.support_step)
        return min(steps, len(self.counts))

    def pmf(self, k: int) -> Fraction:
        off = k - self.support_start
        if off < 0 or off % self.support_step:
            return Fraction(0)
        i = off // self.support_step
        if i >= len(self.counts):
            return Fraction(0)
        return Fraction(self.counts[i], self.total)

    def sf(self, k: int) -> Fraction:
        """P(X >= k)."""
        return Fraction(self._upper_tail_counts[self._index(k)], self.total)

    def tail_count(self, k: int) -> int:
        """Number of outcomes with X >= k."""
        return self._upper_tail_counts[self._index(k)]


def as_fraction(v) -> Fraction:
    """Exact fraction for ``v``; floats are read by their shortest repr (0.025 -> 1/40)."""
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def _check_alpha(a) -> None:
    if not 0 < a < Fraction(1, 2):
        raise InvalidParameter(f"upper-tail probability must lie in (0, 1/2), got {a!r}")


@lru_cache(maxsize=None)
def _mahonian(n: int) -> tuple[int, ...]:
    """Number of permutations of n items with d inversions, d = 0..n(n-1)/2."""
    dtype = np.int64 if n <= 20 else object
    row = np.ones(1, dtype=dtype)
    for m in range(2, n + 1):
        # new[d] = sum_{j=0}^{m-1} row[d-j], done with a prefix sum
        size = len(row) + m - 1
        cum = np.zeros(size + 1, dtype=dtype)
        cum[1 : len(row) + 1] = np.cumsum(row)
        cum[len(row) + 1 :] = cum[len(row)]
        new = cum[1:].copy()
        new[m:] = new[m:] - cum[1 : size - m + 1]
        row = new
    return tuple(int(v) for v in row)


def kendall_null_distribution(n: int) -> ExactDistribution:
    """Exact null distribution of K = N_c - N_d for n observations."""
    if n < 2:
        raise InvalidParameter(f"Kendall distribution needs n >= 2, got {n}")
    N = n * (n - 1) // 2
    inversions = _mahonian(n)
    # K = N - 2d, so ascending K runs over descending d
    return ExactDistribution(
        kind="kendall",
        size_parameter=n,
        support_start=-N,
        support_step=2,
        counts=inversions[::-1],
        total=math.factorial(n),
    )


def kendall_upper_quantile(n: int, a) -> int | None:
    """Upper quantile k_n(a) of the Kendall K null distribution.

    The unique k with the parity of N = n(n-1)/2 such that
    P(K >= k) <= a < P(K >= k - 2). Returns ``None`` when even
    P(K >= N) exceeds ``a``.
    """
    _check_alpha(a)
    dist = kendall_null_distribution(n)
    a = as_fraction(a)
    N = n * (n - 1) // 2
    if dist.sf(N) > a:
        return None
    k = N
    while dist.sf(k - 2) <= a:
        k -= 2
    return k


@lru_cache(maxsize=8)
def _signed_rank_counts(N: int) -> tuple[int, ...]:
    P = N * (N + 1) // 2
    half = P // 2
    dtype = np.int64 if N <= _INT64_SAFE_N else object
    c = np.zeros(half + 1, dtype=dtype)
    if dtype is object:
        c[:] = 0
    c[0] = 1
    # subset-sum DP truncated at P//2; the upper half follows from symmetry
    for i in range(1, min(N, half) + 1):
        c[i:] = c[i:] + c[: half + 1 - i]
    low = [int(v) for v in c]
    return tuple(low + low[: P + 1 - len(low)][::-1])


def signed_rank_null_distribution(N: int) -> ExactDistribution:
    """Exact null distribution of the Wilcoxon signed-rank statistic T+."""
    if N < 1:
        raise InvalidParameter(f"signed-rank distribution needs N >= 1, got {N}")
    if N > SIGNED_RANK_EXACT_MAX:
        raise TooLarge(
            f"exact signed-rank distribution limited to N <= {SIGNED_RANK_EXACT_MAX} "
            f"(got {N}); use signed_rank_upper_quantile, which falls back to the "
            "normal approximation"
        )
    return ExactDistribution(
        kind="signed_rank",
        size_parameter=N,
        support_start=0,
        support_step=1,
        counts=_signed_rank_counts(N),
        total=2**N,
    )


def signed_rank_quantile_is_exact(N: int) -> bool:
    return N <= SIGNED_RANK_EXACT_MAX


def signed_rank_upper_quantile(N: int, a, method: str = "auto") -> int | None:
    """Smallest t <= P with P(T+ >= t) <= a, or ``None`` if 2**-N > a.

    ``method`` is ``"exact"``, ``"normal"`` or ``"auto"`` (exact up to
    :data:`SIGNED_RANK_EXACT_MAX`, normal approximation with continuity
    correction above it).
    """
    _check_alpha(a)
    if N < 1:
        raise InvalidParameter(f"signed-rank quantile needs N >= 1, got {N}")
    if method not in ("auto", "exact", "normal"):
        raise InvalidParameter(f"unknown method {method!r}")
    if method == "auto":
        method = "exact" if signed_rank_quantile_is_exact(N) else "normal"
    P = N * (N + 1) // 2
    a = as_fraction(a)
    if a < Fraction(1, 2**N):
        return None
    if method == "exact":
        dist = signed_rank_null_distribution(N)
        lo, hi = 0, P  # sf(hi) <= a holds; find the smallest such t
        while lo < hi:
            mid = (lo + hi) // 2
            if dist.sf(mid) <= a:
                hi = mid
            else:
                lo = mid + 1
        return lo
    mean = P / 2
    sd = math.sqrt(N * (N + 1) * (2 * N + 1) / 24)
    # P(T+ >= t) ~ 1 - Phi((t - 1/2 - mean) / sd)
    z = NormalDist().inv_cdf(1 - float(a))
    t = math.ceil(mean + 0.5 + z * sd)
    return min(max(t, 0), P)
