"""Pairwise slopes, the Theil estimate and Walsh-average order statistics.

Walsh averages of the sorted slopes are never materialised: order statistics
are located by bisecting over the ordered bit patterns of doubles, driven by
an exact count of averages below a threshold.
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidDataset, InvalidParameter


@dataclass(frozen=True)
class Dataset:
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if len(x) != len(y):
            raise InvalidDataset(f"x and y differ in length ({len(x)} vs {len(y)})")
        if len(x) < 2:
            raise InvalidDataset("at least two observations are required")
        if not all(np.isfinite(x)) or not all(np.isfinite(y)):
            raise InvalidDataset("x and y must be finite")
        for a, b in zip(x, x[1:]):
            if a == b:
                raise InvalidDataset(f"duplicate x value {a}")
            if a > b:
                raise InvalidDataset("x values must be strictly increasing")

    @classmethod
    def from_unsorted(cls, x: Sequence[float], y: Sequence[float]) -> "Dataset":
        """Build a dataset after sorting the observations by x."""
        order = sorted(range(len(x)), key=lambda i: x[i])
        return cls(tuple(x[i] for i in order), tuple(y[i] for i in order))

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class SlopeSet:
    slopes: np.ndarray  # sorted ascending, read-only
    pair_index: tuple[tuple[int, int], ...]  # 0-based (i, j), i < j
    tie_flag: bool = field(default=False)

    @property
    def N(self) -> int:
        return len(self.slopes)

    @property
    def P(self) -> int:
        return self.N * (self.N + 1) // 2


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major (i, j) index arrays for all pairs i < j."""
    i, j = np.triu_indices(n, k=1)
    return i, j


def pairwise_slopes(ds: Dataset) -> SlopeSet:
    x = np.asarray(ds.x)
    y = np.asarray(ds.y)
    i, j = pair_indices(ds.n)
    with np.errstate(over="ignore"):
        raw = (y[i] - y[j]) / (x[i] - x[j])
    if not np.all(np.isfinite(raw)):
        raise InvalidDataset("a pairwise slope overflows; x values are too close together")
    order = np.argsort(raw, kind="stable")
    slopes = raw[order]
    slopes.setflags(write=False)
    pairs = tuple((int(i[k]), int(j[k])) for k in order)
    ties = bool(np.any(slopes[1:] == slopes[:-1]))
    if ties:
        warnings.warn("tied pairwise slopes; order statistics use the sorted multiset",
                      stacklevel=2)
    return SlopeSet(slopes, pairs, ties)


def theil_estimate(ss: SlopeSet) -> float:
    s = ss.slopes
    if len(s) == 0:
        raise InvalidParameter("empty slope set")
    mid = len(s) // 2
    if len(s) % 2:
        return float(s[mid])
    return float((s[mid - 1] + s[mid]) / 2)


def _partner_counts(s: np.ndarray, t: float, strict: bool) -> np.ndarray:
    """For each i, number of j with (s[i] + s[j]) / 2 < t (or <= t).

    searchsorted on 2t - s[i] gives a first guess; the fix-up loop makes the
    count agree with the floating-point predicate used by walsh_select.
    """
    n = len(s)
    side = "left" if strict else "right"
    cnt = np.searchsorted(s, 2 * t - s, side=side)

    def holds(j):
        w = (s + s[np.clip(j, 0, n - 1)]) / 2
        return (w < t) if strict else (w <= t)

    while True:
        down = (cnt > 0) & ~holds(cnt - 1)
        up = (cnt < n) & holds(cnt)
        if not (down.any() or up.any()):
            return cnt
        cnt = cnt - down + up


def _count_walsh(s: np.ndarray, t: float, strict: bool) -> int:
    s = np.asarray(s, dtype=float)
    if len(s) == 0:
        return 0
    c = _partner_counts(s, t, strict)
    diag = int(np.count_nonzero(s < t if strict else s <= t))
    # c sums ordered pairs; (i, j) and (j, i) coincide except on the diagonal
    return (int(c.sum()) + diag) // 2


def count_walsh_below(ss: SlopeSet | np.ndarray, t: float) -> int:
    """Number of pairs i <= j with (s_i + s_j) / 2 < t."""
    s = ss.slopes if isinstance(ss, SlopeSet) else ss
    return _count_walsh(s, float(t), strict=True)


def count_walsh_at_most(ss: SlopeSet | np.ndarray, t: float) -> int:
    """Number of pairs i <= j with (s_i + s_j) / 2 <= t."""
    s = ss.slopes if isinstance(ss, SlopeSet) else ss
    return _count_walsh(s, float(t), strict=False)


def _float_key(v: float) -> int:
    """Map a double to an integer preserving order (both zeros map to 0)."""
    (b,) = struct.unpack("<q", struct.pack("<d", float(v)))
    return b if b >= 0 else -(b & 0x7FFFFFFFFFFFFFFF)


def _key_float(k: int) -> float:
    b = k if k >= 0 else (-k) | (1 << 63)
    return struct.unpack("<d", struct.pack("<Q", b))[0]


def walsh_select(ss: SlopeSet | np.ndarray, k: int) -> float:
    """k-th smallest Walsh average (1-based) of the sorted slopes."""
    s = np.asarray(ss.slopes if isinstance(ss, SlopeSet) else ss, dtype=float)
    N = len(s)
    P = N * (N + 1) // 2
    if not 1 <= k <= P:
        raise InvalidParameter(f"Walsh rank must lie in 1..{P}, got {k}")
    if k == 1:
        return float(s[0])
    if k == P:
        return float(s[-1])
    # invariant: count_below(lo) < k <= count_below(hi)
    lo = _float_key(s[0])
    hi = _float_key(np.nextafter(s[-1], np.inf))
    while hi - lo > 1:
        mid = lo + (hi - lo) // 2
        if _count_walsh(s, _key_float(mid), strict=True) < k:
            lo = mid
        else:
            hi = mid
    return _key_float(lo)
