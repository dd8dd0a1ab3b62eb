"""Seeded Monte Carlo estimates of the true coverage of the slope intervals.

Replicates are generated in fixed-size chunks; chunk ``c`` draws from the
stream ``SeedSequence(seed, spawn_key=(c,))``. The chunking does not depend
on the number of workers, so a report is bit-identical for any degree of
parallelism.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .errors import InvalidParameter
from .parallel import worker_count
from .exactdist import kendall_null_distribution, kendall_upper_quantile, as_fraction
from .intervals import theil_indices, tukey_indices
from .slopes import _count_walsh, walsh_select

CHUNK = 2000
# above this many slopes the Tukey count runs per replicate instead of on a dense Walsh matrix
DENSE_WALSH_MAX_SLOPES = 45
# rows of the slope matrix processed at once
_CELLS_PER_BATCH = 4_000_000

Method = Literal["theil", "tukey"]


@dataclass(frozen=True)
class DesignSpec:
    kind: Literal["evenly_spaced", "two_clusters", "explicit"]
    n: int
    explicit_x: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("evenly_spaced", "two_clusters", "explicit"):
            raise InvalidParameter(f"unknown design {self.kind!r}")
        if self.kind == "explicit":
            if self.explicit_x is None or len(self.explicit_x) != self.n:
                raise InvalidParameter("explicit design needs n x values")
            object.__setattr__(self, "explicit_x", tuple(float(v) for v in self.explicit_x))
        elif self.n < 2:
            raise InvalidParameter("design needs n >= 2")
        if self.kind == "two_clusters" and (self.n % 2 or self.n < 4):
            raise InvalidParameter(f"two-cluster design needs even n >= 4, got {self.n}")


@dataclass(frozen=True)
class ErrorSpec:
    """Error distribution. ``scale`` is the sd (normal), the scale (Cauchy) or
    the half-width (uniform, centred on ``location``)."""

    family: Literal["normal", "cauchy", "uniform"]
    scale: float
    location: float = 0.0

    def __post_init__(self):
        if self.family not in ("normal", "cauchy", "uniform"):
            raise InvalidParameter(f"unknown error family {self.family!r}")
        if not self.scale > 0:
            raise InvalidParameter("error scale must be positive")

    @classmethod
    def uniform(cls, low: float, high: float) -> "ErrorSpec":
        if not high > low:
            raise InvalidParameter("uniform bounds need low < high")
        return cls("uniform", (high - low) / 2, (high + low) / 2)

    @classmethod
    def standard(cls, family: str) -> "ErrorSpec":
        """The simulation defaults: normal sd 0.1 (variance 0.01), Cauchy scale 0.1,
        uniform on (-0.2, 0.2)."""
        scales = {"normal": 0.1, "cauchy": 0.1, "uniform": 0.2}
        if family not in scales:
            raise InvalidParameter(f"unknown error family {family!r}")
        return cls(family, scales[family])


@dataclass(frozen=True)
class CoverageReport:
    method: Method
    design: DesignSpec
    errors: ErrorSpec
    level: float
    reps: int
    seed: int
    hits: int
    boundary_hits: int
    true_slope: float = 1.0
    theil_exact: Fraction | None = None
    quantile_exact: bool = True

    @property
    def coverage(self) -> Fraction:
        return Fraction(self.hits, self.reps)

    @property
    def std_error(self) -> float:
        p = self.hits / self.reps
        return math.sqrt(p * (1 - p) / self.reps)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "design": self.design.kind,
            "n": self.design.n,
            "errors": self.errors.family,
            "error_scale": self.errors.scale,
            "level": self.level,
            "reps": self.reps,
            "seed": self.seed,
            "hits": self.hits,
            "boundary_hits": self.boundary_hits,
            "coverage": float(self.coverage),
            "std_error": self.std_error,
            "theil_exact": None if self.theil_exact is None else float(self.theil_exact),
            "quantile_exact": self.quantile_exact,
        }


def make_design(spec: DesignSpec) -> np.ndarray:
    n = spec.n
    if spec.kind == "explicit":
        x = np.asarray(spec.explicit_x, dtype=float)
        if np.any(np.diff(x) <= 0):
            raise InvalidParameter("explicit design must be strictly increasing")
        return x
    if spec.kind == "evenly_spaced":
        pts = [Fraction(i - 1, n - 1) for i in range(1, n + 1)]
    else:
        half = n // 2
        step = 3 * (half - 1)
        pts = [Fraction(i - 1, step) for i in range(1, half + 1)]
        pts += [Fraction(2, 3) + Fraction(i - half - 1, step) for i in range(half + 1, n + 1)]
    return np.array([float(p) for p in pts])


def stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _open_unit(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    return (rng.integers(0, 2**53, size=size, dtype=np.int64) + 0.5) / 2**53


def sample_errors(spec: ErrorSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Draw errors: normal by numpy's ziggurat sampler, Cauchy by the inverse CDF,
    uniform by an affine map of open-interval uniforms."""
    if spec.family == "normal":
        return spec.location + spec.scale * rng.standard_normal(size)
    u = _open_unit(rng, size)
    if spec.family == "cauchy":
        return spec.location + spec.scale * np.tan(np.pi * (u - 0.5))
    lo = spec.location - spec.scale
    hi = spec.location + spec.scale
    e = spec.location + spec.scale * (2 * u - 1)
    # keep draws strictly inside the interval after rounding
    return np.clip(e, np.nextafter(lo, np.inf), np.nextafter(hi, -np.inf))


def _sorted_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    i, j = np.triu_indices(len(x), k=1)
    s = (y[:, i] - y[:, j]) / (x[i] - x[j])
    s.sort(axis=1)
    return s


def _chunk_outcomes(args) -> tuple[np.ndarray, np.ndarray]:
    method, x, errors, idx, beta0, beta1, seed, chunk, size, path = args
    rng = stream(seed, chunk)
    eps = sample_errors(errors, (size, len(x)), rng)
    y = beta0 + beta1 * x + eps
    n_slopes = len(x) * (len(x) - 1) // 2
    step = max(1, _CELLS_PER_BATCH // n_slopes)
    parts = [_judge(method, _sorted_slopes(x, y[r:r + step]), idx, beta1, path)
             for r in range(0, size, step)]
    return (np.concatenate([p[0] for p in parts]),
            np.concatenate([p[1] for p in parts]))


def _judge(method, s, idx, beta1, path):
    lo_i, hi_i = idx
    if method == "theil" or path == "endpoints":
        if method == "theil":
            lo, hi = s[:, lo_i - 1], s[:, hi_i - 1]
        else:
            lo = np.array([walsh_select(row, lo_i) for row in s])
            hi = np.array([walsh_select(row, hi_i) for row in s])
        hit = (lo < beta1) & (beta1 < hi)
        boundary = (lo == beta1) | (hi == beta1)
        return hit, boundary
    if s.shape[1] <= DENSE_WALSH_MAX_SLOPES and path != "sweep":
        I, J = np.triu_indices(s.shape[1])
        w = (s[:, I] + s[:, J]) / 2
        lt = np.count_nonzero(w < beta1, axis=1)
        le = np.count_nonzero(w <= beta1, axis=1)
    else:
        lt = np.array([_count_walsh(row, beta1, strict=True) for row in s])
        le = np.array([_count_walsh(row, beta1, strict=False) for row in s])
    # w_L < beta  <=>  #{w < beta} >= L ;  beta < w_U  <=>  #{w <= beta} < U
    hit = (lt >= lo_i) & (le < hi_i)
    boundary = ((lt < lo_i) & (lo_i <= le)) | ((lt < hi_i) & (hi_i <= le))
    return hit, boundary


def _interval_indices(method: Method, n: int, level: float) -> tuple[tuple[int, int], bool]:
    if method == "theil":
        l, u, _ = theil_indices(n, level)
        return (l, u), True
    if method == "tukey":
        L, U, _, exact = tukey_indices(n, level)
        return (L, U), exact
    raise InvalidParameter(f"unknown method {method!r}")


def replicate_outcomes(method: Method, design: DesignSpec, errors: ErrorSpec, level: float = 0.95,
                       reps: int = 10_000, seed: int = 0, *, workers: int | None = None,
                       true_slope: float = 1.0, intercept: float = 0.0,
                       path: str = "count") -> tuple[np.ndarray, np.ndarray]:
    """Per-replicate (covered, boundary) flags.

    ``path`` selects how the Tukey interval is judged: ``"count"`` (dense
    Walsh matrix for small n, per-replicate sweep otherwise), ``"sweep"`` (always the
    per-replicate count) or ``"endpoints"`` (compute w_L and w_U by selection).
    """
    if reps < 1:
        raise InvalidParameter("reps must be >= 1")
    if path not in ("count", "sweep", "endpoints"):
        raise InvalidParameter(f"unknown path {path!r}")
    x = make_design(design)
    idx, _ = _interval_indices(method, design.n, level)
    tasks = []
    for c, start in enumerate(range(0, reps, CHUNK)):
        tasks.append((method, x, errors, idx, intercept, true_slope, seed, c,
                      min(CHUNK, reps - start), path))
    nw = min(worker_count(workers), len(tasks))
    if nw == 1:
        parts = [_chunk_outcomes(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(_chunk_outcomes, tasks))
    hit = np.concatenate([p[0] for p in parts])
    boundary = np.concatenate([p[1] for p in parts])
    return hit, boundary


def coverage(method: Method, design: DesignSpec, errors: ErrorSpec, level: float = 0.95,
             reps: int = 10_000, seed: int = 0, *, workers: int | None = None,
             true_slope: float = 1.0, path: str = "count") -> CoverageReport:
    """Estimate P(true slope in interval) for y = true_slope * x + error."""
    _, quantile_exact = _interval_indices(method, design.n, level)
    hit, boundary = replicate_outcomes(method, design, errors, level, reps, seed,
                                       workers=workers, true_slope=true_slope, path=path)
    return CoverageReport(
        method=method, design=design, errors=errors, level=float(level), reps=reps,
        seed=seed, hits=int(hit.sum()), boundary_hits=int(boundary.sum()),
        true_slope=true_slope, theil_exact=theil_reference(design.n, level),
        quantile_exact=quantile_exact,
    )


def theil_reference(n: int, level: float = 0.95) -> Fraction | None:
    """Exact true confidence of the Theil interval, or None if it does not exist."""
    a2 = (1 - as_fraction(level)) / 2
    if not 0 < a2 < Fraction(1, 2):
        return None
    k = kendall_upper_quantile(n, a2)
    if k is None:
        return None
    return 1 - 2 * kendall_null_distribution(n).sf(k)


def table_rows(method: Method, designs: Sequence[str], families: Sequence[str],
               ns: Sequence[int], level: float = 0.95, reps: int = 10_000, seed: int = 0,
               workers: int | None = None) -> list[CoverageReport]:
    out = []
    for kind in designs:
        for fam in families:
            for n in ns:
                out.append(coverage(method, DesignSpec(kind, n), ErrorSpec.standard(fam), level,
                                    reps, seed, workers=workers))
    return out


__all__ = [
    "CoverageReport", "DesignSpec", "ErrorSpec", "coverage", "make_design",
    "replicate_outcomes", "sample_errors", "stream", "table_rows", "theil_reference",
]
