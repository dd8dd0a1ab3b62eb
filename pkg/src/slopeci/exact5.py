"""Upper bound on the true confidence of the 95% a-la-Tukey interval for n = 5.

For five observations the a-la-Tukey interval is (w_9, w_47). Its coverage is
bounded by p1 + p2 + p3 + p4, where each p_c is the probability of an event
stated purely in terms of the sorted slopes s_1 < ... < s_10:

    p1: beta in (s2, s9),  2 s2 <= s1 + s9,  s2 + s10 <= 2 s9
    p2: beta in (s2, s10), 2 s2 <= s1 + s9,  2 s9 < s2 + s10
    p3: beta in (s1, s9),  s1 + s9 < 2 s2,   s2 + s10 <= 2 s9
    p4: beta in (s1, s10), s1 + s9 < 2 s2,   2 s9 < s2 + s10

With errors uniform on (-h, h) each event splits over the 768 orderings of
the ten slopes that are geometrically possible; within one ordering the event
is a polytope in error space and its probability is volume / (2h)^5.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidParameter
from .geometry import Halfspace, Polytope, cube, volume
from .parallel import worker_count

log = logging.getLogger(__name__)

N_POINTS = 5
PAIRS = tuple((i, j) for i in range(1, N_POINTS + 1) for j in range(i + 1, N_POINTS + 1))
CONDITIONS = ("p1", "p2", "p3", "p4")

# Each condition: (lower slope rank, upper slope rank) for beta, then the two
# slope-combination constraints as (weights over sorted ranks, strict).
# A combination sum(w_r * s_r) < 0 (or <= 0); beta cancels since weights sum to 0.
_CONDITION_SPECS = {
    "p1": ((2, 9), [({2: 2, 1: -1, 9: -1}, False), ({2: 1, 10: 1, 9: -2}, False)]),
    "p2": ((2, 10), [({2: 2, 1: -1, 9: -1}, False), ({9: 2, 2: -1, 10: -1}, True)]),
    "p3": ((1, 9), [({1: 1, 9: 1, 2: -2}, True), ({2: 1, 10: 1, 9: -2}, False)]),
    "p4": ((1, 10), [({1: 1, 9: 1, 2: -2}, True), ({9: 2, 2: -1, 10: -1}, True)]),
}


@dataclass(frozen=True)
class SlopeOrdering:
    """The ten pairs (i, j), 1-based, listed from the smallest slope to the largest."""

    permutation: tuple[tuple[int, int], ...]

    def __str__(self):
        return " < ".join(f"S{i}{j}" for i, j in self.permutation)


@dataclass
class BoundResult:
    p1: Fraction
    p2: Fraction
    p3: Fraction
    p4: Fraction
    mode: str
    x: tuple[Fraction, ...]
    half_width: Fraction
    orderings: int
    polytope_counts: dict[str, int] = field(default_factory=dict)
    volumes: dict[str, tuple[Fraction, ...]] = field(default_factory=dict)
    derived: tuple[str, ...] = ()

    @property
    def bound(self) -> Fraction:
        return self.p1 + self.p2 + self.p3 + self.p4

    def as_dict(self, places: int = 7) -> dict:
        return {
            "mode": self.mode,
            "x": [str(v) for v in self.x],
            "half_width": str(self.half_width),
            "orderings": self.orderings,
            "p1": round_decimal(self.p1, places),
            "p2": round_decimal(self.p2, places),
            "p3": round_decimal(self.p3, places),
            "p4": round_decimal(self.p4, places),
            "bound": round_decimal(self.bound, places),
            "exact": {k: str(getattr(self, k)) for k in ("p1", "p2", "p3", "p4", "bound")},
            "nonempty_polytopes": dict(self.polytope_counts),
            "derived": list(self.derived),
        }


def round_decimal(v: Fraction, places: int = 7) -> str:
    """Decimal string of ``v`` rounded half away from zero."""
    v = Fraction(v)
    scale = 10**places
    q = (abs(v) * scale + Fraction(1, 2)).__floor__()
    sign = "-" if v < 0 and q else ""
    whole, frac = divmod(q, scale)
    return f"{sign}{whole}.{frac:0{places}d}" if places else f"{sign}{whole}"


def admissible_orderings() -> list[SlopeOrdering]:
    """Orderings of the ten slopes in which no S_ac (a < b < c) is extreme among
    S_ab, S_ac, S_bc. Built by backtracking with the constraint checked on
    every placement."""
    index = {p: k for k, p in enumerate(PAIRS)}
    # for each pair, the checks triggered when it is placed
    outer_needs = {}   # (a, c): list of (ab, bc) for each b in between
    inner_closes = {}  # (a, b) or (b, c): list of (other inner pair, outer pair)
    for a in range(1, N_POINTS + 1):
        for b in range(a + 1, N_POINTS + 1):
            for c in range(b + 1, N_POINTS + 1):
                ab, bc, ac = index[(a, b)], index[(b, c)], index[(a, c)]
                outer_needs.setdefault(ac, []).append((ab, bc))
                inner_closes.setdefault(ab, []).append((bc, ac))
                inner_closes.setdefault(bc, []).append((ab, ac))

    out: list[SlopeOrdering] = []
    placed = [False] * len(PAIRS)
    prefix: list[int] = []

    def ok(k: int) -> bool:
        # S_ac may not come first among its trio ...
        for ab, bc in outer_needs.get(k, ()):
            if not (placed[ab] or placed[bc]):
                return False
        # ... nor last: placing the second inner pair requires S_ac already placed
        for other, ac in inner_closes.get(k, ()):
            if placed[other] and not placed[ac]:
                return False
        return True

    def extend():
        if len(prefix) == len(PAIRS):
            out.append(SlopeOrdering(tuple(PAIRS[k] for k in prefix)))
            return
        for k in range(len(PAIRS)):
            if not placed[k] and ok(k):
                placed[k] = True
                prefix.append(k)
                extend()
                prefix.pop()
                placed[k] = False

    extend()
    return out


def is_admissible(ordering: Sequence[tuple[int, int]]) -> bool:
    pos = {p: k for k, p in enumerate(ordering)}
    if sorted(pos) != list(PAIRS):
        return False
    for a in range(1, N_POINTS + 1):
        for b in range(a + 1, N_POINTS + 1):
            for c in range(b + 1, N_POINTS + 1):
                trio = [pos[(a, b)], pos[(a, c)], pos[(b, c)]]
                if pos[(a, c)] in (min(trio), max(trio)):
                    return False
    return True


def _check_design(x: Sequence) -> tuple[Fraction, ...]:
    xs = tuple(Fraction(v) if not isinstance(v, float) else Fraction(repr(v)) for v in x)
    if len(xs) != N_POINTS:
        raise InvalidParameter(f"design must have exactly {N_POINTS} points")
    if any(a >= b for a, b in zip(xs, xs[1:])):
        raise InvalidParameter("design points must be strictly increasing")
    return xs


def _slope_gradient(pair: tuple[int, int], x: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients g with S_ij = beta + g . e."""
    i, j = pair
    g = [Fraction(0)] * N_POINTS
    dx = x[i - 1] - x[j - 1]
    g[i - 1] = 1 / dx
    g[j - 1] = -1 / dx
    return g


def _combination(weights: dict[int, int], grads: list[list[Fraction]]) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * N_POINTS
    for rank, w in weights.items():
        for c in range(N_POINTS):
            out[c] += w * grads[rank - 1][c]
    return tuple(out)


def compile_polytope(ordering: SlopeOrdering, condition: str | None, x: Sequence,
                     half_width=1) -> Polytope:
    """Error-space polytope for one slope ordering and one condition set.

    ``condition`` is one of ``p1``..``p4`` (9 ordering + 4 condition + 10 cube
    halfspaces) or ``None`` (ordering and cube only).
    """
    xs = _check_design(x)
    h = Fraction(half_width)
    if h <= 0:
        raise InvalidParameter("half width must be positive")
    grads = [_slope_gradient(p, xs) for p in ordering.permutation]
    rows: list[tuple[tuple[Fraction, ...], bool]] = []
    for k in range(len(grads) - 1):
        rows.append((tuple(a - b for a, b in zip(grads[k], grads[k + 1])), True))
    if condition is not None:
        if condition not in _CONDITION_SPECS:
            raise InvalidParameter(f"unknown condition {condition!r}")
        (lo, hi), combos = _CONDITION_SPECS[condition]
        rows.append((tuple(grads[lo - 1]), True))            # s_lo < beta
        rows.append((tuple(-v for v in grads[hi - 1]), True))  # beta < s_hi
        for weights, strict in combos:
            rows.append((_combination(weights, grads), strict))

    halfspaces = []
    for coeffs, strict in rows:
        if any(coeffs):
            halfspaces.append(Halfspace(coeffs, Fraction(0), strict))
        elif strict:
            # 0 < 0: the event is empty; keep the slot with an infeasible constraint
            halfspaces.append(Halfspace((1,) + (0,) * (N_POINTS - 1), -h, True))
        else:
            # 0 <= 0 always holds; keep the slot with a redundant constraint
            halfspaces.append(Halfspace((1,) + (0,) * (N_POINTS - 1), h, False))
    return Polytope(N_POINTS, tuple(halfspaces) + cube(N_POINTS, h).halfspaces)


def is_equidistant(x: Sequence) -> bool:
    xs = _check_design(x)
    steps = {b - a for a, b in zip(xs, xs[1:])}
    return len(steps) == 1


# exact results are deterministic, so repeated requests in one process reuse them
_VOLUME_CACHE: dict = {}


def _volume_task(args) -> Fraction:
    ordering, condition, x, h = args
    return volume(compile_polytope(ordering, condition, x, h))


def condition_volumes(condition: str | None, x: Sequence, half_width=1,
                      workers: int | None = None,
                      orderings: Sequence[SlopeOrdering] | None = None) -> tuple[Fraction, ...]:
    """Exact volume of the compiled polytope for every admissible ordering."""
    ords = tuple(orderings) if orderings is not None else tuple(admissible_orderings())
    xs = _check_design(x)
    h = Fraction(half_width)
    key = (condition, xs, h, ords)
    if key in _VOLUME_CACHE:
        return _VOLUME_CACHE[key]
    tasks = [(o, condition, xs, h) for o in ords]
    nw = worker_count(workers)
    if nw == 1:
        vols = tuple(_volume_task(t) for t in tasks)
    else:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            vols = tuple(pool.map(_volume_task, tasks,
                                  chunksize=max(1, len(tasks) // (4 * nw))))
    _VOLUME_CACHE[key] = vols
    return vols


def compute_bound(x: Sequence = (1, 2, 3, 4, 5), half_width=1, mode: str = "fast",
                  workers: int | None = None) -> BoundResult:
    """Exact p1..p4 and their sum for errors uniform on (-half_width, half_width).

    ``mode="fast"`` skips p4 and copies p3 from p2 when the design is
    equidistant (both identities hold there); ``mode="full"`` always sums all
    four conditions directly.
    """
    if mode not in ("fast", "full"):
        raise InvalidParameter(f"mode must be 'fast' or 'full', got {mode!r}")
    xs = _check_design(x)
    h = Fraction(half_width)
    if h <= 0:
        raise InvalidParameter("half width must be positive")
    ords = admissible_orderings()
    cube_volume = (2 * h) ** N_POINTS
    shortcut = mode == "fast" and is_equidistant(xs)
    todo = ("p1", "p2") if shortcut else CONDITIONS

    probs: dict[str, Fraction] = {}
    vols: dict[str, tuple[Fraction, ...]] = {}
    counts: dict[str, int] = {}
    for cond in todo:
        v = condition_volumes(cond, xs, h, workers, ords)
        vols[cond] = v
        counts[cond] = sum(1 for t in v if t > 0)
        probs[cond] = sum(v, Fraction(0)) / cube_volume
        log.info("%s = %s (%d non-empty polytopes)", cond, float(probs[cond]), counts[cond])
    derived: tuple[str, ...] = ()
    if shortcut:
        probs["p3"] = probs["p2"]
        probs["p4"] = Fraction(0)
        derived = ("p3", "p4")
    return BoundResult(
        p1=probs["p1"], p2=probs["p2"], p3=probs["p3"], p4=probs["p4"],
        mode=mode, x=xs, half_width=h, orderings=len(ords),
        polytope_counts=counts, volumes=vols, derived=derived,
    )


def condition_events(sorted_slopes: np.ndarray, beta: float = 0.0) -> dict[str, np.ndarray]:
    """Indicators of the four events for rows of sorted slopes (s_1..s_10)."""
    s = {r: sorted_slopes[:, r - 1] for r in range(1, 11)}
    a_lo = 2 * s[2] <= s[1] + s[9]      # s2 <= w9
    b_lo = s[2] + s[10] <= 2 * s[9]     # w47 <= s9
    inside = {(lo, hi): (s[lo] < beta) & (beta < s[hi]) for lo, hi in
              ((2, 9), (2, 10), (1, 9), (1, 10))}
    return {
        "p1": inside[(2, 9)] & a_lo & b_lo,
        "p2": inside[(2, 10)] & a_lo & ~b_lo,
        "p3": inside[(1, 9)] & ~a_lo & b_lo,
        "p4": inside[(1, 10)] & ~a_lo & ~b_lo,
    }


def mc_condition_probabilities(x: Sequence = (1, 2, 3, 4, 5), half_width=1,
                               samples: int = 1_000_000, seed: int = 0) -> dict[str, tuple[float, float]]:
    """Monte Carlo estimates (value, standard error) of p1..p4 and their sum."""
    xs = np.array([float(v) for v in _check_design(x)])
    h = float(half_width)
    i, j = np.triu_indices(N_POINTS, k=1)
    rng = np.random.default_rng(seed)
    counts = dict.fromkeys(CONDITIONS, 0)
    any_count = 0
    done = 0
    while done < samples:
        m = min(200_000, samples - done)
        e = rng.uniform(-h, h, size=(m, N_POINTS))
        s = np.sort((e[:, i] - e[:, j]) / (xs[i] - xs[j]), axis=1)
        ev = condition_events(s)
        for c in CONDITIONS:
            counts[c] += int(ev[c].sum())
        # the four events are disjoint, so the bound event is their union
        any_count += int((ev["p1"] | ev["p2"] | ev["p3"] | ev["p4"]).sum())
        done += m
    out = {}
    for c in CONDITIONS:
        p = counts[c] / samples
        out[c] = (p, (p * (1 - p) / samples) ** 0.5)
    p = any_count / samples
    out["bound"] = (p, (p * (1 - p) / samples) ** 0.5)
    return out
