"""Exact volumes of bounded convex polytopes in H-representation.

A polytope is a list of halfspaces ``c . e < c0`` with rational coefficients.
Volumes are computed exactly:

1. vertices: every d-subset of constraint hyperplanes is solved; a batched
   floating-point pass discards singular and clearly infeasible subsets, and
   each surviving vertex is then recomputed and checked in exact integer
   arithmetic;
2. faces are identified combinatorially through the sets of tight
   constraints, and every facet is triangulated by pulling from its lowest
   numbered vertex;
3. the facet simplices are coned from the vertex centroid and the volume is
   the sum of |det| / d!.

Boundaries do not affect volume, so strict and non-strict constraints are
treated alike.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class Halfspace:
    """The constraint ``sum(coefficients[i] * e_i) < bound`` (``<=`` if not strict)."""

    coefficients: tuple[Fraction, ...]
    bound: Fraction
    strict: bool = True

    def __post_init__(self):
        coeffs = tuple(Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "bound", Fraction(self.bound))
        if not any(coeffs):
            raise InvalidParameter("halfspace needs at least one non-zero coefficient")

    @property
    def dimension(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class Polytope:
    dimension: int
    halfspaces: tuple[Halfspace, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "halfspaces", tuple(self.halfspaces))
        if self.dimension < 1:
            raise InvalidParameter("dimension must be >= 1")
        for h in self.halfspaces:
            if h.dimension != self.dimension:
                raise InvalidParameter(
                    f"halfspace of dimension {h.dimension} in a {self.dimension}-polytope")

    def __len__(self):
        return len(self.halfspaces)

    def intersect(self, other: "Polytope") -> "Polytope":
        if other.dimension != self.dimension:
            raise InvalidParameter("dimension mismatch")
        return Polytope(self.dimension, self.halfspaces + other.halfspaces)


def box(lower: Sequence, upper: Sequence) -> Polytope:
    """Axis-aligned box lower < e < upper."""
    d = len(lower)
    hs = []
    for i in range(d):
        unit = [0] * d
        unit[i] = 1
        hs.append(Halfspace(tuple(unit), Fraction(upper[i])))
        unit[i] = -1
        hs.append(Halfspace(tuple(unit), -Fraction(lower[i])))
    return Polytope(d, tuple(hs))


def cube(d: int, half_width=1) -> Polytope:
    h = Fraction(half_width)
    return box([-h] * d, [h] * d)


# ---------------------------------------------------------------- exact helpers


def _integer_rows(p: Polytope) -> tuple[list[tuple[int, ...]], list[int]]:
    """Scale each constraint to coprime integer coefficients."""
    A, b = [], []
    for h in p.halfspaces:
        vals = h.coefficients + (h.bound,)
        lcm = 1
        for v in vals:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        ints = [int(v * lcm) for v in vals]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        ints = [v // g for v in ints]
        A.append(tuple(ints[:-1]))
        b.append(ints[-1])
    return A, b


def _solve_exact(rows: Sequence[Sequence[int]], rhs: Sequence[int]):
    """Solve a square integer system; returns (numerators, denominator) or None."""
    d = len(rows)
    m = [[Fraction(v) for v in r] + [Fraction(c)] for r, c in zip(rows, rhs)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pr = m[col]
        inv = 1 / pr[col]
        for r in range(d):
            if r != col and m[r][col] != 0:
                f = m[r][col] * inv
                row = m[r]
                for c in range(col, d + 1):
                    row[c] -= f * pr[c]
    sol = [m[i][d] / m[i][i] for i in range(d)]
    den = 1
    for v in sol:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return tuple(int(v * den) for v in sol), den


def _rank(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(v) for v in r] for r in rows]
    if not m:
        return 0
    ncol = len(m[0])
    rank = 0
    for col in range(ncol):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        for r in range(rank + 1, len(m)):
            if m[r][col] != 0:
                f = m[r][col] / pr[col]
                m[r] = [a - f * c for a, c in zip(m[r], pr)]
        rank += 1
        if rank == len(m):
            break
    return rank


def _det_int(mat: list[list[int]]) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    a = [row[:] for row in mat]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i = a[i]
            row_k = a[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1]


@lru_cache(maxsize=16)
def _combinations(m: int, d: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(m), d)), dtype=np.intp).reshape(-1, d)


# ---------------------------------------------------------------- vertices


@dataclass
class VertexEnumeration:
    """Vertices with their tight-constraint bitmasks."""

    dimension: int
    A: list[tuple[int, ...]]
    b: list[int]
    points: list[tuple[tuple[int, ...], int]]  # (numerators, common denominator)
    active: list[int]
    feasible: bool
    bounded: bool

    def as_fractions(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(v, den) for v in num) for num, den in self.points]


def _tight_mask(A, b, num, den) -> int | None:
    """Bitmask of tight rows, or None if some row is violated."""
    mask = 0
    for r, (row, c) in enumerate(zip(A, b)):
        lhs = sum(a * v for a, v in zip(row, num))
        rhs = c * den
        if lhs > rhs:
            return None
        if lhs == rhs:
            mask |= 1 << r
    return mask


def _has_box(A: list[tuple[int, ...]], d: int) -> bool:
    for i in range(d):
        pos = neg = False
        for row in A:
            if all(v == 0 for k, v in enumerate(row) if k != i):
                pos |= row[i] > 0
                neg |= row[i] < 0
        if not (pos and neg):
            return False
    return True


def _is_bounded(A: list[tuple[int, ...]], d: int) -> bool:
    if _has_box(A, d):
        return True
    from scipy.optimize import linprog

    Af = np.array(A, dtype=float)
    for i in range(d):
        for s in (1.0, -1.0):
            c = np.zeros(d)
            c[i] = -s
            res = linprog(c, A_ub=Af, b_ub=np.zeros(len(A)), bounds=[(None, None)] * d,
                          method="highs")
            if res.status == 3 or (res.status == 0 and -res.fun > 1e-9):
                return False
    return True


def enumerate_vertices(p: Polytope, tol: float = 1e-9) -> VertexEnumeration:
    """All vertices of ``p`` in exact arithmetic, with tight-constraint masks."""
    d = p.dimension
    A, b = _integer_rows(p)
    m = len(A)
    bounded = _is_bounded(A, d) if m else False
    if m < d:
        return VertexEnumeration(d, A, b, [], [], feasible=m == 0, bounded=bounded)

    Af = np.array(A, dtype=float)
    bf = np.array(b, dtype=float)
    norms = np.linalg.norm(Af, axis=1)
    Af = Af / norms[:, None]
    bf = bf / norms

    combos = _combinations(m, d)
    M = Af[combos]
    det = np.linalg.det(M)
    ok = np.abs(det) > 1e-10
    combos = combos[ok]
    if len(combos) == 0:
        return VertexEnumeration(d, A, b, [], [], feasible=False, bounded=bounded)
    X = np.linalg.solve(M[ok], bf[combos][..., None])[..., 0]
    slack = bf[None, :] - X @ Af.T
    scale = 1.0 + np.abs(X).max(axis=1)
    cand = np.all(slack >= -tol * scale[:, None], axis=1)
    combos, X = combos[cand], X[cand]

    # group subsets that land on (numerically) the same point
    keys = np.round(X / 1e-7).astype(np.int64)
    _, group = np.unique(keys, axis=0, return_inverse=True)
    group = group.ravel()
    use_int64 = m <= 62
    if use_int64:
        smasks = np.bitwise_or.reduce(np.left_shift(np.int64(1), combos.astype(np.int64)), axis=1)

    points: list[tuple[tuple[int, ...], int]] = []
    active: list[int] = []
    seen: dict[tuple[tuple[int, ...], int], int] = {}

    def add(subset) -> int | None:
        sol = _solve_exact([A[r] for r in subset], [b[r] for r in subset])
        if sol is None:
            return None
        if sol in seen:
            return active[seen[sol]]
        mask = _tight_mask(A, b, *sol)
        if mask is None:
            return None
        seen[sol] = len(points)
        points.append(sol)
        active.append(mask)
        return mask

    for g in range(int(group.max()) + 1 if len(group) else 0):
        members = np.flatnonzero(group == g)
        while len(members):
            mask = add(combos[members[0]])
            if mask is None:
                members = members[1:]
                continue
            # subsets whose rows are all tight at this vertex determine nothing new
            if use_int64:
                covered = (smasks[members] & ~np.int64(mask)) == 0
            else:
                covered = np.array([
                    all(mask >> int(r) & 1 for r in combos[i]) for i in members])
            covered[0] = True
            members = members[~covered]
    return VertexEnumeration(d, A, b, points, active, feasible=bool(points), bounded=bounded)


def vertices(p: Polytope) -> list[tuple[Fraction, ...]]:
    """Vertices of a bounded polytope as exact rational points.

    Returns an empty list when ``p`` is infeasible or unbounded; use
    :func:`enumerate_vertices` for the feasibility/boundedness flags.
    """
    ve = enumerate_vertices(p)
    if not ve.bounded:
        return []
    return ve.as_fractions()


# ---------------------------------------------------------------- volume


class _FaceLattice:
    def __init__(self, ve: VertexEnumeration):
        self.ve = ve
        self.d = ve.dimension
        self.nv = len(ve.points)
        self.nrows = len(ve.A)
        # for each row, bitmask of the vertices it is tight at
        self.row_vertices = [0] * self.nrows
        for vi, mask in enumerate(ve.active):
            r = mask
            while r:
                low = r & -r
                self.row_vertices[low.bit_length() - 1] |= 1 << vi
                r ^= low
        self._rank_cache: dict[int, int] = {}
        self._facet_cache: dict[int, list[int]] = {}
        self._tri_cache: dict[int, list[tuple[int, ...]]] = {}

    def eqset(self, vmask: int) -> int:
        eq = (1 << self.nrows) - 1
        r = vmask
        while r:
            low = r & -r
            eq &= self.ve.active[low.bit_length() - 1]
            r ^= low
        return eq

    def rank(self, rowmask: int) -> int:
        hit = self._rank_cache.get(rowmask)
        if hit is None:
            rows = [self.ve.A[i] for i in range(self.nrows) if rowmask >> i & 1]
            hit = self._rank_cache[rowmask] = _rank(rows)
        return hit

    def dim(self, vmask: int) -> int:
        if vmask == 0:
            return -1
        return self.d - self.rank(self.eqset(vmask))

    def facets(self, vmask: int, k: int) -> list[int]:
        hit = self._facet_cache.get(vmask)
        if hit is not None:
            return hit
        eq = self.eqset(vmask)
        out = set()
        for r in range(self.nrows):
            if eq >> r & 1:
                continue
            g = vmask & self.row_vertices[r]
            if g and g not in out and self.dim(g) == k - 1:
                out.add(g)
        res = sorted(out)
        self._facet_cache[vmask] = res
        return res

    def triangulate(self, vmask: int, k: int) -> list[tuple[int, ...]]:
        """Pulling triangulation of a k-face into k-simplices (vertex indices)."""
        hit = self._tri_cache.get(vmask)
        if hit is not None:
            return hit
        if k == 0:
            res = [((vmask & -vmask).bit_length() - 1,)]
        else:
            apex = (vmask & -vmask).bit_length() - 1
            res = []
            for g in self.facets(vmask, k):
                if g >> apex & 1:
                    continue
                for simplex in self.triangulate(g, k - 1):
                    res.append(simplex + (apex,))
        self._tri_cache[vmask] = res
        return res


def volume(p: Polytope) -> Fraction:
    """Exact d-dimensional volume; empty or lower-dimensional polytopes give 0."""
    ve = enumerate_vertices(p)
    if not ve.points:
        return Fraction(0)
    if not ve.bounded:
        raise InvalidParameter("volume of an unbounded polyhedron")
    return _volume_from_vertices(ve)


def _volume_from_vertices(ve: VertexEnumeration) -> Fraction:
    d = ve.dimension
    lat = _FaceLattice(ve)
    full = (1 << lat.nv) - 1
    if lat.nv <= d or lat.dim(full) < d:
        return Fraction(0)

    # common integer scaling: v = num * (L // den) / L, centroid scaled by nv
    L = 1
    for _, den in ve.points:
        L = L * den // math.gcd(L, den)
    nv = lat.nv
    pts = [[v * (L // den) * nv for v in num] for num, den in ve.points]
    centre = [sum(col) // nv for col in zip(*pts)]  # exact: each entry is a multiple of nv

    total = 0
    for facet in lat.facets(full, d):
        for simplex in lat.triangulate(facet, d - 1):
            mat = [[pts[v][c] - centre[c] for c in range(d)] for v in simplex]
            total += abs(_det_int(mat))
    return Fraction(total, math.factorial(d) * (L * nv) ** d)


def mc_volume(p: Polytope, box_: Polytope, samples: int, seed: int = 0) -> tuple[float, float]:
    """Hit-or-miss volume estimate of ``p`` inside an axis-aligned ``box_``.

    Returns ``(estimate, standard_error)``.
    """
    d = p.dimension
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for h in box_.halfspaces:
        nz = [i for i, c in enumerate(h.coefficients) if c != 0]
        if len(nz) != 1:
            raise InvalidParameter("mc_volume needs an axis-aligned box")
        i = nz[0]
        bound = float(h.bound / h.coefficients[i])
        if h.coefficients[i] > 0:
            hi[i] = min(hi[i], bound)
        else:
            lo[i] = max(lo[i], bound)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise InvalidParameter("box is unbounded")
    box_vol = float(np.prod(hi - lo))
    if not p.halfspaces:
        return box_vol, 0.0
    A = np.array([[float(c) for c in h.coefficients] for h in p.halfspaces])
    b = np.array([float(h.bound) for h in p.halfspaces])
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        m = min(200_000, samples - done)
        pts = lo + (hi - lo) * rng.random((m, d))
        hits += int(np.count_nonzero(np.all(pts @ A.T < b, axis=1)))
        done += m
    frac = hits / samples
    return box_vol * frac, box_vol * math.sqrt(frac * (1 - frac) / samples)


# ---------------------------------------------------------------- text format


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def format_hrep(p: Polytope) -> str:
    """Plain-text H-representation: ``d m`` then one ``c_1 .. c_d c_0`` line per halfspace."""
    lines = [f"{p.dimension} {len(p.halfspaces)}"]
    for h in p.halfspaces:
        lines.append(" ".join(_fmt(v) for v in h.coefficients + (h.bound,)))
    return "\n".join(lines) + "\n"


def parse_hrep(text: str | Iterable[str]) -> Polytope:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    lines = [ln.split("#", 1)[0].strip() for ln in lines]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InvalidParameter("empty H-representation")
    header = lines[0].split()
    if len(header) != 2:
        raise InvalidParameter("header must be 'd m'")
    d, m = int(header[0]), int(header[1])
    if len(lines) - 1 != m:
        raise InvalidParameter(f"expected {m} halfspace lines, found {len(lines) - 1}")
    hs = []
    for ln in lines[1:]:
        vals = [Fraction(tok) for tok in ln.split()]
        if len(vals) != d + 1:
            raise InvalidParameter(f"halfspace line needs {d + 1} numbers: {ln!r}")
        hs.append(Halfspace(tuple(vals[:-1]), vals[-1]))
    return Polytope(d, tuple(hs))
