from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slopeci.errors import InvalidParameter, UnachievableLevel
from slopeci.intervals import (
    kendall_slope_test,
    theil_ci,
    theil_indices,
    theil_type_confidence,
    tukey_ci,
    tukey_indices,
)
from slopeci.slopes import Dataset, pairwise_slopes, walsh_select

from . import _coverage_table
from ._oracles import brute_kendall_K, brute_walsh

CLOUD = Dataset((1, 2, 3, 4, 5), (1.26, 1.27, 1.12, 1.16, 1.03))

seeds = st.integers(0, 2**32 - 1)


def random_dataset(seed, n):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 10, n))
    y = rng.normal(0, 1, n) + rng.uniform(-2, 2) * x
    return Dataset(x, y)


def test_cloud_theil():
    iv = theil_ci(CLOUD)
    assert iv.lower == pytest.approx(-0.15, abs=1e-12)
    assert iv.upper == pytest.approx(0.04, abs=1e-12)
    assert (iv.lower_index, iv.upper_index, iv.quantile) == (1, 10, 10)
    assert iv.achieved_confidence == Fraction(59, 60)


def test_cloud_tukey():
    iv = tukey_ci(CLOUD)
    assert iv.lower == pytest.approx(-0.100, abs=1e-12)
    assert iv.upper == pytest.approx(-0.015, abs=1e-12)
    assert (iv.lower_index, iv.upper_index, iv.quantile) == (9, 47, 47)
    assert iv.achieved_confidence is None and iv.quantile_exact


def test_cloud_kendall_test():
    r = kendall_slope_test(CLOUD, 0.0)
    assert (r.K, r.critical_value, r.reject) == (-6, 10, False)
    assert r.N_c + r.N_d == 10 and not r.tie_flag
    assert r.tau == Fraction(-6, 10)


@pytest.mark.parametrize("n,l,u", [(4, 1, 6), (5, 2, 9)])
def test_eleven_twelfths(n, l, u):
    assert theil_type_confidence(n, l, u) == Fraction(11, 12)


@pytest.mark.parametrize("n", sorted(_coverage_table.ROWS))
def test_theil_column(n):
    l, u, k = theil_indices(n, 0.95)
    assert round(float(theil_type_confidence(n, l, u)), 3) == _coverage_table.theil_cell(n)


def test_small_n_unachievable():
    with pytest.raises(UnachievableLevel) as e:
        theil_indices(4, 0.95)
    assert e.value.max_level == Fraction(11, 12)
    assert e.value.method == "theil"
    with pytest.raises(UnachievableLevel):
        tukey_indices(3, 0.95)
    assert tukey_indices(4, 0.95)[:2] == (1, 21)


def test_theil_type_confidence_validation():
    with pytest.raises(InvalidParameter):
        theil_type_confidence(5, 2, 8)
    with pytest.raises(InvalidParameter):
        theil_type_confidence(5, 6, 5)
    with pytest.raises(InvalidParameter):
        theil_indices(5, 1.5)


def test_large_n_uses_normal_quantile():
    L, U, t, exact = tukey_indices(70, 0.95)
    assert not exact and L + U == 70 * 69 // 2 * (70 * 69 // 2 + 1) // 2 + 1


@settings(max_examples=1000, deadline=None)
@given(seeds)
def test_tukey_inside_theil_n5(seed):
    ds = random_dataset(seed, 5)
    ss = pairwise_slopes(ds)
    th, tk = theil_ci(ds, slopes=ss), tukey_ci(ds, slopes=ss)
    assert th.lower < tk.lower and tk.upper < th.upper


@settings(max_examples=1000, deadline=None)
@given(seeds)
def test_w9_w47_position_criteria(seed):
    s = pairwise_slopes(random_dataset(seed, 5)).slopes
    w = brute_walsh(s)
    s1, s2, s9, s10 = s[0], s[1], s[8], s[9]
    assert (s2 <= w[8]) == (2 * s2 <= s1 + s9)
    assert (w[46] <= s9) == (s2 + s10 <= 2 * s9)


@settings(max_examples=1000, deadline=None)
@given(seeds, st.integers(3, 9))
def test_middle_slope(seed, n):
    ds = random_dataset(seed, n)
    x = [Fraction(v) for v in ds.x]
    y = [Fraction(v) for v in ds.y]

    def S(i, j):
        return (y[j] - y[i]) / (x[j] - x[i])

    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                lo, hi = sorted((S(a, b), S(b, c)))
                assert lo <= S(a, c) <= hi


@settings(max_examples=1000, deadline=None)
@given(seeds, st.integers(5, 12))
def test_walsh_extremes_equal_slope_extremes(seed, n):
    ss = pairwise_slopes(random_dataset(seed, n))
    assert walsh_select(ss, 1) == ss.slopes[0]
    assert walsh_select(ss, ss.P) == ss.slopes[-1]


@settings(max_examples=1000, deadline=None)
@given(seeds, st.integers(5, 12),
       st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False))
def test_affine_response_shift(seed, n, a, b):
    ds = random_dataset(seed, n)
    shifted = Dataset(ds.x, [yi + a + b * xi for xi, yi in zip(ds.x, ds.y)])
    th0, th1 = theil_ci(ds), theil_ci(shifted)
    tk0, tk1 = tukey_ci(ds), tukey_ci(shifted)
    tol = 1e-8 * (1 + abs(b))
    assert th1.lower == pytest.approx(th0.lower + b, abs=tol)
    assert th1.upper == pytest.approx(th0.upper + b, abs=tol)
    assert tk1.lower == pytest.approx(tk0.lower + b, abs=tol)
    assert tk1.upper == pytest.approx(tk0.upper + b, abs=tol)
    assert th1.achieved_confidence == th0.achieved_confidence


@settings(max_examples=300, deadline=None)
@given(seeds, st.integers(5, 12), st.floats(-3, 3, allow_nan=False))
def test_theil_interval_inverts_kendall_test(seed, n, beta):
    ds = random_dataset(seed, n)
    iv = theil_ci(ds)
    r = kendall_slope_test(ds, beta)
    x = np.asarray(ds.x)
    assert r.K == brute_kendall_K(ds.x, np.asarray(ds.y) - beta * x)
    if beta not in pairwise_slopes(ds).slopes:
        assert iv.contains(beta) == (not r.reject)


@pytest.mark.parametrize("level", [0.8, 0.9, 0.95, 0.99])
@pytest.mark.parametrize("n", [5, 7, 12, 30])
def test_achieved_confidence_not_below_level(n, level):
    try:
        l, u, _ = theil_indices(n, level)
    except UnachievableLevel:
        return
    assert theil_type_confidence(n, l, u) >= Fraction(str(level))
