import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from slopeci.errors import InvalidDataset, InvalidParameter
from slopeci.slopes import (
    Dataset,
    count_walsh_at_most,
    count_walsh_below,
    pairwise_slopes,
    theil_estimate,
    walsh_select,
)

from ._oracles import brute_slopes, brute_walsh

CLOUD = Dataset((1, 2, 3, 4, 5), (1.26, 1.27, 1.12, 1.16, 1.03))

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def datasets(draw, min_n=2, max_n=8):
    n = draw(st.integers(min_n, max_n))
    x = sorted(draw(st.lists(finite, min_size=n, max_size=n, unique=True)))
    y = draw(st.lists(finite, min_size=n, max_size=n))
    ds = Dataset(x, y)
    diffs = np.diff(x)
    # slopes must stay finite
    assume(np.min(diffs) > 1e-290)
    return ds


def test_cloud_slopes():
    ss = pairwise_slopes(CLOUD)
    expected = [-0.15, -0.13, -0.08, -0.07, -0.0575, -0.055, -0.045, -0.1 / 3, 0.01, 0.04]
    np.testing.assert_allclose(ss.slopes, expected, atol=1e-12)
    assert theil_estimate(ss) == pytest.approx(-0.05625, abs=1e-12)
    assert ss.N == 10 and ss.P == 55
    assert not ss.tie_flag
    # pair indices refer back to the observations
    for s, (i, j) in zip(ss.slopes, ss.pair_index):
        assert s == pytest.approx((CLOUD.y[j] - CLOUD.y[i]) / (CLOUD.x[j] - CLOUD.x[i]))


def test_cloud_walsh_endpoints():
    ss = pairwise_slopes(CLOUD)
    assert walsh_select(ss, 9) == pytest.approx(-0.1, abs=1e-12)
    assert walsh_select(ss, 47) == pytest.approx(-0.015, abs=1e-12)


def test_cloud_walsh_count_rounding():
    # in exact decimals 46 averages lie strictly below -0.015 and w_47 equals it;
    # in binary floating point w_47 rounds just under the literal -0.015
    ss = pairwise_slopes(CLOUD)
    w47 = walsh_select(ss, 47)
    assert count_walsh_below(ss, w47) == 46
    assert count_walsh_at_most(ss, w47) == 47
    assert count_walsh_below(ss, -0.015) == 47


def test_slope_set_is_read_only():
    ss = pairwise_slopes(CLOUD)
    with pytest.raises(ValueError):
        ss.slopes[0] = 0.0


def test_dataset_validation():
    with pytest.raises(InvalidDataset):
        Dataset((1.0,), (2.0,))
    with pytest.raises(InvalidDataset):
        Dataset((1, 1, 2), (0, 1, 2))
    with pytest.raises(InvalidDataset):
        Dataset((2, 1), (0, 1))
    with pytest.raises(InvalidDataset):
        Dataset((1, 2), (0, math.nan))
    with pytest.raises(InvalidDataset):
        Dataset((1, 2, 3), (0, 1))
    ds = Dataset.from_unsorted((3, 1, 2), (30, 10, 20))
    assert ds.x == (1.0, 2.0, 3.0) and ds.y == (10.0, 20.0, 30.0)


def test_overflowing_slope_rejected():
    with pytest.raises(InvalidDataset):
        pairwise_slopes(Dataset((0.0, 5e-324), (0.0, 1.0)))


def test_tied_slopes_warn():
    with pytest.warns(UserWarning):
        ss = pairwise_slopes(Dataset((1, 2, 3), (0, 1, 2)))
    assert ss.tie_flag


def test_single_slope():
    ss = pairwise_slopes(Dataset((0, 2), (1, 5)))
    assert theil_estimate(ss) == 2.0
    assert walsh_select(ss, 1) == 2.0


def test_walsh_select_range():
    with pytest.raises(InvalidParameter):
        walsh_select(pairwise_slopes(CLOUD), 0)
    with pytest.raises(InvalidParameter):
        walsh_select(pairwise_slopes(CLOUD), 56)


@settings(max_examples=1000, deadline=None)
@given(datasets(max_n=8))
def test_walsh_select_matches_brute_force(ds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = pairwise_slopes(ds)
    w = brute_walsh(ss.slopes)
    ks = {1, len(w), (len(w) + 1) // 2, max(1, len(w) // 7)}
    for k in ks:
        assert walsh_select(ss, k) == w[k - 1]


@settings(max_examples=1000, deadline=None)
@given(datasets(max_n=8))
def test_walsh_extremes_are_slope_extremes(ds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = pairwise_slopes(ds)
    assert walsh_select(ss, 1) == ss.slopes[0]
    assert walsh_select(ss, ss.P) == ss.slopes[-1]


@settings(max_examples=300, deadline=None)
@given(datasets(max_n=8), finite)
def test_walsh_counts_match_brute_force(ds, t):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = pairwise_slopes(ds)
    w = brute_walsh(ss.slopes)
    assert count_walsh_below(ss, t) == sum(v < t for v in w)
    assert count_walsh_at_most(ss, t) == sum(v <= t for v in w)
    for v in w[:: max(1, len(w) // 5)]:
        assert count_walsh_below(ss, v) == sum(u < v for u in w)


@settings(max_examples=300, deadline=None)
@given(datasets(max_n=8))
def test_slopes_match_brute_force(ds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = pairwise_slopes(ds)
    assert list(ss.slopes) == brute_slopes(ds.x, ds.y)


def test_walsh_select_large_sample():
    rng = np.random.default_rng(3)
    s = np.sort(rng.standard_cauchy(400))
    I, J = np.triu_indices(len(s))
    w = np.sort((s[I] + s[J]) / 2)
    for k in (1, 17, 40_000, len(w) // 2, len(w) - 5, len(w)):
        assert walsh_select(s, k) == w[k - 1]


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 9))
def test_slopes_determined_by_those_through_first_point(seed, n):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0, 10, n))
    y = rng.normal(0, 1, n)
    assume(np.min(np.diff(x)) > 1e-3)
    S = lambda i, j: (y[i] - y[j]) / (x[i] - x[j])  # noqa: E731
    for i in range(1, n):
        for j in range(i + 1, n):
            via_first = (S(0, j) * (x[0] - x[j]) - S(0, i) * (x[0] - x[i])) / (x[i] - x[j])
            assert via_first == pytest.approx(S(i, j), rel=1e-12, abs=1e-12 * (1 + abs(S(i, j))))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 7))
def test_walsh_select_monotone_and_bracketed(seed, n):
    rng = np.random.default_rng(seed)
    ss = pairwise_slopes(Dataset(np.sort(rng.uniform(0, 1, n)), rng.standard_cauchy(n)))
    prev = -np.inf
    for k in range(1, ss.P + 1):
        w = walsh_select(ss, k)
        assert w >= prev
        prev = w
        assert count_walsh_below(ss, w) < k <= count_walsh_below(ss, np.nextafter(w, np.inf))
