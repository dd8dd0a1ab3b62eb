from fractions import Fraction

import numpy as np
import pytest

from slopeci import mc
from slopeci.errors import InvalidParameter, UnachievableLevel
from slopeci.mc import DesignSpec, ErrorSpec


def test_designs():
    assert list(mc.make_design(DesignSpec("evenly_spaced", 3))) == [0, 0.5, 1]
    assert list(mc.make_design(DesignSpec("evenly_spaced", 2))) == [0, 1]
    got = mc.make_design(DesignSpec("two_clusters", 6))
    assert list(got) == [float(Fraction(k, 6)) for k in (0, 1, 2, 4, 5, 6)]
    x = mc.make_design(DesignSpec("two_clusters", 20))
    assert x[0] == 0 and x[-1] == 1 and x[9] == pytest.approx(1 / 3)
    assert list(mc.make_design(DesignSpec("explicit", 3, (1, 4, 9)))) == [1, 4, 9]


@pytest.mark.parametrize("kind,n", [("two_clusters", 7), ("two_clusters", 2), ("evenly_spaced", 1)])
def test_design_validation(kind, n):
    with pytest.raises(InvalidParameter):
        DesignSpec(kind, n)


def test_error_spec_validation():
    with pytest.raises(InvalidParameter):
        ErrorSpec("normal", 0)
    with pytest.raises(InvalidParameter):
        ErrorSpec("laplace", 1)
    with pytest.raises(InvalidParameter):
        ErrorSpec.uniform(1, 1)
    u = ErrorSpec.uniform(-0.2, 0.2)
    assert (u.family, u.scale, u.location) == ("uniform", 0.2, 0.0)
    assert ErrorSpec.standard("normal").scale == 0.1


def test_uniform_draws_strictly_inside():
    e = mc.sample_errors(ErrorSpec.standard("uniform"), 1_000_000, mc.stream(0, 0))
    assert e.min() > -0.2 and e.max() < 0.2
    assert abs(e.mean()) < 0.002


def test_streams_repeatable():
    a = mc.sample_errors(ErrorSpec.standard("cauchy"), 1000, mc.stream(7, 3))
    b = mc.sample_errors(ErrorSpec.standard("cauchy"), 1000, mc.stream(7, 3))
    c = mc.sample_errors(ErrorSpec.standard("cauchy"), 1000, mc.stream(7, 4))
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_cauchy_median():
    e = mc.sample_errors(ErrorSpec.standard("cauchy"), 100_000, mc.stream(1, 0))
    assert abs(np.median(e)) < 0.01
    # interquartile range of Cauchy(0, s) is 2s
    q1, q3 = np.percentile(e, [25, 75])
    assert q3 - q1 == pytest.approx(0.2, rel=0.03)


def test_normal_sd():
    e = mc.sample_errors(ErrorSpec.standard("normal"), 100_000, mc.stream(1, 0))
    assert e.std() == pytest.approx(0.1, rel=0.02)


@pytest.mark.parametrize("family", ["normal", "cauchy", "uniform"])
@pytest.mark.parametrize("design", ["evenly_spaced", "two_clusters"])
def test_theil_coverage_is_distribution_free(family, design):
    reps = 100_000
    r = mc.coverage("theil", DesignSpec(design, 10), ErrorSpec.standard(family), reps=reps, seed=5)
    exact = float(r.theil_exact)
    assert round(exact, 3) == 0.953
    assert abs(float(r.coverage) - exact) <= 4 * np.sqrt(exact * (1 - exact) / reps)


@pytest.mark.parametrize("n", [5, 6, 10, 20])
def test_count_path_matches_endpoints(n):
    d, e = DesignSpec("evenly_spaced", n), ErrorSpec.standard("cauchy")
    h1, b1 = mc.replicate_outcomes("tukey", d, e, reps=1500, seed=2, path="count")
    h2, b2 = mc.replicate_outcomes("tukey", d, e, reps=1500, seed=2, path="endpoints")
    h3, _ = mc.replicate_outcomes("tukey", d, e, reps=1500, seed=2, path="sweep")
    assert np.array_equal(h1, h2) and np.array_equal(h1, h3)
    assert np.array_equal(b1, b2)


def test_true_slope_invariance():
    d, e = DesignSpec("two_clusters", 10), ErrorSpec.standard("normal")
    a = mc.coverage("tukey", d, e, reps=5000, seed=9, true_slope=1.0)
    b = mc.coverage("tukey", d, e, reps=5000, seed=9, true_slope=-3.0)
    # same errors, so only rounding at near-ties could separate the two
    assert abs(a.hits - b.hits) <= 2


def test_worker_count_does_not_change_report():
    d, e = DesignSpec("evenly_spaced", 12), ErrorSpec.standard("uniform")
    a = mc.coverage("tukey", d, e, reps=9000, seed=4, workers=1)
    b = mc.coverage("tukey", d, e, reps=9000, seed=4, workers=3)
    assert a == b


def test_tukey_row_10():
    r = mc.coverage("tukey", DesignSpec("evenly_spaced", 10), ErrorSpec.standard("normal"), reps=10_000, seed=1)
    assert abs(float(r.coverage) - 0.804) <= 0.015
    assert r.quantile_exact
    assert 0 <= r.hits <= r.reps and r.coverage == Fraction(r.hits, r.reps)
    assert r.as_dict()["coverage"] == float(r.coverage)


def test_invalid_requests():
    with pytest.raises(InvalidParameter):
        mc.coverage("tukey", DesignSpec("evenly_spaced", 6), ErrorSpec.standard("normal"), reps=0)
    with pytest.raises(UnachievableLevel):
        mc.coverage("theil", DesignSpec("evenly_spaced", 4), ErrorSpec.standard("normal"), reps=10)
    with pytest.raises(InvalidParameter):
        mc.coverage("bogus", DesignSpec("evenly_spaced", 6), ErrorSpec.standard("normal"), reps=10)
