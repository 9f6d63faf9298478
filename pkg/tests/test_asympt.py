import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapcount.asympt import (c_plus, c_plus_objective, corridor_constants, fit_sqrt_log,
                             fit_volume_ratio, grid_volume, homogeneity_defect, kappa,
                             min_enclosing_radius_on_line, volume_N)
from gapcount.effective import CountingCurve
from gapcount.errors import ConfigurationError
from gapcount.potentials import IndicatorV, PowerLawV
from gapcount.regions import RegionSpec


def test_kappa_fixtures():
    assert kappa(0) == 1
    assert abs(kappa(math.e) - math.e) < 1e-10
    with pytest.raises(ConfigurationError):
        kappa(-1)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-8, 1e6), st.floats(1e-8, 1e6))
def test_kappa_properties(s, t):
    k = kappa(s)
    assert abs(k * math.log(k) - s) <= 1e-10 * max(1.0, s)
    if s < t:
        assert kappa(s) <= kappa(t)


@pytest.mark.parametrize("m", [1.5, 2.0, 3.0])
def test_volume_fixtures(m):
    V = PowerLawV(m)
    assert volume_N(V, 1.0, 0.0) == 0 and volume_N(V, 2.0, -1e9) == 0
    for lam in (0.5, 0.1, 0.01):
        r2 = lam ** (-2 / m) - 1
        assert volume_N(V, lam, -1e9) == pytest.approx(r2 / 2, rel=1e-12)
        assert volume_N(V, lam, 0.0) == pytest.approx(r2 / 4, rel=1e-12)
        assert volume_N(V, lam, 0.0, method="grid") == pytest.approx(r2 / 4, rel=0.01)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 0.9), st.floats(1e-4, 0.9), st.floats(-20, 20), st.floats(-20, 20))
def test_volume_monotone(l1, l2, s1, s2):
    V = PowerLawV(2)
    (l1, l2), (s1, s2) = sorted((l1, l2)), sorted((s1, s2))
    assert volume_N(V, l1, s1) >= volume_N(V, l2, s1) - 1e-12
    assert volume_N(V, l1, s1) >= volume_N(V, l1, s2) - 1e-12


def test_homogeneity_defect():
    V = PowerLawV(2)
    lams = np.geomspace(1e-4, 1e-2, 5)
    d1 = homogeneity_defect(V, 0.0, 2, lams, 0.1)
    d2 = homogeneity_defect(V, 0.0, 2, lams, 0.05)
    assert np.allclose(d1 / d2, 2.0, rtol=0.02)
    assert np.allclose(homogeneity_defect(V, 0.0, 2, lams, -0.1), -d1)
    W = IndicatorV(0.5, RegionSpec.rectangle(0, 1, 0, 1))
    assert np.all(homogeneity_defect(W, -1.0, 2, [0.1, 0.2], 0.1) == 0)


def test_grid_volume_indicator():
    W = IndicatorV(0.5, RegionSpec.disc(0, 0, 1))
    area, err = grid_volume(W, 0.1)
    assert area == pytest.approx(math.pi, rel=0.01)


def test_c_plus_disc_fixtures():
    R = 2.0
    d = RegionSpec.disc(1, 0.5, R)
    assert c_plus(d, 3.0) == pytest.approx(R, abs=1e-9)
    inner = c_plus(d, 0.0)
    assert inner >= R
    # grid-search oracle over center abscissae
    grid = min(c_plus_objective(d, 0.0, c) for c in np.linspace(-5, 6, 4001))
    assert inner <= grid + 1e-12 and grid - inner < 1e-3


@settings(max_examples=15, deadline=None)
@given(st.floats(-10, 10), st.floats(-3, 3))
def test_c_plus_translation(t, a):
    for reg in (RegionSpec.rectangle(1, 2, 0, 1), RegionSpec.disc(0.5, 0, 1),
                RegionSpec.polygon([(0, 0), (2, 0), (0, 3)])):
        assert abs(c_plus(reg, a) - c_plus(reg.shifted(t, 0.0), a + t)) < 1e-8


def test_c_plus_upper_bound_by_explicit_discs():
    reg = RegionSpec.rectangle(1, 2, 0, 1)
    a = 0.0
    best = c_plus(reg, a)
    for cx in np.linspace(-1, 4, 11):
        R, _ = min_enclosing_radius_on_line(reg, cx)
        for Rt in (R, 1.5 * R):
            xi = cx - a
            assert best <= Rt * kappa(max(xi, 0) / (math.e * Rt)) + 1e-12


def test_corridor_constants():
    r = RegionSpec.rectangle(1, 2, 0, 1)
    cm, cp = corridor_constants(r, r, 0.0, 1.0)
    assert cm == pytest.approx(1 / (2 * math.pi), rel=1e-14)
    assert cm < cp
    cm2, cp2 = corridor_constants(r, r, 0.0, 2.0)
    assert cm2 / cm == pytest.approx(math.sqrt(2)) and cp2 / cp == pytest.approx(math.sqrt(2))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        cm3, _ = corridor_constants(r, r, 5.0, 1.0)
    assert cm3 == 0 and w


@pytest.mark.parametrize("reg", [RegionSpec.rectangle(0.5, 3, -1, 2), RegionSpec.disc(2, 0, 1),
                                 RegionSpec.polygon([(-1, 0), (2, 0), (0, 3)])])
def test_c_minus_below_c_plus(reg):
    cm, cp = corridor_constants(reg, reg, 0.0, 1.0)
    assert cm < cp


def _curve(lams, counts):
    counts = np.asarray(counts)
    return CountingCurve(np.asarray(lams), counts, counts, 0.1)


def test_fit_sqrt_log_synthetic():
    lams = np.geomspace(1e-12, 1e-2, 30)
    counts = np.round(3 * np.sqrt(np.abs(np.log(lams))))
    f = fit_sqrt_log(_curve(lams, counts))
    assert f.estimate == pytest.approx(3, rel=0.05)
    assert f.points_used >= 5
    z = fit_sqrt_log(_curve(lams, np.zeros(30)))
    assert z.estimate == 0 and "degenerate" in z.flags
    with pytest.raises(ConfigurationError):
        fit_sqrt_log(_curve(lams[:4], counts[:4]))


def test_fit_volume_ratio_synthetic():
    V = PowerLawV(2)
    lams = np.geomspace(1e-5, 1e-1, 13)
    counts = np.round([volume_N(V, l, 0.0) for l in lams])
    f = fit_volume_ratio(_curve(lams, counts), V, 0.0, 1.0)
    assert abs(f.estimate - 1) < 1e-3
    assert np.all(np.abs(f.ratios - 1) <= 0.5 / np.array([volume_N(V, l, 0.0) for l in lams]) + 1e-12)
    W = IndicatorV(0.05, RegionSpec.rectangle(0, 1, 0, 1))
    g = fit_volume_ratio(_curve(lams, counts), W, 0.0, 1.0)
    assert "zero-volume" in g.flags
