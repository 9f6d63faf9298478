import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapcount.errors import ConfigurationError
from gapcount.potentials import GaussianV, IndicatorV, PowerLawV, ZeroV, make_potential
from gapcount.regions import RegionSpec


def _numeric_transform(V, x, q, lo, hi, n=20001):
    xi = np.linspace(lo, hi, n)
    f = V(x, xi) * np.exp(-1j * q * (xi - V.xi_center))
    return np.trapezoid(f, xi)


@pytest.mark.parametrize("V", [
    GaussianV(0.3, 0.8, x_center=2.5, xi_center=0.4),
    IndicatorV(0.4, RegionSpec.rectangle(1, 2, -3, 5)),
    IndicatorV(1.0, RegionSpec.disc(0, 1, 2)),
])
def test_xi_table_matches_quadrature(V):
    dk, D = 0.3, 12
    x = np.array([V.x_extent(1e-3 * V.sup_V)[0] + 0.37])
    tab = V.xi_table(x, dk, D)
    for d in range(D + 1):
        ref = _numeric_transform(V, x[0], d * dk, -15, 15)
        assert abs(tab[0, d] - ref) < 2e-3 * V.sup_V


def test_polygon_table_is_complex():
    V = IndicatorV(1.0, RegionSpec.polygon([(0, 0), (2, 0), (0, 3)]))
    tab = V.xi_table(np.array([0.5]), 0.4, 6)
    assert np.iscomplexobj(tab)
    for d in range(7):
        ref = _numeric_transform(V, 0.5, 0.4 * d, -5, 5, 200001)
        assert abs(tab[0, d] - ref) < 1e-3


def test_power_law_transform_inside_window():
    # m = 2: int (1 + x^2 + xi^2)^-1 exp(-i q xi) dxi = pi exp(-q a) / a, a = sqrt(1 + x^2);
    # the window only removes |xi| > 0.9 xi_cut, where the symbol integrates to < 2 / (0.9 xi_cut)
    V = PowerLawV(2)
    dk, cut = 0.01, 300.0
    tab = V.xi_table(np.array([0.0, 3.0]), dk, 40, xi_cut=cut)
    for i, x in enumerate((0.0, 3.0)):
        a = math.sqrt(1 + x * x)
        for d in (0, 5, 20, 40):
            q = d * dk
            assert abs(tab[i, d] - math.pi * math.exp(-q * a) / a) < 2 / (0.9 * cut)


@settings(max_examples=50, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30))
def test_bounds_and_nonnegativity(x, xi):
    for V in (GaussianV(0.3, 0.8), PowerLawV(2.5, 0.7), IndicatorV(0.4, RegionSpec.disc(0, 0, 3))):
        v = float(V(x, xi))
        assert 0 <= v <= V.sup_V


def test_level_area_analytic():
    V = PowerLawV(2)
    assert V.level_area(0.1) == pytest.approx(math.pi * 9)
    assert V.level_area(0.1, 0.0) == pytest.approx(math.pi * 9 / 2)
    g = GaussianV(1.0, 0.5, xi_width=2.0)
    r2 = 2 * math.log(1 / 0.2)
    assert g.level_area(0.2) == pytest.approx(math.pi * r2 * 0.5 * 2.0)
    assert ZeroV().level_area(0.1) == 0


def test_make_potential_errors():
    with pytest.raises(ConfigurationError):
        make_potential("cubic")
    with pytest.raises(ConfigurationError):
        GaussianV(-1, 1)
    with pytest.raises(ConfigurationError):
        PowerLawV(0)
