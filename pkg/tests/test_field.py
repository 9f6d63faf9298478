import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapcount.errors import ConfigurationError, RangeError
from gapcount.field import FieldSpec, PotentialB, eval_B, eval_b, invert_b, x_plus


def test_constant_field_value():
    assert eval_B(FieldSpec.constant(1.0), 7.0) == 1.0


def test_smooth_step_saturates():
    w = 0.3
    fs = FieldSpec.smooth_step(0.5, 1.0, 0.0, w)
    assert abs(eval_B(fs, -10 * w) - 0.5) < 1e-9
    assert abs(eval_B(fs, 10 * w) - 1.0) < 1e-9
    xs = np.linspace(-5, 5, 1001)
    assert np.all(np.diff(eval_B(fs, xs)) >= 0)


def test_custom_field_range_error():
    fs = FieldSpec.sampled([-1, 0, 1], [0.5, 0.75, 1.0])
    with pytest.raises(RangeError):
        eval_B(fs, 2.0)


def test_bad_specs():
    with pytest.raises(ConfigurationError):
        FieldSpec("smooth-step", 0.0, 1.0)
    with pytest.raises(ConfigurationError):
        FieldSpec("smooth-step", 1.0, 0.5)
    with pytest.raises(ConfigurationError):
        FieldSpec("wavy", 0.5, 1.0)
    with pytest.raises(ConfigurationError):
        FieldSpec.sampled([0, 0], [1, 1])


def test_b_identity_for_unit_field(unit_pot):
    xs = np.linspace(-20, 20, 41)
    assert np.allclose(eval_b(unit_pot, xs), xs, atol=1e-12)
    assert abs(invert_b(unit_pot, 3.5) - 3.5) < 1e-12


def test_hard_step_inverse():
    pot = PotentialB(FieldSpec.smooth_step(0.5, 1.0, 0.0, 0.0))
    assert abs(eval_b(pot, -2.0) + 1.0) < 1e-12
    assert abs(invert_b(pot, -1.0) + 2.0) < 1e-10


def test_x_plus_cases():
    assert x_plus(FieldSpec.smooth_step(0.5, 1.0, 0.0, 0.0)) == 0.0
    xs = np.linspace(-5, 5, 201)
    assert x_plus(FieldSpec.sampled(xs, 1 - 0.5 * np.exp(-xs ** 2), B_plus=1.0)) == math.inf
    assert x_plus(FieldSpec.constant(1.0)) == -math.inf
    assert x_plus(FieldSpec.smooth_step(0.5, 1.0, -0.5, 0.05)) == pytest.approx(0.0, abs=1e-15)


def test_hypotheses_flags():
    flags = FieldSpec.smooth_step(0.5, 1.0, 0.0, 1.0).hypotheses()
    assert all(flags.values())


def test_custom_field_b_matches_quadrature():
    xs = np.linspace(-5, 5, 201)
    fs = FieldSpec.sampled(xs, 0.75 + 0.25 * np.tanh(xs))
    pot = PotentialB(fs)
    from scipy.integrate import quad
    ref = quad(lambda t: eval_B(fs, t), 0, 3.3, epsabs=1e-12)[0]
    assert abs(pot.b(3.3) - ref) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.floats(-200, 200), st.floats(0.1, 1.0), st.floats(0.01, 2.0))
def test_inverse_roundtrip(k, bm, w):
    pot = PotentialB(FieldSpec.smooth_step(bm, 1.0, 0.3, w))
    t = pot.inverse(k)
    assert abs(pot.b(t) - k) <= 1e-9 * max(1.0, abs(k))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=20, unique=True))
def test_b_monotone_and_bounded(xs):
    pot = PotentialB(FieldSpec.smooth_step(0.5, 1.0, 0.0, 0.7))
    xs = np.sort(np.array(xs))
    b = pot.b(xs)
    assert np.all(np.diff(b) >= 0)
    sep = np.diff(xs) > 1e-6
    assert np.all(np.diff(b)[sep] > 0)
    # B_minus |x| <= |b(x)| <= B_plus |x|
    assert np.all(np.abs(b) >= 0.5 * np.abs(xs) - 1e-9)
    assert np.all(np.abs(b) <= np.abs(xs) + 1e-9)
