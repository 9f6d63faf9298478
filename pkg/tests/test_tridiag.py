import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gapcount import tridiag


def _random_tridiag(seed, n):
    rng = np.random.default_rng(seed)
    return rng.normal(size=n) * 3, rng.normal(size=n - 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 40))
def test_sturm_count_matches_dense(seed, n):
    d, e = _random_tridiag(seed, n)
    ev = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    for sigma in (-1.0, 0.0, 0.7, ev[n // 2] + 1e-7):
        assert tridiag.sturm_count(d, e, sigma) == np.count_nonzero(ev < sigma)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 40))
def test_bisection_eigenvalues(seed, n):
    d, e = _random_tridiag(seed, n)
    ev = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    for j in (1, n // 2 + 1, n):
        assert abs(tridiag.eigenvalue(d, e, j) - ev[j - 1]) < 1e-10


def test_inverse_iteration_sign_and_residual():
    d, e = _random_tridiag(7, 30)
    A = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    lam = tridiag.eigenvalue(d, e, 3)
    v = tridiag.inverse_iteration(d, e, lam)
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    assert v[np.argmax(np.abs(v))] > 0
    assert np.linalg.norm(A @ v - lam * v) < 1e-8


def test_gershgorin_encloses():
    d, e = _random_tridiag(3, 20)
    lo, hi = tridiag.gershgorin(d, e)
    ev = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    assert lo <= ev[0] and ev[-1] <= hi
