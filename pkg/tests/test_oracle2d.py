import numpy as np
import pytest

from gapcount.errors import ConfigurationError
from gapcount.field import FieldSpec, PotentialB
from gapcount.oracle2d import (Box2D, assemble_H, box_for_spacing, oracle_count,
                               oracle_difference, refinement_study)
from gapcount.potentials import GaussianV

SMALL = Box2D(3.0, 3.0, 24, 24)


def test_zero_field_is_laplacian():
    op = assemble_H(None, None, SMALL)
    A = op.dense()
    hx, hy = SMALL.hx, SMALL.hy
    nx, ny = SMALL.nx, SMALL.ny
    Tx = (2 * np.eye(nx) - np.eye(nx, k=1) - np.eye(nx, k=-1)) / hx ** 2
    Ty = (2 * np.eye(ny) - np.eye(ny, k=1) - np.eye(ny, k=-1)) / hy ** 2
    L = np.kron(Tx, np.eye(ny)) + np.kron(np.eye(nx), Ty)
    assert np.max(np.abs(A - L)) < 1e-12


@pytest.mark.parametrize("scheme", ["peierls", "expanded"])
def test_hermitian(step_pot, scheme):
    A = assemble_H(step_pot, GaussianV(0.3, 0.8), SMALL, scheme=scheme).dense()
    assert np.max(np.abs(A - A.conj().T)) < 1e-12


def test_banded_matches_dense(step_pot):
    op = assemble_H(step_pot, GaussianV(0.3, 0.8), SMALL)
    e1 = op.eigenvalues("banded")
    e2 = np.linalg.eigvalsh(op.dense())
    assert np.allclose(e1, e2, atol=1e-9)


def test_cap():
    with pytest.raises(ConfigurationError):
        assemble_H(None, None, Box2D(5, 5, 80, 80))


def test_gauge_shift(step_pot):
    # a constant added to b is undone by exp(i c y); the Peierls hop is exactly covariant
    e1 = assemble_H(step_pot, None, SMALL).eigenvalues()
    e2 = assemble_H(step_pot, None, SMALL, b_shift=0.7).eigenvalues()
    assert np.max(np.abs(e1 - e2)) < 1e-8


def test_landau_level_from_box():
    pot = PotentialB(FieldSpec.constant(1.0))
    lows = []
    for L, n in ((4.0, 40), (6.0, 60)):
        lows.append(assemble_H(pot, None, Box2D(L, L, n, n)).eigenvalues()[0])
    assert lows[1] < lows[0]
    assert abs(lows[1] - 1.0) < 0.05


def test_zero_potential_difference(step_pot):
    H0 = assemble_H(step_pot, None, SMALL)
    H0b = assemble_H(step_pot, None, SMALL)
    for iv in ((1.01, 1.5), (1.1, 1.5)):
        assert oracle_difference(oracle_count(H0, H0b, iv)) == 0


def test_monotone_counts(step_pot):
    V = GaussianV(0.05, 0.8, x_center=1.0)
    H = assemble_H(step_pot, V, SMALL)
    H0 = assemble_H(step_pot, None, SMALL)
    eH, e0 = H.eigenvalues(), H0.eigenvalues()
    assert np.all(eH >= e0 - 1e-10)


def test_refinement_zero_potential(step_pot):
    boxes = [box_for_spacing((-2, 4), (-3, 3), 0.25), box_for_spacing((-2, 4), (-4, 4), 0.25)]
    rep = refinement_study(step_pot, None, boxes, [(1.01, 1.5), (1.1, 1.5)])
    assert rep.stable and all(r[5] == 0 for r in rep.rows)
    with pytest.raises(ConfigurationError):
        refinement_study(step_pot, None, boxes[:1], [(1.01, 1.5)])
