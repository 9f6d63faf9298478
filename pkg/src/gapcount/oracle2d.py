"""Brute-force reference: H = H0 + V discretized on a Dirichlet rectangle.

Unknowns are ordered x-major (index = i * ny + m), so the matrix is banded with
half-bandwidth ny. The magnetic y-hopping uses the Peierls phase
exp(-i b(x_i) h_y), which is exactly gauge covariant; the expanded
central-difference form of (-i d/dy - b)^2 is available as ``scheme="expanded"``.
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np
from scipy import linalg

from .errors import ConfigurationError

DEFAULT_CAP = 4900
SCHEMES = ("peierls", "expanded")


@dataclass(frozen=True)
class Box2D:
    """Rectangle [xc - Lx, xc + Lx] x [yc - Ly, yc + Ly] with nx * ny interior points."""

    Lx: float
    Ly: float
    nx: int
    ny: int
    x_center: float = 0.0
    y_center: float = 0.0

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3 or not (self.Lx > 0 and self.Ly > 0):
            raise ConfigurationError("box needs nx, ny >= 3 and positive half-widths", key="box")

    @property
    def hx(self):
        return 2.0 * self.Lx / (self.nx + 1)

    @property
    def hy(self):
        return 2.0 * self.Ly / (self.ny + 1)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def xs(self):
        return self.x_center - self.Lx + self.hx * np.arange(1, self.nx + 1)

    @property
    def ys(self):
        return self.y_center - self.Ly + self.hy * np.arange(1, self.ny + 1)


def box_for_spacing(x_range, y_range, h):
    """Box covering the given ranges with spacing close to ``h``."""
    x0, x1 = x_range
    y0, y1 = y_range
    nx = max(3, int(round((x1 - x0) / h)) - 1)
    ny = max(3, int(round((y1 - y0) / h)) - 1)
    return Box2D(0.5 * (x1 - x0), 0.5 * (y1 - y0), nx, ny, 0.5 * (x0 + x1), 0.5 * (y0 + y1))


def advisory_Ly(V, B_minus, level=1e-6):
    """Half-width suggested for the y-window: 4 times the xi-extent of V plus 2 pi / sqrt(B_minus)."""
    return 4.0 * V.xi_extent(level * max(V.sup_V, 1e-300)) + 2 * math.pi / math.sqrt(B_minus)


@dataclass
class Discrete2DOperator:
    """Hermitian matrix in upper banded storage (LAPACK layout, bandwidth ``ny``)."""

    box: Box2D
    banded: np.ndarray
    _spectrum: np.ndarray = dc_field(default=None, repr=False)

    @property
    def bandwidth(self):
        return self.banded.shape[0] - 1

    def dense(self):
        u = self.bandwidth
        n = self.banded.shape[1]
        A = np.zeros((n, n), dtype=self.banded.dtype)
        for d in range(u + 1):
            diag = self.banded[u - d, d:]
            A[np.arange(n - d), np.arange(d, n)] = diag
            if d:
                A[np.arange(d, n), np.arange(n - d)] = np.conj(diag)
        return A

    def eigenvalues(self, solver="banded"):
        if self._spectrum is None:
            if solver == "dense":
                self._spectrum = linalg.eigvalsh(self.dense())
            else:
                self._spectrum = linalg.eig_banded(self.banded, lower=False, eigvals_only=True)
        return self._spectrum


def assemble_H(pot, V, box, scheme="peierls", cap=DEFAULT_CAP, b_shift=0.0):
    """Assemble -d^2/dx^2 + (-i d/dy - b(x))^2 + V(x, y) on ``box``.

    ``b_shift`` adds a constant to b (gauge test).
    """
    if box.size > cap:
        raise ConfigurationError(f"box has {box.size} unknowns, cap is {cap}", key="box")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}", key="scheme")
    nx, ny = box.nx, box.ny
    hx, hy = box.hx, box.hy
    x, y = box.xs, box.ys
    b = pot.b(x) + b_shift if pot is not None else np.zeros(nx) + b_shift
    n = nx * ny
    ab = np.zeros((ny + 1, n), dtype=complex)
    diag = np.full((nx, ny), 2.0 / hx ** 2 + 2.0 / hy ** 2)
    if V is not None:
        diag += V(x[:, None], y[None, :])
    if scheme == "expanded":
        diag += (b ** 2)[:, None]
        hop = -1.0 / hy ** 2 + 1j * b / hy
    else:
        hop = -np.exp(-1j * b * hy) / hy ** 2
    ab[ny] = diag.ravel()
    # y-neighbours: entry (i*ny + m, i*ny + m + 1) stored in column m + 1
    up = np.zeros((nx, ny), dtype=complex)
    up[:, 1:] = hop[:, None]
    ab[ny - 1] = up.ravel()
    # x-neighbours: offset ny
    ab[0, ny:] = -1.0 / hx ** 2
    return Discrete2DOperator(box, ab)


def oracle_count(opH, opH0, interval, solver="banded"):
    """Eigenvalue counts of H and H0 in the open interval (a, b)."""
    a, b = interval
    eH = opH.eigenvalues(solver)
    e0 = opH0.eigenvalues(solver)
    cH = int(np.count_nonzero((eH > a) & (eH < b)))
    c0 = int(np.count_nonzero((e0 > a) & (e0 < b)))
    return cH, c0


def oracle_difference(counts):
    cH, c0 = counts
    return max(cH - c0, 0)


def oracle_rows(pot, V, box, intervals, box_id=0, scheme="peierls", cap=DEFAULT_CAP):
    """CSV rows box_id, a, b, count_H, count_H0, diff for each interval."""
    opH = assemble_H(pot, V, box, scheme, cap)
    opH0 = assemble_H(pot, None, box, scheme, cap)
    rows = []
    for a, b in intervals:
        cH, c0 = oracle_count(opH, opH0, (a, b))
        rows.append((box_id, float(a), float(b), cH, c0, max(cH - c0, 0)))
    return rows


@dataclass
class RefinementReport:
    rows: list
    flagged: list

    @property
    def stable(self):
        return not self.flagged


def refinement_study(pot, V, boxes, intervals, scheme="peierls", cap=DEFAULT_CAP, tol=1):
    """Counts per (box, interval); flags intervals whose differences spread by more than ``tol``."""
    if len(boxes) < 2:
        raise ConfigurationError("refinement study needs at least two boxes", key="boxes")
    rows = []
    for bid, box in enumerate(boxes):
        rows.extend(oracle_rows(pot, V, box, intervals, bid, scheme, cap))
    flagged = []
    for a, b in intervals:
        diffs = [r[5] for r in rows if r[1] == a and r[2] == b]
        if max(diffs) - min(diffs) > tol:
            flagged.append((float(a), float(b), diffs))
    return RefinementReport(rows, flagged)
