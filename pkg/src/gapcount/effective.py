"""Effective Hamiltonian E_j + c V_j on a momentum lattice and its eigenvalue counts.

The anti-Wick operator with symbol V acts on L^2(R, dk) with kernel

    K(k, k') = sqrt(B_+) / (2 pi) * int V^(x, k - k') phi_j(sqrt(B_+)(x - b^-1(k)))
                                               phi_j(sqrt(B_+)(x - b^-1(k'))) dx,

where V^(x, q) = int V(x, xi) exp(-i q xi) dxi. On a lattice of spacing dk the
matrix is ``dk * K(k_i, k_l)``.
"""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np
from numba import njit
from scipy import linalg

from .errors import ConfigurationError, NumericalError
from .fiber import compute_bands, hermite_phi
from .field import x_plus

TIE_SLACK = 1e-12
DEFAULT_DELTA = 0.1
# states are negligible beyond this many magnetic lengths from their center
_STATE_RADIUS = 9.5


@dataclass(frozen=True)
class KGrid:
    """Uniform momentum lattice on [K_min, K_max] with ``n_k`` points.

    ``xi_cut`` is the symbol cutoff used for families without compact support.
    """

    K_min: float
    K_max: float
    n_k: int
    xi_cut: float = None

    def __post_init__(self):
        if self.n_k < 2 or not self.K_max > self.K_min:
            raise ConfigurationError("k-grid needs n_k >= 2 and K_max > K_min", key="k_grid")

    @property
    def points(self):
        return np.linspace(self.K_min, self.K_max, self.n_k)

    @property
    def dk(self):
        return (self.K_max - self.K_min) / (self.n_k - 1)

    def refined(self, factor=2):
        return KGrid(self.K_min, self.K_max, factor * (self.n_k - 1) + 1, self.xi_cut)


@njit(cache=True)
def _assemble_real(phi, wv, lo, hi, D):
    n = phi.shape[0]
    K = np.zeros((n, n))
    for i in range(n):
        for d in range(D + 1):
            l = i + d
            if l >= n:
                break
            a = max(lo[i], lo[l])
            b = min(hi[i], hi[l])
            if a >= b:
                break
            s = 0.0
            for m in range(a, b):
                s += wv[d, m] * phi[i, m] * phi[l, m]
            K[i, l] = s
            K[l, i] = s
    return K


@njit(cache=True)
def _assemble_complex(phi, wv, lo, hi, D):
    n = phi.shape[0]
    K = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for d in range(D + 1):
            l = i + d
            if l >= n:
                break
            a = max(lo[i], lo[l])
            b = min(hi[i], hi[l])
            if a >= b:
                break
            s = 0.0 + 0.0j
            for m in range(a, b):
                s += np.conj(wv[d, m]) * phi[i, m] * phi[l, m]
            K[i, l] = s
            K[l, i] = np.conj(s)
    return K


def x_nodes(V, lo, hi, panel, order=8):
    """Composite Gauss-Legendre nodes on [lo, hi] with breaks at V's x-events."""
    breaks = [lo, hi] + [e for e in V.x_breakpoints() if lo < e < hi]
    for e in V.sqrt_edges():
        # geometric grading towards square-root endpoints
        for m in range(1, 14):
            for s in (-1, 1):
                p = e + s * panel * 0.5 ** m
                if lo < p < hi:
                    breaks.append(p)
    breaks = np.unique(np.asarray(breaks, dtype=float))
    g, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(1, int(math.ceil((b - a) / panel)))
        edges = np.linspace(a, b, m + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        xs.append((mid[:, None] + half[:, None] * g[None, :]).ravel())
        ws.append((half[:, None] * w[None, :]).ravel())
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def _kernel_once(V, pot, j, kg, panel, order, eps_V):
    ks = kg.points
    B = pot.B_plus
    sB = math.sqrt(B)
    t = pot.inverse(ks)
    radius = (_STATE_RADIUS + 1.2 * math.sqrt(2 * j - 1)) / sB
    lo, hi = t[0] - radius, t[-1] + radius
    if V.sup_V == 0:
        return np.zeros((ks.size, ks.size))
    ext = V.x_extent(eps_V * V.sup_V)
    if ext is None:
        return np.zeros((ks.size, ks.size))
    lo, hi = max(lo, ext[0]), min(hi, ext[1])
    if not hi > lo:
        return np.zeros((ks.size, ks.size))
    x, w = x_nodes(V, lo, hi, panel, order)
    ilo = np.searchsorted(x, t - radius).astype(np.int64)
    ihi = np.searchsorted(x, t + radius).astype(np.int64)
    # largest lattice offset whose states still overlap
    last = np.searchsorted(t, t + 2 * radius, side="right") - 1
    D = int(max(0, np.max(last - np.arange(ks.size))))
    phi = np.zeros((ks.size, x.size))
    for i in range(ks.size):
        a, b = ilo[i], ihi[i]
        phi[i, a:b] = hermite_phi(j, sB * (x[a:b] - t[i]))
    table = V.xi_table(x, kg.dk, D, xi_cut=kg.xi_cut)
    pref = kg.dk * sB / (2 * math.pi)
    wv = np.ascontiguousarray((pref * w[:, None] * table).T)
    if np.iscomplexobj(wv):
        K = _assemble_complex(phi, wv, ilo, ihi, D)
        if np.max(np.abs(K.imag)) == 0:
            K = K.real.copy()
    else:
        K = _assemble_real(phi, wv, ilo, ihi, D)
    return K


@dataclass
class KernelResult:
    matrix: np.ndarray
    eps_quad: float
    panel: float
    refinements: int


def antiwick_kernel(V, pot, j, kg, panel=None, order=8, eps_V=1e-12, entry_tol=1e-8,
                    max_refinements=4, check=True):
    """Lattice matrix of the anti-Wick operator V_j (Hermitian).

    With ``check`` the x-panels are halved until the entries stabilize to
    ``entry_tol * sup_V``; ``eps_quad`` is the max row sum of the last change,
    an upper bound for the shift of any eigenvalue.
    """
    if j < 1:
        raise ConfigurationError("band index must be >= 1", key="j")
    panel = 0.4 / math.sqrt(pot.B_plus) if panel is None else float(panel)
    K = _kernel_once(V, pot, j, kg, panel, order, eps_V)
    if not check or V.sup_V == 0:
        return KernelResult(K, 0.0, panel, 0)
    diff = np.inf
    for r in range(1, max_refinements + 1):
        panel *= 0.5
        K2 = _kernel_once(V, pot, j, kg, panel, order, eps_V)
        delta = np.abs(K2 - K)
        diff = float(delta.max()) if delta.size else 0.0
        eps = float(delta.sum(axis=1).max()) if delta.size else 0.0
        K = K2
        if diff <= entry_tol * V.sup_V:
            return KernelResult(K, eps, panel, r)
    raise NumericalError("kernel quadrature did not stabilize",
                         {"max_entry_change": diff, "panel": panel})


def gap_width(pot, j):
    """Width of the spectral gap above band j: B_minus(2j+1) - B_plus(2j-1)."""
    return pot.B_minus * (2 * j + 1) - pot.B_plus * (2 * j - 1)


@dataclass
class EffectiveOperator:
    """diag(E_j(k_i)) + coupling * kernel on a momentum lattice."""

    k_grid: KGrid
    j: int
    band_diag: np.ndarray
    kernel: np.ndarray
    E_plus: float
    gap: float
    sup_V: float
    coupling: float = 1.0
    eps_quad: float = 0.0
    _spectra: dict = dc_field(default_factory=dict, repr=False)

    def with_coupling(self, c):
        op = EffectiveOperator(self.k_grid, self.j, self.band_diag, self.kernel, self.E_plus,
                               self.gap, self.sup_V, float(c), self.eps_quad)
        op._spectra = self._spectra
        return op

    def eigenvalues(self, c=None):
        c = self.coupling if c is None else float(c)
        if c not in self._spectra:
            A = c * self.kernel
            A[np.diag_indices_from(A)] += self.band_diag
            self._spectra[c] = linalg.eigvalsh(A, overwrite_a=True, check_finite=False)
        return self._spectra[c]

    def kernel_eigenvalues(self):
        if "kernel" not in self._spectra:
            self._spectra["kernel"] = linalg.eigvalsh(self.kernel, check_finite=False)
        return self._spectra["kernel"]


def build_effective(V, pot, j, kg, coupling=1.0, band_h=None, **kernel_kw):
    """Assemble the effective operator for band ``j`` on lattice ``kg``."""
    ks = kg.points
    bands = compute_bands(pot, ks, js=(j,), h=band_h, saturate=True)
    kr = antiwick_kernel(V, pot, j, kg, **kernel_kw)
    return EffectiveOperator(kg, j, bands.energies[:, 0].copy(), kr.matrix,
                             float(bands.E_plus[0]), gap_width(pot, j), V.sup_V,
                             float(coupling), kr.eps_quad)


def _check_lambda(op, lam):
    if not lam > 0:
        raise ConfigurationError("lambda must be positive", key="lambda")
    if not lam < op.gap:
        raise ConfigurationError(
            f"lambda = {lam} is not inside the gap of width {op.gap}", key="lambda")


def effective_count(op, lam, c=None):
    """Number of eigenvalues strictly above E_plus + lambda (ties within 1e-12 excluded)."""
    _check_lambda(op, lam)
    ev = op.eigenvalues(c)
    return int(np.count_nonzero(ev > op.E_plus + lam + TIE_SLACK))


@dataclass
class CountingCurve:
    """Corridor counts per lambda for couplings 1 - delta and 1 + delta."""

    lambdas: np.ndarray
    count_lower: np.ndarray
    count_upper: np.ndarray
    delta: float

    def rows(self):
        return [(float(l), int(a), int(b), math.sqrt(abs(math.log(l))))
                for l, a, b in zip(self.lambdas, self.count_lower, self.count_upper)]

    @property
    def count_mid(self):
        return 0.5 * (self.count_lower + self.count_upper)


def counting_curve(V, pot, j, kg, lambdas, delta=DEFAULT_DELTA, op=None, **build_kw):
    """Corridor counts over ``lambdas``; reuses ``op`` when given."""
    if not 0 <= delta < 1:
        raise ConfigurationError("delta must lie in [0, 1)", key="delta")
    lambdas = np.asarray(lambdas, dtype=float)
    if op is None:
        op = build_effective(V, pot, j, kg, **build_kw)
    lo = np.array([effective_count(op, l, 1.0 - delta) for l in lambdas])
    hi = np.array([effective_count(op, l, 1.0 + delta) for l in lambdas])
    return CountingCurve(lambdas, lo, hi, float(delta))


def last_decades(lambdas, decades=2.0):
    lambdas = np.asarray(lambdas, dtype=float)
    return lambdas <= lambdas.min() * 10.0 ** decades * (1 + 1e-9)


def finiteness_probe(V, pot, j, kg, lambdas, delta=DEFAULT_DELTA, curve=None, **build_kw):
    """True iff the upper-corridor count is constant over the last two decades of ``lambdas``."""
    if curve is None:
        curve = counting_curve(V, pot, j, kg, lambdas, delta, **build_kw)
    sel = last_decades(curve.lambdas)
    vals = curve.count_upper[sel]
    return bool(np.all(vals == vals[0]))


def auto_kgrid(V, pot, j, lambdas, oversample=4.0, eps_V=1e-12, band_h=None, max_nk=20000):
    """Momentum lattice covering V and the band-gap tail.

    Range: states from min(x_plus, left edge of V) - 6 magnetic lengths up to
    the larger of the right edge of V + 6 lengths and the point where the gap
    falls below 0.1 min(lambdas). Spacing: (pi / oversample) / xi_max for
    compactly supported V; for power laws the symbol is cut where it drops
    below 0.8 min(lambdas) and the spacing fits one period around the cut.
    """
    lam_min = float(np.min(lambdas))
    B = pot.B_plus
    ell = 1.0 / math.sqrt(B)
    xp = x_plus(pot.field)
    level = eps_V * V.sup_V if V.compact else 0.8 * lam_min
    ext = V.x_extent(level) if V.sup_V > 0 else None
    anchor = xp if math.isfinite(xp) else 0.0
    if ext is None:
        ext = (anchor, anchor)
    t_lo = min(ext[0], anchor) - 6 * ell
    t_hi = max(ext[1], anchor) + 6 * ell
    if math.isfinite(xp):
        s = xp
        while True:
            g = compute_bands(pot, [pot.b(s)], js=(j,), h=band_h).gaps[0, 0]
            if g < 0.1 * lam_min or s > xp + 40 * ell:
                break
            s += 0.25 * ell
        t_hi = max(t_hi, s)
    xi_cut = None
    if V.compact:
        xi_max = max(V.xi_extent(level), ell)
        dk = min(math.pi / (oversample * xi_max), 0.5 * math.sqrt(B))
    else:
        xi_cut = V.xi_extent(level) + 6 * ell
        dk = min(math.pi / (xi_cut + ell), 0.5 * math.sqrt(B))
    K_min, K_max = pot.b(t_lo), pot.b(t_hi)
    n_k = int(math.ceil((K_max - K_min) / dk)) + 1
    if n_k > max_nk:
        raise ConfigurationError(f"k-grid needs {n_k} points (cap {max_nk})", key="k_grid")
    return KGrid(float(K_min), float(K_max), max(n_k, 2), xi_cut)
