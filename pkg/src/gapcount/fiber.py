"""Fiber operators h(k) = -d^2/dx^2 + (b(x) - k)^2, band functions and oscillator diagnostics."""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from . import tridiag
from .errors import ConfigurationError, NumericalError
from .field import PotentialB, eval_B, x_plus

DEFAULT_J_MAX = 4
GAP_UNDERFLOW = 1e-14


@dataclass(frozen=True)
class Grid1D:
    """Uniform interior grid on [center - L, center + L] with Dirichlet ends."""

    L: float
    n: int
    center: float = 0.0

    def __post_init__(self):
        if self.n < 3:
            raise ConfigurationError("grid needs n >= 3", key="n")
        if not self.L > 0:
            raise ConfigurationError("grid half-width must be positive", key="L")

    @property
    def h(self):
        return 2.0 * self.L / (self.n + 1)

    @property
    def points(self):
        return self.center - self.L + self.h * np.arange(1, self.n + 1)

    def coarsened(self):
        """Grid with (n - 1) // 2 points on the same interval (every other point when n is odd)."""
        return Grid1D(self.L, (self.n - 1) // 2, self.center)


def margin_rule(B_minus, B_plus, j_max=DEFAULT_J_MAX):
    """Distance from the state center to the Dirichlet ends."""
    return max(12.0 / math.sqrt(B_minus), 12.0 / math.sqrt(B_plus) * math.sqrt(2 * j_max + 1))


@dataclass
class FiberOperator:
    """Finite-difference h(k): diagonal ``2/h^2 + (b(x_i) - k)^2``, couplings ``-1/h^2``."""

    grid: Grid1D
    k: float
    diagonal: np.ndarray
    potential: np.ndarray

    @property
    def off(self):
        return -1.0 / self.grid.h ** 2

    @property
    def offdiagonal(self):
        return np.full(self.grid.n - 1, self.off)

    def dense(self):
        n = self.grid.n
        return (np.diag(self.diagonal) + np.diag(self.offdiagonal, 1)
                + np.diag(self.offdiagonal, -1))

    def apply(self, v):
        out = self.diagonal * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out


def _check_cover(pot, grid, center, margin):
    lo, hi = grid.center - grid.L, grid.center + grid.L
    if not (lo + margin <= center <= hi - margin):
        raise ConfigurationError(
            f"grid [{lo:.6g}, {hi:.6g}] does not cover b^-1(k) = {center:.6g} with margin {margin:.6g}",
            key="L")


def assemble_fiber(pot, grid, k, margin=None):
    """Three-point discretization of h(k) on ``grid``.

    ``margin`` defaults to the band-1 classical turning radius ``1/sqrt(B_minus)``.
    """
    t = pot.inverse(k)
    _check_cover(pot, grid, t, 1.0 / math.sqrt(pot.B_minus) if margin is None else margin)
    w = (pot.b(grid.points) - k) ** 2
    return FiberOperator(grid, float(k), 2.0 / grid.h ** 2 + w, w)


def assemble_oscillator(pot, grid, k, margin=None):
    """Discretization of h_inf(k) = -d^2/dx^2 + B_plus^2 (x - b^-1(k))^2 on ``grid``."""
    t = pot.inverse(k)
    _check_cover(pot, grid, t, 0.0 if margin is None else margin)
    w = (pot.B_plus * (grid.points - t)) ** 2
    return FiberOperator(grid, float(k), 2.0 / grid.h ** 2 + w, w)


def eigen_band(op, j, tol=1e-12):
    """j-th eigenvalue (Sturm bisection) and unit eigenvector (inverse iteration)."""
    if not 1 <= j <= op.grid.n:
        raise ConfigurationError(f"band index {j} outside 1..{op.grid.n}", key="j")
    e = op.offdiagonal
    E = tridiag.eigenvalue(op.diagonal, e, j, tol=tol)
    v = tridiag.inverse_iteration(op.diagonal, e, E)
    return E, v


def hermite_phi(j, t):
    """Normalized Hermite function phi_j (j >= 1) by the three-term recurrence on phi."""
    if j < 1:
        raise ValueError("j must be >= 1")
    t = np.asarray(t, dtype=float)
    prev = np.zeros_like(t)
    cur = math.pi ** -0.25 * np.exp(-0.5 * t * t)
    for n in range(1, j):
        prev, cur = cur, math.sqrt(2.0 / n) * t * cur - math.sqrt((n - 1) / n) * prev
    return cur if cur.ndim else float(cur)


def hermite_table(j_max, t):
    """Array of phi_1..phi_{j_max} at ``t``, shape (j_max,) + t.shape."""
    t = np.asarray(t, dtype=float)
    out = np.empty((j_max,) + t.shape)
    prev = np.zeros_like(t)
    cur = math.pi ** -0.25 * np.exp(-0.5 * t * t)
    out[0] = cur
    for n in range(1, j_max):
        prev, cur = cur, math.sqrt(2.0 / n) * t * cur - math.sqrt((n - 1) / n) * prev
        out[n] = cur
    return out


def oscillator_state(j, k, pot, grid):
    """Grid samples of B_plus^(1/4) phi_j(sqrt(B_plus)(x - b^-1(k))), unit grid norm."""
    t = pot.inverse(k)
    if not grid.center - grid.L < t < grid.center + grid.L:
        raise ConfigurationError("oscillator center lies outside the grid", key="k")
    s = math.sqrt(pot.B_plus)
    v = s ** 0.5 * hermite_phi(j, s * (grid.points - t))
    return v / np.linalg.norm(v)


def projection_distance(u, v):
    """Operator-norm distance between the rank-one projections onto unit vectors u, v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    # sqrt(1 - <u,v>^2) without cancellation
    d = np.linalg.norm(u - v) * np.linalg.norm(u + v) / 2.0
    return float(min(d, 1.0))


@dataclass
class BandTable:
    """Band functions on a momentum grid.

    ``energies`` are E_plus - gaps where ``gaps`` come from the identity
    ``E_inf - E = <psi_inf, (W_inf - W) psi> / <psi_inf, psi>`` (Richardson
    extrapolated); ``raw_energies`` are extrapolated direct eigenvalues.
    """

    k: np.ndarray
    js: tuple
    energies: np.ndarray
    gaps: np.ndarray
    raw_energies: np.ndarray
    E_plus: np.ndarray
    B_minus: float
    B_plus: float
    centers: np.ndarray
    grids: list = dc_field(default_factory=list, repr=False)
    gaps_fine: np.ndarray = None
    vectors: list = dc_field(default=None, repr=False)
    osc_vectors: list = dc_field(default=None, repr=False)

    def column(self, j):
        if j not in self.js:
            raise ConfigurationError(f"band {j} not in table", key="j")
        return self.js.index(j)

    def index_of(self, k):
        i = int(np.argmin(np.abs(self.k - k)))
        if abs(self.k[i] - k) > 1e-12 * max(1.0, abs(k)):
            raise ConfigurationError(f"momentum {k} not in table", key="k")
        return i

    def to_rows(self):
        rows = []
        for i, kv in enumerate(self.k):
            for c, j in enumerate(self.js):
                ratio = convergence_ratio(self, j, kv) if self.vectors is not None else None
                rows.append((float(kv), j, float(self.energies[i, c]), float(self.gaps[i, c]), ratio))
        return rows


def _solve_window(pot, grid, k, t, js, tol, want_vectors):
    x = grid.points
    h2 = grid.h ** 2
    w = (pot.b(x) - k) ** 2
    w_inf = (pot.B_plus * (x - t)) ** 2
    e = np.full(grid.n - 1, -1.0 / h2)
    d, d_inf = 2.0 / h2 + w, 2.0 / h2 + w_inf
    J = len(js)
    lo = np.array([[pot.B_minus * (2 * j - 1) * 0.9 - 1e-3 for j in js]])
    hi = np.array([[pot.B_plus * (2 * j - 1) + 1e-6 for j in js]])
    E = tridiag.eigenvalues_batch(d[None, :], e, js, (lo, hi), tol)[0]
    E_inf = tridiag.eigenvalues_batch(d_inf[None, :], e, js, (lo, hi), tol)[0]
    gaps = np.empty(J)
    vecs, ovecs = [], []
    # W_inf - W vanishes identically where B == B_plus; drop the rounding noise there
    dw = np.where(x < x_plus(pot.field), w_inf - w, 0.0)
    for c in range(J):
        v = tridiag.inverse_iteration(d, e, E[c])
        vi = tridiag.inverse_iteration(d_inf, e, E_inf[c])
        gaps[c] = np.dot(vi * dw, v) / np.dot(vi, v)
        if want_vectors:
            vecs.append(v)
            ovecs.append(vi)
    return E, gaps, vecs, ovecs


def _romberg(values, hs):
    """Eliminate the h^2, h^4, ... terms from values on successively coarser grids."""
    T = [np.asarray(v, dtype=float) for v in values]
    for p in range(1, len(T)):
        nxt = []
        for a in range(len(T) - 1):
            r = (hs[a + p] / hs[a]) ** 2
            nxt.append((r * T[a] - T[a + 1]) / (r - 1.0))
        T = nxt
    return T[0]


def compute_bands(pot, ks, js=None, j_max=DEFAULT_J_MAX, h=None, n=None, margin=None,
                  centered=True, richardson=True, vectors=False, tol=1e-12, saturate=False):
    """Band functions E_j(k) for every momentum in ``ks``.

    Parameters
    ----------
    pot : PotentialB
    ks : array_like
        Momenta.
    js : sequence of int, optional
        Band indices, default ``1..j_max``.
    h, n : float, int
        Grid spacing or point count (exactly one is used; ``n`` wins).
    margin : float, optional
        Distance from b^-1(k) to the Dirichlet ends, default :func:`margin_rule`.
    centered : bool
        Window centered at b^-1(k) of half-width ``margin``; otherwise the
        symmetric interval [-L, L] with L = |b^-1(k)| + margin.
    richardson : bool or int
        Romberg levels over the nested grids n, (n-1)//2, ...; ``True`` means 2
        (error O(h^6)), ``False`` or 0 keeps the fine-grid values.
    vectors : bool
        Keep fine-grid eigenvectors and oscillator eigenvectors.
    saturate : bool
        Skip windows lying entirely in {x >= x_plus}, where h(k) equals the
        oscillator and the gap vanishes; their raw energies are reported as nan.
    """
    if not isinstance(pot, PotentialB):
        raise ConfigurationError("expected a PotentialB", key="pot")
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    js = tuple(range(1, j_max + 1)) if js is None else tuple(int(j) for j in js)
    if min(js) < 1:
        raise ConfigurationError("band index must be >= 1", key="j")
    m = margin_rule(pot.B_minus, pot.B_plus, max(js)) if margin is None else float(margin)
    if n is None and h is None:
        h = 0.05 / math.sqrt(pot.B_plus)
    levels = 2 if richardson is True else int(richardson)
    centers = pot.inverse(ks)
    K, J = ks.size, len(js)
    E_f = np.empty((K, J))
    g_f = np.empty((K, J))
    E_r = np.empty((K, J))
    g_r = np.empty((K, J))
    grids = []
    vecs = [] if vectors else None
    ovecs = [] if vectors else None
    xp = x_plus(pot.field)
    for i, (k, t) in enumerate(zip(ks, centers)):
        L = m if centered else abs(t) + m
        if saturate and not vectors and (t if centered else 0.0) - L >= xp:
            grids.append(None)
            E_f[i] = E_r[i] = np.nan
            g_f[i] = g_r[i] = 0.0
            continue
        if n is not None:
            npts = int(n)
        else:
            # n + 1 divisible by 2^levels keeps every coarse grid nested
            q = 1 << max(levels, 1)
            npts = q * int(math.ceil(2 * L / (q * h))) - 1
        grid = Grid1D(L, npts, t if centered else 0.0)
        grids.append(grid)
        E, g, v, ov = _solve_window(pot, grid, k, t, js, tol, vectors)
        E_f[i], g_f[i] = E, g
        if vectors:
            vecs.append(v)
            ovecs.append(ov)
        tabE, tabg, hs = [E], [g], [grid.h]
        cg = grid
        for _ in range(levels):
            cg = cg.coarsened()
            if cg.n < 3:
                break
            Ec, gc, _, _ = _solve_window(pot, cg, k, t, js, tol, False)
            tabE.append(Ec)
            tabg.append(gc)
            hs.append(cg.h)
        E_r[i] = _romberg(tabE, hs)
        g_r[i] = _romberg(tabg, hs)
    E_plus = np.array([pot.B_plus * (2 * j - 1) for j in js])
    gaps = np.maximum(g_r, 0.0)
    return BandTable(k=ks, js=js, energies=E_plus[None, :] - gaps, gaps=gaps,
                     raw_energies=E_r, E_plus=E_plus, B_minus=pot.B_minus, B_plus=pot.B_plus,
                     centers=np.asarray(centers, dtype=float), grids=grids,
                     gaps_fine=np.maximum(g_f, 0.0), vectors=vecs, osc_vectors=ovecs)


def convergence_ratio(bands, j, k):
    """||pi_j(k) - pi_j,inf(k)|| / (E_plus - E_j(k))^(1/2); None when the gap underflows."""
    if bands.vectors is None:
        raise ConfigurationError("band table was built without eigenvectors", key="vectors")
    i = bands.index_of(k)
    c = bands.column(j)
    gap = bands.gaps_fine[i, c]
    if gap < GAP_UNDERFLOW:
        return None
    return projection_distance(bands.vectors[i][c], bands.osc_vectors[i][c]) / math.sqrt(gap)


def comparison_check(pot1, pot2, k, j, h=None, margin=None, slack=1e-10):
    """Check E_j(k, b1) <= E_j(b2(b1^-1(k)), b2) on a shared grid."""
    t = pot1.inverse(k)
    k2 = pot2.b(t)
    m = margin_rule(min(pot1.B_minus, pot2.B_minus), max(pot1.B_plus, pot2.B_plus), j) \
        if margin is None else margin
    h = 0.05 / math.sqrt(max(pot1.B_plus, pot2.B_plus)) if h is None else h
    grid = Grid1D(m, 2 * int(math.ceil(m / h)) - 1, t)
    x = grid.points
    if np.any(eval_B(pot1.field, x) > eval_B(pot2.field, x) + 1e-12 * pot2.B_plus):
        raise ConfigurationError("comparison needs B1 <= B2 on the grid", key="pot1")
    E1, _ = eigen_band(assemble_fiber(pot1, grid, k, margin=0.0), j)
    E2, _ = eigen_band(assemble_fiber(pot2, grid, k2, margin=0.0), j)
    return bool(E1 <= E2 + slack)


def lambda_k_min_eig(pot, k, n=400, margin=None):
    """Smallest eigenvalue of h(k)^-1 - h_inf(k)^-1 on a shared grid (dense)."""
    t = pot.inverse(k)
    m = margin_rule(pot.B_minus, pot.B_plus, 1) if margin is None else margin
    grid = Grid1D(m, n, t)
    A = np.linalg.inv(assemble_fiber(pot, grid, k, margin=0.0).dense())
    A -= np.linalg.inv(assemble_oscillator(pot, grid, k).dense())
    return float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])


def fit_gap_decay(k, gap):
    """Least-squares fit of ln(gap) on (k^2, ln k, 1); returns (coefficients, residuals)."""
    k = np.asarray(k, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if np.any(gap <= 0) or np.any(k <= 0):
        raise NumericalError("gap decay fit needs positive k and gaps")
    A = np.column_stack([k * k, np.log(k), np.ones_like(k)])
    coef, *_ = np.linalg.lstsq(A, np.log(gap), rcond=None)
    return coef, np.log(gap) - A @ coef


def bands_csv_rows(bands):
    """Rows for the band CSV: k, j, E_j, gap, ratio."""
    return bands.to_rows()
