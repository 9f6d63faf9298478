"""Symmetric tridiagonal eigenvalues by Sturm counts, eigenvectors by inverse iteration."""

import numpy as np
from numba import njit
from scipy.linalg import lapack

from .errors import NumericalError

_PIVMIN = np.finfo(float).tiny * 1e4


@njit(cache=True)
def _count(d, e2, sigma, pivmin):
    # number of eigenvalues strictly below sigma (LDL^T inertia)
    n = d.shape[0]
    cnt = 0
    q = d[0] - sigma
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0:
        cnt += 1
    for i in range(1, n):
        q = d[i] - sigma - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            cnt += 1
    return cnt


@njit(cache=True)
def _bisect(d, e2, j, lo, hi, tol, pivmin):
    # j is 1-based; widen the bracket until it is valid
    width = hi - lo
    for _ in range(200):
        if _count(d, e2, lo, pivmin) < j:
            break
        lo -= width
        width *= 2.0
    width = hi - lo
    for _ in range(200):
        if _count(d, e2, hi, pivmin) >= j:
            break
        hi += width
        width *= 2.0
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _count(d, e2, mid, pivmin) >= j:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def _bisect_batch(D, e2, js, lo, hi, tol, pivmin):
    K = D.shape[0]
    out = np.empty((K, js.shape[0]))
    for r in range(K):
        for c in range(js.shape[0]):
            out[r, c] = _bisect(D[r], e2, js[c], lo[r, c], hi[r, c], tol, pivmin)
    return out


def sturm_count(d, e, sigma):
    """Number of eigenvalues of the tridiagonal (d, e) strictly below ``sigma``."""
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(np.asarray(e, dtype=float) ** 2)
    return int(_count(d, e2, float(sigma), _pivmin(e2)))


def _pivmin(e2):
    return _PIVMIN * max(1.0, float(np.max(e2)) if e2.size else 1.0)


def gershgorin(d, e):
    d = np.asarray(d, dtype=float)
    r = np.zeros_like(d)
    ae = np.abs(np.asarray(e, dtype=float))
    r[:-1] += ae
    r[1:] += ae
    return float(np.min(d - r)), float(np.max(d + r))


def eigenvalue(d, e, j, tol=1e-12, bracket=None):
    """j-th smallest eigenvalue (1-based) by bisection to absolute ``tol``."""
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(np.asarray(e, dtype=float) ** 2)
    if not 1 <= j <= d.size:
        raise ValueError(f"index {j} outside 1..{d.size}")
    lo, hi = bracket if bracket is not None else gershgorin(d, e)
    return float(_bisect(d, e2, int(j), float(lo), float(hi), float(tol), _pivmin(e2)))


def eigenvalues_batch(D, e, js, bracket, tol=1e-12):
    """Eigenvalues for many diagonals sharing one off-diagonal.

    ``D`` has shape (K, n); ``bracket`` is a pair of (K, len(js)) arrays used as
    starting guesses (widened automatically when invalid).
    """
    D = np.ascontiguousarray(D, dtype=float)
    e2 = np.ascontiguousarray(np.asarray(e, dtype=float) ** 2)
    js = np.asarray(js, dtype=np.int64)
    lo = np.ascontiguousarray(np.broadcast_to(bracket[0], (D.shape[0], js.size)), dtype=float)
    hi = np.ascontiguousarray(np.broadcast_to(bracket[1], (D.shape[0], js.size)), dtype=float)
    return _bisect_batch(D, e2, js, lo, hi, float(tol), _pivmin(e2))


def _start_vector(n):
    return np.random.default_rng(20240521).standard_normal(n)


def inverse_iteration(d, e, shift, steps=2, max_extra=4, rtol=1e-9):
    """Unit eigenvector for the eigenvalue nearest ``shift``.

    The sign is fixed so that the entry of largest magnitude is positive.
    Raises NumericalError if the residual stays above ``rtol * ||T||``.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    n = d.size
    norm_t = max(abs(v) for v in gershgorin(d, e))
    sigma = float(shift)
    v = _start_vector(n)
    v /= np.linalg.norm(v)
    resid = np.inf
    for it in range(steps + max_extra):
        x = _solve_shifted(d, e, sigma, v, norm_t)
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0:
            raise NumericalError("inverse iteration breakdown", {"shift": sigma, "step": it})
        v = x / nx
        if it + 1 >= steps:
            tv = d * v
            tv[:-1] += e * v[1:]
            tv[1:] += e * v[:-1]
            resid = np.linalg.norm(tv - sigma * v)
            if resid <= rtol * norm_t:
                break
    else:
        raise NumericalError("inverse iteration stagnated",
                             {"shift": sigma, "residual": float(resid), "norm": norm_t})
    i = int(np.argmax(np.abs(v)))
    return v if v[i] > 0 else -v


def _solve_shifted(d, e, sigma, rhs, norm_t):
    # nudge the shift when the factorization is exactly singular
    for bump in (0.0, 1.0, 4.0, 16.0):
        s = sigma + bump * np.finfo(float).eps * norm_t
        _, _, _, x, info = lapack.dgtsv(e.copy(), d - s, e.copy(), rhs.copy())
        if info == 0:
            return x
    raise NumericalError("shifted tridiagonal system is singular", {"shift": sigma})
