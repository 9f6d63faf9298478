"""Asymptotic predictors: phase-space volumes, kappa, c_minus, c_plus, and curve fits."""

from dataclasses import dataclass, field as dc_field
import math
import warnings

import numpy as np

from .errors import ConfigurationError, NumericalError
from .regions import RegionSpec, c_minus  # noqa: F401  (re-exported)

GRID_CELLS = 2048


# -- volume function -----------------------------------------------------------

def grid_volume(V, lam, s=-math.inf, cells=GRID_CELLS):
    """Area of {V > lam, x > s} by cell-center counting; returns (area, richardson_gap)."""
    ext = V.x_extent(lam) if V.sup_V > lam else None
    if ext is None:
        return 0.0, 0.0
    x0, x1 = max(ext[0], s), ext[1]
    if x1 <= x0:
        return 0.0, 0.0
    r = V.xi_extent(lam)
    y0, y1 = V.xi_center - r, V.xi_center + r

    def count(n):
        hx, hy = (x1 - x0) / n, (y1 - y0) / n
        xs = x0 + hx * (np.arange(n) + 0.5)
        ys = y0 + hy * (np.arange(n) + 0.5)
        total = 0
        for a in range(0, n, 256):
            total += int(np.count_nonzero(V(xs[a:a + 256, None], ys[None, :]) > lam))
        return total * hx * hy

    fine = count(cells)
    coarse = count(cells // 2)
    return fine, abs(fine - coarse)


def volume_N(V, lam, s=-math.inf, method="auto"):
    """N(lam, V, s) = (1 / 2 pi) |{(x, xi): V > lam, x > s}|."""
    if not lam > 0:
        raise ConfigurationError("lambda must be positive", key="lambda")
    if method == "auto":
        area = V.level_area(lam, s)
        if area is not None:
            return area / (2 * math.pi)
    return grid_volume(V, lam, s)[0] / (2 * math.pi)


def homogeneity_defect(V, s, m, lambdas, eps):
    """lam^(2/m) (N(lam(1-eps)) - N(lam(1+eps))) per lambda."""
    if not 0 < abs(eps) < 1:
        raise ConfigurationError("eps must lie in (0, 1)", key="eps")
    lambdas = np.asarray(lambdas, dtype=float)
    return np.array([l ** (2.0 / m) * (volume_N(V, l * (1 - eps), s) - volume_N(V, l * (1 + eps), s))
                     for l in lambdas])


# -- kappa and enclosing discs --------------------------------------------------

def kappa(s, tol=1e-13):
    """|{t > 0: t ln t < s}|: 1 at s = 0, else the root t* >= 1 of t ln t = s."""
    if s < 0:
        raise ConfigurationError("kappa needs s >= 0", key="s")
    if math.isinf(s):
        return math.inf
    if s == 0:
        return 1.0
    lo, hi = 1.0, max(2.0, s + 1.0)
    while hi * math.log(hi) < s:
        hi *= 2.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid * math.log(mid) < s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo, hi, xtol):
    """Minimize a unimodal function on [lo, hi]; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    c, d = b - _GOLD * (b - a), a + _GOLD * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(400):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    fx = f(x)
    best = min((fx, x), (fc, c), (fd, d))
    return best[1], best[0]


def min_enclosing_radius_on_line(region, cx):
    """Smallest radius of a disc centered on the vertical line x = cx that contains the region."""
    x0, x1, y0, y1 = region.bbox()
    diam = math.hypot(x1 - x0, y1 - y0)
    # the farthest distance is convex in the center height
    eta, R = golden_section(lambda e: region.farthest_distance(cx, e),
                            y0 - diam, y1 + diam, 1e-14 * max(1.0, diam))
    return R, eta


def c_plus_objective(region, a, cx):
    R, _ = min_enclosing_radius_on_line(region, cx)
    xi = cx - a
    return R * kappa(max(xi, 0.0) / (math.e * R))


def c_plus(region, a, n_grid=200):
    """inf over enclosing discs B_R((xi + a, eta)) of R kappa(xi_+ / (e R)).

    Grid over the center abscissa, then golden-section refinement around the
    best grid point.
    """
    if region.is_empty():
        return 0.0
    if a == -math.inf:
        return math.inf
    x0, x1, y0, y1 = region.bbox()
    diam = math.hypot(x1 - x0, y1 - y0)
    grid = np.linspace(x0 - diam, x1 + diam, n_grid)
    vals = np.array([c_plus_objective(region, a, c) for c in grid])
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    _, best = golden_section(lambda c: c_plus_objective(region, a, c), lo, hi,
                             1e-14 * max(1.0, diam))
    best = min(best, float(vals[i]))
    if not math.isfinite(best):
        raise NumericalError("c_plus search failed", {"best": best})
    return best


def corridor_constants(region_minus, region_plus, x_plus, B_plus, b_const=None):
    """(C_minus, C_plus) built from the parts of the regions right of x_plus.

    ``b_const`` is the constant under the square roots, default ``B_plus``.
    """
    b = B_plus if b_const is None else b_const
    rm = _right_part(region_minus, x_plus)
    rp = _right_part(region_plus, x_plus)
    if rm is None or rm.is_empty():
        warnings.warn("region right of x_plus is empty; C_minus = 0", RuntimeWarning)
        cm = 0.0
    else:
        cm = math.sqrt(b) * c_minus(rm) / (2 * math.pi)
    if rp is None or rp.is_empty():
        cp = 0.0
    else:
        cp = math.e * math.sqrt(b) * c_plus(rp, x_plus)
    return cm, cp


def _right_part(region, xp):
    if xp == math.inf:
        return None
    if xp == -math.inf:
        return region
    return region.clipped(xp)


# -- fits --------------------------------------------------------------------------

@dataclass
class AsymptoticFit:
    model: str
    estimate: float
    residuals: np.ndarray
    points_used: int
    lambdas: np.ndarray
    flags: list = dc_field(default_factory=list)
    ratios: np.ndarray = None
    trend_slope: float = None
    decade_deviation: list = None

    @property
    def residual_norm(self):
        return float(np.linalg.norm(self.residuals)) if self.residuals.size else 0.0


def curve_counts(curve, edge="mid"):
    if edge == "lower":
        return np.asarray(curve.count_lower, dtype=float)
    if edge == "upper":
        return np.asarray(curve.count_upper, dtype=float)
    return 0.5 * (np.asarray(curve.count_lower, dtype=float) + np.asarray(curve.count_upper, dtype=float))


def _tail(lambdas, n_min=5):
    order = np.argsort(lambdas)
    n_use = max(n_min, int(math.ceil(len(lambdas) / 3)))
    return order[:n_use]


def fit_sqrt_log(curve, edge="mid"):
    """Least-squares a in count ~ a |ln lam|^(1/2) over the smallest-lambda third."""
    lam = np.asarray(curve.lambdas, dtype=float)
    counts = curve_counts(curve, edge)
    ok = lam < 0.1
    if np.count_nonzero(ok) < 5:
        raise ConfigurationError("sqrt-log fit needs >= 5 points with lambda < 0.1", key="lambda_grid")
    lam, counts = lam[ok], counts[ok]
    idx = _tail(lam)
    s = np.sqrt(np.abs(np.log(lam[idx])))
    c = counts[idx]
    if np.all(counts == 0):
        return AsymptoticFit("sqrt-log", 0.0, np.zeros(idx.size), idx.size, lam[idx], ["degenerate"])
    a = float(np.dot(s, c) / np.dot(s, s))
    return AsymptoticFit("sqrt-log", a, c - a * s, idx.size, lam[idx])


def decade_deviation(lambdas, ratios, decades=3):
    """Mean |ratio - 1| over each of the last ``decades`` decades of lambda (smallest last)."""
    lambdas = np.asarray(lambdas, dtype=float)
    lo = lambdas.min()
    out = []
    for d in range(decades - 1, -1, -1):
        sel = (lambdas >= lo * 10 ** d * (1 - 1e-9)) & (lambdas <= lo * 10 ** (d + 1) * (1 + 1e-9))
        out.append(float(np.mean(np.abs(ratios[sel] - 1.0))) if np.any(sel) else math.nan)
    return out


def fit_volume_ratio(curve, V, s, B_plus, edge="mid"):
    """count / (B_plus N(lam, V, s)) per lambda with terminal value and trend."""
    lam = np.asarray(curve.lambdas, dtype=float)
    counts = curve_counts(curve, edge)
    vol = np.array([B_plus * volume_N(V, l, s) for l in lam])
    flags = []
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(vol > 0, counts / vol, np.nan)
    if np.any(vol <= 0):
        flags.append("zero-volume")
    if len(lam) < 5:
        raise ConfigurationError("volume-ratio fit needs >= 5 points", key="lambda_grid")
    idx = _tail(lam)
    good = idx[np.isfinite(ratios[idx])]
    terminal = float(ratios[np.argmin(lam)])
    slope = None
    if good.size >= 2:
        A = np.column_stack([np.log10(lam[good]), np.ones(good.size)])
        coef, *_ = np.linalg.lstsq(A, np.abs(ratios[good] - 1.0), rcond=None)
        slope = float(coef[0])
    return AsymptoticFit("volume-ratio", terminal, ratios[good] - 1.0, good.size, lam[good], flags,
                         ratios=ratios, trend_slope=slope,
                         decade_deviation=decade_deviation(lam, ratios))
