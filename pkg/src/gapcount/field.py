"""Magnetic field profiles B(x), the potential b(x) = int_0^x B and its inverse."""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigurationError, NumericalError, RangeError

KINDS = ("constant", "smooth-step", "custom-sampled")

# half-width of the smooth-step transition in units of the width parameter
STEP_HALF_WIDTH = 10.0

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _bump_step(u):
    """C-infinity step: 0 for u <= -10, 1 for u >= 10, exact outside."""
    s = np.clip((np.asarray(u, dtype=float) + STEP_HALF_WIDTH) / (2 * STEP_HALF_WIDTH), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f0 = np.where(s > 0, np.exp(-1.0 / np.where(s > 0, s, 1.0)), 0.0)
        f1 = np.where(s < 1, np.exp(-1.0 / np.where(s < 1, 1.0 - s, 1.0)), 0.0)
    return f0 / (f0 + f1)


@dataclass(frozen=True)
class FieldSpec:
    """Field profile with bounds ``B_minus <= B <= B_plus``.

    Parameters
    ----------
    kind : str
        One of ``constant``, ``smooth-step`` or ``custom-sampled``.
    B_minus, B_plus : float
        Lower and upper bounds of the field; ``B_plus`` is the limit at +inf.
    center, width : float
        Smooth-step transition center and width. The profile saturates
        exactly for ``|x - center| > 10 width``; ``width = 0`` is a hard step.
    samples : tuple of (x, B) pairs, optional
        Table for ``custom-sampled`` fields, interpolated monotonically.
    """

    kind: str
    B_minus: float
    B_plus: float
    center: float = 0.0
    width: float = 0.0
    samples: tuple = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown field kind {self.kind!r}", key="kind")
        if not (self.B_minus > 0):
            raise ConfigurationError("B_minus must be positive", key="B_minus")
        if self.B_plus < self.B_minus:
            raise ConfigurationError("B_plus must be >= B_minus", key="B_plus")
        if self.kind == "constant" and self.B_plus != self.B_minus:
            raise ConfigurationError("constant field needs B_minus == B_plus", key="B_minus")
        if self.kind == "smooth-step" and self.width < 0:
            raise ConfigurationError("width must be nonnegative", key="width")
        if self.kind == "custom-sampled":
            if self.samples is None or len(self.samples) < 2:
                raise ConfigurationError("custom-sampled field needs >= 2 samples", key="samples")
            xs = np.array([p[0] for p in self.samples], dtype=float)
            Bs = np.array([p[1] for p in self.samples], dtype=float)
            if np.any(np.diff(xs) <= 0):
                raise ConfigurationError("sample abscissae must increase", key="samples")
            tol = 1e-12 * self.B_plus
            if Bs.min() < self.B_minus - tol or Bs.max() > self.B_plus + tol:
                raise ConfigurationError("samples violate B_minus <= B <= B_plus", key="samples")

    @classmethod
    def constant(cls, B):
        return cls("constant", float(B), float(B))

    @classmethod
    def smooth_step(cls, B_minus, B_plus, center=0.0, width=1.0):
        return cls("smooth-step", float(B_minus), float(B_plus), float(center), float(width))

    @classmethod
    def sampled(cls, xs, Bs, B_minus=None, B_plus=None):
        xs = np.asarray(xs, dtype=float)
        Bs = np.asarray(Bs, dtype=float)
        B_minus = float(Bs.min()) if B_minus is None else float(B_minus)
        B_plus = float(Bs.max()) if B_plus is None else float(B_plus)
        return cls("custom-sampled", B_minus, B_plus,
                   samples=tuple(zip(xs.tolist(), Bs.tolist())))

    @property
    def sample_range(self):
        if self.kind != "custom-sampled":
            return (-math.inf, math.inf)
        return (self.samples[0][0], self.samples[-1][0])

    def hypotheses(self, x_far=60.0):
        """Sampled check of the standing field hypotheses; returns a dict of flags."""
        lo, hi = self.sample_range
        lo, hi = max(lo, -x_far), min(hi, x_far)
        xs = np.linspace(lo, hi, 4001)
        B = eval_B(self, xs)
        tol = 1e-12 * self.B_plus
        return {
            "positive_lower_bound": self.B_minus > 0,
            "bounded": bool(np.all(B >= self.B_minus - tol) and np.all(B <= self.B_plus + tol)),
            "limit_right": bool(abs(B[-1] - self.B_plus) <= 1e-9 * self.B_plus),
            "left_below_plus": bool(B[0] < self.B_plus - tol),
        }


def eval_B(spec, x):
    """Field value at ``x`` (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if spec.kind == "constant":
        out = np.full_like(x, spec.B_plus)
    elif spec.kind == "smooth-step":
        if spec.width == 0:
            out = np.where(x < spec.center, spec.B_minus, spec.B_plus)
        else:
            u = (x - spec.center) / spec.width
            out = spec.B_minus + (spec.B_plus - spec.B_minus) * _bump_step(u)
    else:
        lo, hi = spec.sample_range
        if np.any(x < lo) or np.any(x > hi):
            raise RangeError(f"field queried outside sample range [{lo}, {hi}]", key="x")
        out = _pchip(spec)(x)
        out = np.clip(out, spec.B_minus, spec.B_plus)
    return out if out.ndim else float(out)


def _pchip(spec):
    xs = np.array([p[0] for p in spec.samples])
    Bs = np.array([p[1] for p in spec.samples])
    return PchipInterpolator(xs, Bs, extrapolate=False)


def x_plus(spec):
    """Infimum of x with B == B_plus on (x, inf); +inf or -inf when degenerate."""
    if spec.kind == "constant":
        return -math.inf
    if spec.kind == "smooth-step":
        if spec.B_minus == spec.B_plus:
            return -math.inf
        return spec.center + STEP_HALF_WIDTH * spec.width
    xs = np.array([p[0] for p in spec.samples])
    Bs = np.array([p[1] for p in spec.samples])
    low = np.nonzero(Bs < spec.B_plus * (1.0 - 1e-12))[0]
    if low.size == 0:
        return -math.inf
    last = low[-1]
    if last == len(xs) - 1:
        return math.inf
    return float(xs[last + 1])


class PotentialB:
    """The potential b(x) with cached cumulative integrals.

    ``tol`` bounds ``|b(x) - k|`` for values returned by :meth:`inverse`.
    """

    def __init__(self, field, tol=1e-12):
        self.field = field
        self.tol = float(tol)
        f = field
        self.B_minus, self.B_plus = f.B_minus, f.B_plus
        if f.kind == "smooth-step" and f.width > 0:
            xl = f.center - STEP_HALF_WIDTH * f.width
            xr = f.center + STEP_HALF_WIDTH * f.width
            edges = np.linspace(xl, xr, 81)
            parts = [self._gl(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]
            self._edges = edges
            self._cum = np.concatenate([[0.0], np.cumsum(parts)])
            self._xl, self._xr = xl, xr
        elif f.kind == "custom-sampled":
            self._interp = _pchip(f)
            self._anti = self._interp.antiderivative()
            lo, hi = f.sample_range
            if not lo <= 0 <= hi:
                raise ConfigurationError("sample range must contain x = 0", key="samples")
        self._offset = 0.0
        self._offset = float(self._F(np.array([0.0]))[0])

    def _gl(self, a, b):
        xm, xr = 0.5 * (a + b), 0.5 * (b - a)
        return float(xr * np.dot(_GL_WEIGHTS, eval_B(self.field, xm + xr * _GL_NODES)))

    def _F(self, x):
        """Antiderivative of B up to an additive constant."""
        f = self.field
        if f.kind == "constant":
            return f.B_plus * x
        if f.kind == "smooth-step":
            if f.width == 0:
                d = x - f.center
                return np.where(d < 0, f.B_minus * d, f.B_plus * d)
            out = np.empty_like(x)
            left = x <= self._xl
            right = x >= self._xr
            mid = ~(left | right)
            out[left] = f.B_minus * (x[left] - self._xl)
            out[right] = self._cum[-1] + f.B_plus * (x[right] - self._xr)
            if np.any(mid):
                xm = x[mid]
                idx = np.clip(np.searchsorted(self._edges, xm, side="right") - 1, 0, len(self._edges) - 2)
                a = self._edges[idx]
                half = 0.5 * (xm - a)
                nodes = (a + half)[:, None] + half[:, None] * _GL_NODES[None, :]
                vals = eval_B(f, nodes)
                out[mid] = self._cum[idx] + half * (vals @ _GL_WEIGHTS)
            return out
        lo, hi = f.sample_range
        if np.any(x < lo) or np.any(x > hi):
            raise RangeError(f"potential queried outside sample range [{lo}, {hi}]", key="x")
        return self._anti(x)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        out = self._F(np.atleast_1d(x)) - self._offset
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def inverse(self, k):
        k = np.asarray(k, dtype=float)
        kk = np.atleast_1d(k).astype(float)
        f = self.field
        if f.kind == "constant":
            out = kk / f.B_plus
        elif f.kind == "smooth-step" and f.width == 0:
            kc = self.b(f.center)
            out = np.where(kk < kc, f.center + (kk - kc) / f.B_minus, f.center + (kk - kc) / f.B_plus)
        elif f.kind == "smooth-step":
            bl, br = self.b(self._xl), self.b(self._xr)
            out = np.empty_like(kk)
            left, right = kk <= bl, kk >= br
            mid = ~(left | right)
            out[left] = self._xl + (kk[left] - bl) / f.B_minus
            out[right] = self._xr + (kk[right] - br) / f.B_plus
            if np.any(mid):
                out[mid] = self._bisect(kk[mid])
        else:
            out = self._bisect(kk)
        return out.reshape(k.shape) if k.ndim else float(out[0])

    def _bisect(self, k):
        f = self.field
        lo = np.where(k > 0, k / f.B_plus, k / f.B_minus)
        hi = np.where(k > 0, k / f.B_minus, k / f.B_plus)
        # widen by a hair so that rounding in b never excludes the root
        pad = 1e-12 * (1.0 + np.abs(k))
        lo, hi = lo - pad, hi + pad
        if f.kind == "custom-sampled":
            a, c = f.sample_range
            blo, bhi = self.b(a), self.b(c)
            if np.any(k < blo) or np.any(k > bhi):
                raise RangeError("momentum outside the range of b on the sample table", key="k")
            lo, hi = np.maximum(lo, a), np.minimum(hi, c)
        xtol = self.tol / f.B_plus
        for _ in range(400):
            if np.all(hi - lo <= xtol):
                break
            mid = 0.5 * (lo + hi)
            below = self.b(mid) < k
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        else:
            raise NumericalError("b inversion did not converge",
                                 {"max_width": float(np.max(hi - lo))})
        return 0.5 * (lo + hi)


def eval_b(pot, x):
    """b(x) = integral of B from 0 to x."""
    return pot.b(x)


def invert_b(pot, k):
    """Solve b(x) = k for x."""
    return pot.inverse(k)
