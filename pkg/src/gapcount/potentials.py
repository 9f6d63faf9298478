"""Nonnegative phase-space potentials V(x, xi) and their xi-Fourier transforms.

Transforms are taken relative to each family's symmetry center in xi, so that
``xi_table`` is real for xi-symmetric families. Dropping the phase
``exp(-i q xi_c)`` is a diagonal unitary change of the k-basis and leaves every
spectrum unchanged.
"""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ConfigurationError
from .field import _bump_step
from .regions import RegionSpec


def _sinc_transform(half, q):
    # int_{-half}^{half} exp(-i q y) dy = 2 sin(q half) / q
    q = np.asarray(q, dtype=float)
    return 2.0 * half * np.sinc(q * half / math.pi)


@dataclass(frozen=True)
class ZeroV:
    kind = "zero"
    sup_V = 0.0
    xi_center = 0.0
    xi_symmetric = True
    compact = True

    def __call__(self, x, xi):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(xi)).shape)

    def x_extent(self, level):
        return None

    def xi_extent(self, level):
        return 0.0

    def x_breakpoints(self):
        return []

    def sqrt_edges(self):
        return []

    def xi_table(self, x, dk, D, xi_cut=None):
        return np.zeros((np.size(x), D + 1))

    def level_area(self, lam, s=-math.inf):
        return 0.0

    def shifted(self, dx, dxi=0.0):
        return self


@dataclass(frozen=True)
class GaussianV:
    """``amplitude * exp(-(x-x_c)^2 / (2 width^2) - (xi-xi_c)^2 / (2 xi_width^2))``."""

    amplitude: float
    width: float
    x_center: float = 0.0
    xi_center: float = 0.0
    xi_width: float = None

    kind = "gaussian"
    xi_symmetric = True
    compact = True

    def __post_init__(self):
        if self.amplitude < 0 or self.width <= 0:
            raise ConfigurationError("gaussian needs amplitude >= 0 and width > 0", key="amplitude")
        if self.xi_width is not None and self.xi_width <= 0:
            raise ConfigurationError("xi_width must be positive", key="xi_width")

    @property
    def sx(self):
        return self.xi_width or self.width

    @property
    def sup_V(self):
        return self.amplitude

    def __call__(self, x, xi):
        u = (np.asarray(x) - self.x_center) / self.width
        v = (np.asarray(xi) - self.xi_center) / self.sx
        return self.amplitude * np.exp(-0.5 * (u * u + v * v))

    def _radius(self, level):
        if level >= self.amplitude:
            return None
        return math.sqrt(2.0 * math.log(self.amplitude / level))

    def x_extent(self, level):
        r = self._radius(level)
        return None if r is None else (self.x_center - r * self.width, self.x_center + r * self.width)

    def xi_extent(self, level):
        r = self._radius(level)
        return 0.0 if r is None else r * self.sx

    def x_breakpoints(self):
        return []

    def sqrt_edges(self):
        return []

    def xi_table(self, x, dk, D, xi_cut=None):
        q = dk * np.arange(D + 1)
        ux = (np.asarray(x) - self.x_center) / self.width
        fx = self.amplitude * np.exp(-0.5 * ux * ux)
        fq = self.sx * math.sqrt(2 * math.pi) * np.exp(-0.5 * (self.sx * q) ** 2)
        return fx[:, None] * fq[None, :]

    def level_area(self, lam, s=-math.inf):
        r = self._radius(lam)
        if r is None:
            return 0.0
        # ellipse with semi-axes r*width, r*sx; rescale x to a disc
        a, c = r * self.width, r * self.sx
        d = (s - self.x_center) / self.width
        from .regions import _segment_area
        return _segment_area(r, d) * a * c / (r * r)

    def shifted(self, dx, dxi=0.0):
        return replace(self, x_center=self.x_center + dx, xi_center=self.xi_center + dxi)


@dataclass(frozen=True)
class PowerLawV:
    """``amplitude * <x - x_c, xi - xi_c>^(-m)`` with ``<x, xi> = (1 + x^2 + xi^2)^(1/2)``."""

    m: float
    amplitude: float = 1.0
    x_center: float = 0.0
    xi_center: float = 0.0

    kind = "power-law"
    xi_symmetric = True
    compact = False

    def __post_init__(self):
        if self.m <= 0 or self.amplitude < 0:
            raise ConfigurationError("power law needs m > 0 and amplitude >= 0", key="m")

    @property
    def sup_V(self):
        return self.amplitude

    def __call__(self, x, xi):
        r2 = (np.asarray(x) - self.x_center) ** 2 + (np.asarray(xi) - self.xi_center) ** 2
        return self.amplitude * (1.0 + r2) ** (-0.5 * self.m)

    def _radius(self, level):
        if level >= self.amplitude:
            return None
        return math.sqrt((self.amplitude / level) ** (2.0 / self.m) - 1.0)

    def x_extent(self, level):
        r = self._radius(level)
        return None if r is None else (self.x_center - r, self.x_center + r)

    def xi_extent(self, level):
        r = self._radius(level)
        return 0.0 if r is None else r

    def x_breakpoints(self):
        return []

    def sqrt_edges(self):
        return []

    def xi_table(self, x, dk, D, xi_cut=None):
        """Transform of V times a smooth cutoff vanishing for ``|xi - xi_c| >= xi_cut``.

        The truncated symbol fits in one period 2 pi / dk of the k-lattice, so the
        lattice matrix has no aliasing. Computed by the periodic trapezoidal rule.
        """
        period = 2.0 * math.pi / dk
        if xi_cut is None:
            xi_cut = 0.5 * period
        xi_cut = min(xi_cut, 0.5 * period)
        M = 1 << max(int(math.ceil(math.log2(period / 0.05))), int(math.ceil(math.log2(2 * D + 2))))
        step = period / M
        xi = step * (np.arange(M) - M // 2)
        taper = max(0.1 * xi_cut, 1.0)
        window = 1.0 - _bump_step((np.abs(xi) - (xi_cut - 0.5 * taper)) / (taper / 20.0))
        x = np.asarray(x, dtype=float)
        out = np.empty((x.size, D + 1))
        for a in range(0, x.size, 512):
            xs = x[a:a + 512] - self.x_center
            f = self.amplitude * (1.0 + xs[:, None] ** 2 + xi[None, :] ** 2) ** (-0.5 * self.m)
            f *= window[None, :]
            F = np.fft.rfft(np.fft.ifftshift(f, axes=1), axis=1) * step
            out[a:a + 512] = F[:, :D + 1].real
        return out

    def level_area(self, lam, s=-math.inf):
        r = self._radius(lam)
        if r is None:
            return 0.0
        from .regions import _segment_area
        return _segment_area(r, s - self.x_center)

    def shifted(self, dx, dxi=0.0):
        return replace(self, x_center=self.x_center + dx, xi_center=self.xi_center + dxi)


@dataclass(frozen=True)
class IndicatorV:
    """``amplitude`` times the indicator of a region in the (x, xi) plane."""

    amplitude: float
    region: RegionSpec

    kind = "indicator"
    compact = True

    def __post_init__(self):
        if self.amplitude < 0:
            raise ConfigurationError("amplitude must be nonnegative", key="amplitude")

    @property
    def sup_V(self):
        return self.amplitude

    @property
    def xi_symmetric(self):
        return self.region.kind != "polygon"

    @property
    def xi_center(self):
        return self.region.y_center()

    def __call__(self, x, xi):
        return self.amplitude * self.region.contains(x, xi).astype(float)

    def x_extent(self, level):
        bb = self.region.bbox()
        if bb is None or level >= self.amplitude:
            return None
        return (bb[0], bb[1])

    def xi_extent(self, level):
        bb = self.region.bbox()
        if bb is None or level >= self.amplitude:
            return 0.0
        yc = self.xi_center
        return max(abs(bb[2] - yc), abs(bb[3] - yc))

    def x_breakpoints(self):
        return self.region.x_events()

    def sqrt_edges(self):
        return self.region.sqrt_edges()

    def xi_table(self, x, dk, D, xi_cut=None):
        q = dk * np.arange(D + 1)
        x = np.asarray(x, dtype=float)
        yc = self.xi_center
        if self.xi_symmetric:
            out = np.zeros((x.size, D + 1))
            for i, xv in enumerate(x):
                for lo, hi in self.region.slice(float(xv)):
                    out[i] = _sinc_transform(0.5 * (hi - lo), q)
            return self.amplitude * out
        out = np.zeros((x.size, D + 1), dtype=complex)
        for i, xv in enumerate(x):
            for lo, hi in self.region.slice(float(xv)):
                mid, half = 0.5 * (lo + hi) - yc, 0.5 * (hi - lo)
                out[i] += np.exp(-1j * q * mid) * _sinc_transform(half, q)
        return self.amplitude * out

    def level_area(self, lam, s=-math.inf):
        if lam >= self.amplitude:
            return 0.0
        return self.region.area(s)

    def shifted(self, dx, dxi=0.0):
        return replace(self, region=self.region.shifted(dx, dxi))


def make_potential(kind, **kw):
    """Construct a potential family by name."""
    if kind == "zero":
        return ZeroV()
    if kind == "gaussian":
        return GaussianV(**kw)
    if kind == "power-law":
        return PowerLawV(**kw)
    if kind == "indicator":
        return IndicatorV(**kw)
    raise ConfigurationError(f"unknown potential kind {kind!r}", key="kind")
