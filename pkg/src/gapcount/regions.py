"""Planar regions: rectangles, discs and simple polygons, optionally clipped to x > x_min."""

from dataclasses import dataclass, replace
import math

import numpy as np

from .errors import ConfigurationError

REGION_KINDS = ("rectangle", "disc", "polygon")


def _segments_cross(p1, p2, p3, p4):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return d1 * d2 < 0 and d3 * d4 < 0


def _shoelace(vs):
    if len(vs) < 3:
        return 0.0
    x = np.array([v[0] for v in vs])
    y = np.array([v[1] for v in vs])
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _clip_halfplane(vs, x_min):
    # Sutherland-Hodgman against x >= x_min
    out = []
    n = len(vs)
    for i in range(n):
        p, q = vs[i], vs[(i + 1) % n]
        pin, qin = p[0] >= x_min, q[0] >= x_min
        if pin:
            out.append(p)
        if pin != qin:
            s = (x_min - p[0]) / (q[0] - p[0])
            out.append((x_min, p[1] + s * (q[1] - p[1])))
    return out


def _segment_area(R, d):
    """Area of the part of a radius-R disc beyond a chord at signed distance d from the center."""
    if d <= -R:
        return math.pi * R * R
    if d >= R:
        return 0.0
    return R * R * math.acos(d / R) - d * math.sqrt(R * R - d * d)


@dataclass(frozen=True)
class RegionSpec:
    """Bounded planar domain intersected with {x > x_min}.

    ``params`` is ``(x0, x1, y0, y1)`` for rectangles, ``(cx, cy, R)`` for discs and a
    tuple of vertices for polygons.
    """

    kind: str
    params: tuple
    x_min: float = -math.inf

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ConfigurationError(f"unknown region kind {self.kind!r}", key="region")
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            if not (x1 > x0 and y1 > y0):
                raise ConfigurationError("rectangle needs x1 > x0 and y1 > y0", key="region")
        elif self.kind == "disc":
            if not self.params[2] > 0:
                raise ConfigurationError("disc radius must be positive", key="region")
        else:
            vs = self.params
            if len(vs) < 3 or abs(_shoelace(vs)) <= 0:
                raise ConfigurationError("polygon needs >= 3 vertices and positive area", key="region")
            n = len(vs)
            for i in range(n):
                for k in range(i + 2, n):
                    if i == 0 and k == n - 1:
                        continue
                    if _segments_cross(vs[i], vs[(i + 1) % n], vs[k], vs[(k + 1) % n]):
                        raise ConfigurationError("polygon must be simple", key="region")

    @classmethod
    def rectangle(cls, x0, x1, y0, y1):
        return cls("rectangle", (float(x0), float(x1), float(y0), float(y1)))

    @classmethod
    def disc(cls, cx, cy, R):
        return cls("disc", (float(cx), float(cy), float(R)))

    @classmethod
    def polygon(cls, vertices):
        vs = tuple((float(a), float(b)) for a, b in vertices)
        if _shoelace(vs) < 0:
            vs = vs[::-1]
        return cls("polygon", vs)

    # -- transformations -------------------------------------------------

    def clipped(self, x_min):
        return replace(self, x_min=max(self.x_min, float(x_min)))

    def shifted(self, dx, dy=0.0):
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            p = (x0 + dx, x1 + dx, y0 + dy, y1 + dy)
        elif self.kind == "disc":
            cx, cy, R = self.params
            p = (cx + dx, cy + dy, R)
        else:
            p = tuple((a + dx, b + dy) for a, b in self.params)
        return RegionSpec(self.kind, p, self.x_min + dx)

    def scaled(self, f):
        if self.kind == "rectangle":
            p = tuple(f * v for v in self.params)
        elif self.kind == "disc":
            p = (f * self.params[0], f * self.params[1], f * self.params[2])
        else:
            p = tuple((f * a, f * b) for a, b in self.params)
        return RegionSpec(self.kind, p, f * self.x_min)

    # -- geometry ----------------------------------------------------------

    def _base_bbox(self):
        if self.kind == "rectangle":
            return self.params
        if self.kind == "disc":
            cx, cy, R = self.params
            return (cx - R, cx + R, cy - R, cy + R)
        xs = [v[0] for v in self.params]
        ys = [v[1] for v in self.params]
        return (min(xs), max(xs), min(ys), max(ys))

    def bbox(self):
        """Bounding box (x0, x1, y0, y1) of the clipped region; None if empty."""
        x0, x1, y0, y1 = self._base_bbox()
        if self.x_min >= x1:
            return None
        if self.x_min > x0:
            x0 = self.x_min
            if self.kind == "disc":
                cx, cy, R = self.params
                if self.x_min > cx:
                    s = math.sqrt(max(R * R - (self.x_min - cx) ** 2, 0.0))
                    y0, y1 = cy - s, cy + s
            elif self.kind == "polygon":
                vs = self.clipped_vertices()
                ys = [v[1] for v in vs]
                y0, y1 = min(ys), max(ys)
        return (x0, x1, y0, y1)

    def is_empty(self):
        return self.bbox() is None

    def y_center(self):
        b = self._base_bbox()
        return 0.5 * (b[2] + b[3])

    def clipped_vertices(self):
        if self.kind != "polygon":
            raise TypeError("only polygons have vertices")
        if not math.isfinite(self.x_min):
            return list(self.params)
        return _clip_halfplane(list(self.params), self.x_min)

    def contains(self, x, y):
        """Vectorized membership test of the closed region (clip boundary excluded)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
        elif self.kind == "disc":
            cx, cy, R = self.params
            inside = (x - cx) ** 2 + (y - cy) ** 2 <= R * R
        else:
            vs = self.params
            inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
            n = len(vs)
            for i in range(n):
                (ax, ay), (bx, by) = vs[i], vs[(i + 1) % n]
                if ax == bx:
                    continue
                crosses = (np.minimum(ax, bx) <= x) & (x < np.maximum(ax, bx))
                yint = ay + (x - ax) * (by - ay) / (bx - ax)
                inside ^= crosses & (y < yint)
        if math.isfinite(self.x_min):
            inside &= x > self.x_min
        return inside

    def slice(self, x):
        """Vertical slice at ``x`` as a list of closed intervals (y_lo, y_hi)."""
        if x <= self.x_min:
            return []
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            return [(y0, y1)] if x0 <= x <= x1 else []
        if self.kind == "disc":
            cx, cy, R = self.params
            d = R * R - (x - cx) ** 2
            if d < 0:
                return []
            s = math.sqrt(d)
            return [(cy - s, cy + s)]
        ys = []
        vs = self.params
        n = len(vs)
        for i in range(n):
            (ax, ay), (bx, by) = vs[i], vs[(i + 1) % n]
            if ax == bx:
                continue
            if min(ax, bx) <= x < max(ax, bx):
                ys.append(ay + (x - ax) * (by - ay) / (bx - ax))
        ys.sort()
        out = []
        for a, b in zip(ys[0::2], ys[1::2]):
            if out and a <= out[-1][1]:
                out[-1] = (out[-1][0], max(out[-1][1], b))
            else:
                out.append((a, b))
        return out

    def slices(self, xs):
        """Slices at many abscissae (list of interval lists)."""
        return [self.slice(float(x)) for x in np.asarray(xs, dtype=float)]

    def x_events(self):
        """Abscissae where the slice structure changes."""
        x0, x1, _, _ = self._base_bbox()
        if self.kind == "polygon":
            ev = sorted({v[0] for v in self.params})
        else:
            ev = [x0, x1]
            if self.kind == "disc":
                ev.append(self.params[0])
        if math.isfinite(self.x_min):
            ev = [e for e in ev if e > self.x_min] + [self.x_min]
        return sorted(ev)

    def sqrt_edges(self):
        """Abscissae where slice lengths have square-root behaviour."""
        if self.kind != "disc":
            return []
        cx, _, R = self.params
        return [e for e in (cx - R, cx + R) if e > self.x_min]

    def area(self, s=-math.inf):
        """Lebesgue measure of the region intersected with {x > s}."""
        s = max(s, self.x_min)
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            return max(x1 - max(x0, s), 0.0) * (y1 - y0)
        if self.kind == "disc":
            cx, _, R = self.params
            return _segment_area(R, s - cx) if math.isfinite(s) else math.pi * R * R
        vs = list(self.params)
        if math.isfinite(s):
            vs = _clip_halfplane(vs, s)
        return abs(_shoelace(vs))

    def farthest_distance(self, px, py):
        """Largest distance from (px, py) to a point of the closed region."""
        if self.is_empty():
            return 0.0
        if self.kind == "rectangle":
            x0, x1, y0, y1 = self.params
            x0 = max(x0, self.x_min)
            return math.hypot(max(abs(px - x0), abs(px - x1)), max(abs(py - y0), abs(py - y1)))
        if self.kind == "disc":
            cx, cy, R = self.params
            dx, dy = cx - px, cy - py
            dist = math.hypot(dx, dy)
            if dist > 0:
                qx = cx + R * dx / dist
            else:
                qx = cx + R  # every boundary point is farthest; pick one inside the clip
            if qx > self.x_min or not math.isfinite(self.x_min):
                return dist + R
            s = math.sqrt(max(R * R - (self.x_min - cx) ** 2, 0.0))
            return max(math.hypot(self.x_min - px, cy + s - py),
                       math.hypot(self.x_min - px, cy - s - py))
        vs = self.clipped_vertices()
        return max(math.hypot(a - px, b - py) for a, b in vs)


def longest_slice(region, x):
    return max((b - a for a, b in region.slice(x)), default=0.0)


def c_minus(region):
    """Sup over x of the longest vertical segment in the closed region."""
    if region.is_empty():
        return 0.0
    if region.kind == "rectangle":
        return region.params[3] - region.params[2]
    if region.kind == "disc":
        cx, _, R = region.params
        if region.x_min < cx:
            return 2.0 * R
        return 2.0 * math.sqrt(max(R * R - (region.x_min - cx) ** 2, 0.0))
    # slice lengths are piecewise linear between events; check both one-sided limits
    x0, x1, _, _ = region.bbox()
    eta = 1e-9 * max(1.0, x1 - x0)
    best = 0.0
    for e in region.x_events():
        for x in (e - eta, e + eta):
            if x0 < x < x1:
                best = max(best, longest_slice(region, x))
    return best
