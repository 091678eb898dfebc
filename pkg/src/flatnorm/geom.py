"""Exact planar primitives and piecewise-linear currents.

Coordinates are :class:`fractions.Fraction` pairs so that orientation tests,
intersections and pairings are exact.  Lengths are irrational in general and
are reported as floats.
"""
from __future__ import annotations

import math
import numbers
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Point = tuple  # (Fraction, Fraction)


class GeometryError(ValueError):
    """Invalid geometric input (degenerate segment, self-intersecting polygon, ...)."""


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    v = float(value)
    if not math.isfinite(v):
        raise GeometryError(f"non-finite coordinate {value!r}")
    return Fraction(v)


def dyadic(value: float, bits: int = 40) -> Fraction:
    """Round a float to the nearest multiple of 2**-bits."""
    return Fraction(round(float(value) * (1 << bits)), 1 << bits)


def point(x, y) -> Point:
    return (as_rational(x), as_rational(y))


def orient(a: Point, b: Point, c: Point) -> Fraction:
    """Twice the signed area of (a, b, c); positive for a left turn."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def sign(v) -> int:
    return (v > 0) - (v < 0)


def dist2(p: Point, q: Point) -> Fraction:
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    return dx * dx + dy * dy


def length(p: Point, q: Point) -> float:
    return math.sqrt(dist2(p, q))


def signed_area(vertices: Sequence[Point]) -> Fraction:
    n = len(vertices)
    acc = Fraction(0)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        acc += x0 * y1 - x1 * y0
    return acc / 2


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True if p lies on the closed segment [a, b]."""
    if orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segment_intersection(a: Point, b: Point, c: Point, d: Point):
    """Intersection point of segments [a,b] and [c,d] when they cross in a
    single point, else None (parallel or disjoint)."""
    den = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
    if den == 0:
        return None
    t = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / den
    u = ((c[0] - a[0]) * (b[1] - a[1]) - (c[1] - a[1]) * (b[0] - a[0])) / den
    if 0 <= t <= 1 and 0 <= u <= 1:
        return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    return None


def segments_cross(a, b, c, d) -> bool:
    """Closed segments [a,b] and [c,d] share at least one point."""
    o1, o2 = sign(orient(a, b, c)), sign(orient(a, b, d))
    o3, o4 = sign(orient(c, d, a)), sign(orient(c, d, b))
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_segment(c, a, b)) or (o2 == 0 and on_segment(d, a, b))
            or (o3 == 0 and on_segment(a, c, d)) or (o4 == 0 and on_segment(b, c, d)))


def _line_key(p: Point, q: Point):
    dx = q[0] - p[0]
    dy = q[1] - p[1]
    if dx != 0:
        k = dy / dx
        return ("s", k, p[1] - k * p[0])
    return ("v", p[0])


def _param(key, p: Point) -> Fraction:
    return p[0] if key[0] == "s" else p[1]


def _at(key, t: Fraction) -> Point:
    if key[0] == "s":
        return (t, key[1] * t + key[2])
    return (key[1], t)


@dataclass(frozen=True, eq=False)
class PLCurrent:
    """Integral piecewise-linear 1-current: oriented segments with multiplicity."""

    segments: tuple = ()

    def __post_init__(self):
        segs = []
        for seg in self.segments:
            p, q = seg[0], seg[1]
            m = seg[2] if len(seg) > 2 else 1
            p = point(*p)
            q = point(*q)
            if int(m) != m:
                raise GeometryError(f"multiplicity {m!r} is not an integer")
            m = int(m)
            if m == 0:
                raise GeometryError("zero multiplicity segment")
            if p == q:
                raise GeometryError(f"zero-length segment at {p}")
            segs.append((p, q, m))
        object.__setattr__(self, "segments", tuple(segs))

    @classmethod
    def from_polyline(cls, points: Iterable, mult: int = 1, closed: bool = False) -> "PLCurrent":
        pts = [point(*p) for p in points]
        if closed and pts and pts[0] != pts[-1]:
            pts.append(pts[0])
        return cls(tuple((pts[i], pts[i + 1], mult) for i in range(len(pts) - 1)
                         if pts[i] != pts[i + 1]))

    def __len__(self):
        return len(self.segments)

    def __add__(self, other: "PLCurrent") -> "PLCurrent":
        return PLCurrent(self.segments + other.segments)

    def __neg__(self) -> "PLCurrent":
        return PLCurrent(tuple((p, q, -m) for p, q, m in self.segments))

    def __sub__(self, other: "PLCurrent") -> "PLCurrent":
        return self + (-other)

    def __rmul__(self, k: int) -> "PLCurrent":
        if int(k) != k:
            raise GeometryError("integral currents only scale by integers")
        k = int(k)
        if k == 0:
            return PLCurrent()
        return PLCurrent(tuple((p, q, k * m) for p, q, m in self.segments))

    def normalized(self) -> "PLCurrent":
        """Canonical form: overlaps summed, collinear runs of equal multiplicity
        merged, each segment oriented lexicographically upward."""
        groups = defaultdict(lambda: defaultdict(int))
        for p, q, m in self.segments:
            key = _line_key(p, q)
            tp, tq = _param(key, p), _param(key, q)
            if tp < tq:
                groups[key][tp] += m
                groups[key][tq] -= m
            else:
                groups[key][tq] -= m
                groups[key][tp] += m
        out = []
        for key, events in groups.items():
            ts = sorted(events)
            run = 0
            start = None
            cur = 0
            for i, t in enumerate(ts):
                run += events[t]
                if run != cur:
                    if cur != 0:
                        out.append((_at(key, start), _at(key, t), cur))
                    start = t
                    cur = run
        out.sort()
        return PLCurrent(tuple(out))

    def __eq__(self, other):
        if not isinstance(other, PLCurrent):
            return NotImplemented
        return self.normalized().segments == other.normalized().segments

    def __hash__(self):
        return hash(self.normalized().segments)

    def is_zero(self) -> bool:
        return len(self.normalized().segments) == 0

    def mass(self) -> float:
        return math.fsum(abs(m) * length(p, q) for p, q, m in self.normalized().segments)

    def boundary(self) -> dict:
        return pl_boundary(self)

    def vertices(self) -> set:
        pts = set()
        for p, q, _ in self.segments:
            pts.add(p)
            pts.add(q)
        return pts


def pl_boundary(current: PLCurrent) -> dict:
    """Signed point masses of the boundary: end points +m, start points -m."""
    acc = defaultdict(int)
    for p, q, m in current.segments:
        acc[p] -= m
        acc[q] += m
    return {p: m for p, m in acc.items() if m != 0}


def _check_simple(verts: Sequence[Point]) -> None:
    n = len(verts)
    if n < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    if len(set(verts)) != n:
        raise GeometryError("polygon repeats a vertex")
    xy = np.array([[float(x), float(y)] for x, y in verts])
    a = xy
    b = np.roll(xy, -1, axis=0)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    scale = max(1.0, float(np.abs(xy).max()))
    tol = 1e-9 * scale
    for i in range(n):
        cand = np.nonzero((lo[:, 0] <= hi[i, 0] + tol) & (hi[:, 0] >= lo[i, 0] - tol)
                          & (lo[:, 1] <= hi[i, 1] + tol) & (hi[:, 1] >= lo[i, 1] - tol))[0]
        for j in cand:
            if j <= i:
                continue
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            p, q = verts[i], verts[(i + 1) % n]
            r, s = verts[j], verts[(j + 1) % n]
            if adjacent:
                # adjacent edges may only share their common vertex
                shared = q if j == i + 1 else p
                other_a = p if shared == q else q
                other_b = s if shared == r else r
                if orient(shared, other_a, other_b) == 0 and \
                        (other_b[0] - shared[0]) * (other_a[0] - shared[0]) + \
                        (other_b[1] - shared[1]) * (other_a[1] - shared[1]) > 0:
                    raise GeometryError(f"polygon folds back at vertex {shared}")
                continue
            if segments_cross(p, q, r, s):
                raise GeometryError(f"polygon edges {i} and {j} intersect")


@dataclass(frozen=True, eq=False)
class PLRegion:
    """Integral piecewise-linear 2-current: simple polygons with multiplicity.

    Polygons are stored counter-clockwise; a clockwise input flips the sign of
    its multiplicity.
    """

    polygons: tuple = ()
    check: bool = True

    def __post_init__(self):
        polys = []
        for entry in self.polygons:
            verts, m = entry[0], (entry[1] if len(entry) > 1 else 1)
            verts = [point(*v) for v in verts]
            if len(verts) > 1 and verts[0] == verts[-1]:
                verts.pop()
            if int(m) != m:
                raise GeometryError(f"multiplicity {m!r} is not an integer")
            m = int(m)
            if m == 0:
                raise GeometryError("zero multiplicity polygon")
            if self.check:
                _check_simple(verts)
            area = signed_area(verts)
            if area == 0:
                raise GeometryError("polygon has zero area")
            if area < 0:
                verts.reverse()
                m = -m
            polys.append((tuple(verts), m))
        object.__setattr__(self, "polygons", tuple(polys))

    def __add__(self, other: "PLRegion") -> "PLRegion":
        return PLRegion(self.polygons + other.polygons, check=False)

    def __neg__(self) -> "PLRegion":
        return PLRegion(tuple((v, -m) for v, m in self.polygons), check=False)

    def __sub__(self, other: "PLRegion") -> "PLRegion":
        return self + (-other)

    def __rmul__(self, k: int) -> "PLRegion":
        k = int(k)
        if k == 0:
            return PLRegion()
        return PLRegion(tuple((v, k * m) for v, m in self.polygons), check=False)

    def signed_area(self) -> Fraction:
        return sum((m * signed_area(v) for v, m in self.polygons), Fraction(0))

    def mass(self) -> float:
        return math.fsum(abs(m) * float(signed_area(v)) for v, m in self.polygons)

    def exact_mass(self) -> Fraction:
        return sum((abs(m) * signed_area(v) for v, m in self.polygons), Fraction(0))

    def vertices(self) -> set:
        return {p for v, _ in self.polygons for p in v}


def region_boundary(region: PLRegion) -> PLCurrent:
    segs = []
    for verts, m in region.polygons:
        n = len(verts)
        segs.extend((verts[i], verts[(i + 1) % n], m) for i in range(n))
    return PLCurrent(tuple(segs))


def dilate(current, factor):
    """Scale coordinates about the origin by a positive rational factor."""
    f = as_rational(factor)
    if f <= 0:
        raise GeometryError("dilation factor must be positive")
    if isinstance(current, PLCurrent):
        return PLCurrent(tuple(((p[0] * f, p[1] * f), (q[0] * f, q[1] * f), m)
                               for p, q, m in current.segments))
    if isinstance(current, PLRegion):
        return PLRegion(tuple((tuple((x * f, y * f) for x, y in v), m)
                              for v, m in current.polygons), check=False)
    if isinstance(current, dict):
        return {(p[0] * f, p[1] * f): m for p, m in current.items()}
    raise TypeError(f"cannot dilate {type(current).__name__}")


def _slab_trapezoids(cycle: PLCurrent):
    """Yield (polygon, winding) pieces whose signed sum has boundary `cycle`.

    Vertical slab decomposition: between consecutive event abscissae the
    non-vertical segments are totally ordered, and the winding number between
    neighbours is the running sum of their left-to-right multiplicities.
    """
    segs = []
    for p, q, m in cycle.normalized().segments:
        if p[0] == q[0]:
            continue
        if p[0] < q[0]:
            segs.append((p[0], p[1], q[0], q[1], m))
        else:
            segs.append((q[0], q[1], p[0], p[1], -m))
    if not segs:
        return
    segs.sort()
    xs = sorted({s[0] for s in segs} | {s[2] for s in segs})

    def y_at(s, x):
        x0, y0, x1, y1, _ = s
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def emit(active, xl, xr):
        # order by y at the slab midpoint; no crossings strictly inside
        xm = (xl + xr) / 2
        ordered = sorted(active, key=lambda s: y_at(s, xm))
        w = 0
        for lower, upper in zip(ordered, ordered[1:]):
            w += lower[4]
            if w == 0:
                continue
            poly = [(xl, y_at(lower, xl)), (xr, y_at(lower, xr)),
                    (xr, y_at(upper, xr)), (xl, y_at(upper, xl))]
            dedup = []
            for v in poly:
                if not dedup or dedup[-1] != v:
                    dedup.append(v)
            if len(dedup) > 1 and dedup[0] == dedup[-1]:
                dedup.pop()
            if len(dedup) >= 3 and signed_area(dedup) != 0:
                yield tuple(dedup), w

    pending = 0
    active = []
    for xl, xr in zip(xs, xs[1:]):
        active = [s for s in active if s[2] > xl]
        while pending < len(segs) and segs[pending][0] <= xl:
            if segs[pending][2] > xl:
                active.append(segs[pending])
            pending += 1
        if len(active) < 2:
            continue
        cuts = set()
        for i in range(len(active)):
            for j in range(i + 1, len(active)):
                a, b = active[i], active[j]
                dl = y_at(a, xl) - y_at(b, xl)
                dr = y_at(a, xr) - y_at(b, xr)
                if dl * dr < 0:
                    cuts.add(xl + (xr - xl) * dl / (dl - dr))
        bounds = [xl] + sorted(cuts) + [xr]
        for a, b in zip(bounds, bounds[1:]):
            yield from emit(active, a, b)


def filler_region(a: PLCurrent, b: PLCurrent) -> PLRegion:
    """An explicit region R with boundary a - b (requires matching boundaries)."""
    if pl_boundary(a) != pl_boundary(b):
        raise GeometryError("currents have different boundaries; no filler exists")
    return PLRegion(tuple(_slab_trapezoids(a - b)), check=False)


def filler_area_bound(a: PLCurrent, b: PLCurrent) -> Fraction:
    """Mass of the constructed filler of a - b; an upper bound on F(a - b)."""
    region = filler_region(a, b)
    return region.exact_mass()
