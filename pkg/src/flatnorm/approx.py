"""Constructive polyhedral approximation of polylines and circular arcs."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .geom import GeometryError, PLCurrent, dyadic, filler_area_bound, pl_boundary

REFERENCE_CHORDS = 4096
COORD_BITS = 40


@dataclass
class CurveSpec:
    """A polyline or a circular arc, with integer multiplicity."""

    kind: str  # "polyline" or "arc"
    points: list = field(default_factory=list)
    closed: bool = False
    center: tuple = (0, 0)
    radius: float = 1.0
    start: float = 0.0  # radians
    end: float = 2 * math.pi
    mult: int = 1

    def __post_init__(self):
        if self.kind not in ("polyline", "arc"):
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.kind == "arc":
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            if self.end == self.start:
                raise ValueError("empty arc")
        elif len(self.points) < 2:
            raise ValueError("a polyline needs two points")
        if int(self.mult) != self.mult or self.mult == 0:
            raise ValueError("multiplicity must be a nonzero integer")

    @property
    def full_circle(self) -> bool:
        return self.kind == "arc" and abs(abs(self.end - self.start) - 2 * math.pi) < 1e-15

    def arc_point(self, phi: float):
        cx, cy = self.center
        return (dyadic(cx + self.radius * math.cos(phi), COORD_BITS),
                dyadic(cy + self.radius * math.sin(phi), COORD_BITS))

    def mass(self) -> float:
        """Analytic mass of the curve (arc length for arcs)."""
        if self.kind == "arc":
            return abs(self.mult) * self.radius * abs(self.end - self.start)
        return self.polyline(0).mass()

    def polyline(self, chords: int) -> PLCurrent:
        """Polyline itself, or the arc inscribed with ``chords`` uniform chords."""
        if self.kind == "polyline":
            return PLCurrent.from_polyline(self.points, self.mult, self.closed)
        pts = [self.arc_point(self.start + (self.end - self.start) * k / chords)
               for k in range(chords)]
        pts.append(pts[0] if self.full_circle else self.arc_point(self.end))
        return PLCurrent.from_polyline(pts, self.mult)

    def to_json(self) -> dict:
        if self.kind == "polyline":
            return {"type": "polyline", "points": [[float(x), float(y)] for x, y in self.points],
                    "closed": self.closed, "mult": self.mult}
        return {"type": "arc", "center": list(map(float, self.center)), "radius": self.radius,
                "start": self.start, "end": self.end, "mult": self.mult}

    @classmethod
    def from_json(cls, d: dict) -> "CurveSpec":
        kind = d.get("type")
        if kind == "polyline":
            pts = [(Fraction(str(x)), Fraction(str(y))) for x, y in d["points"]]
            return cls("polyline", pts, bool(d.get("closed", False)), mult=int(d.get("mult", 1)))
        if kind == "arc":
            return cls("arc", center=tuple(d.get("center", (0, 0))), radius=float(d.get("radius", 1)),
                       start=float(d.get("start", 0.0)), end=float(d.get("end", 2 * math.pi)),
                       mult=int(d.get("mult", 1)))
        raise ValueError(f"unknown curve type {kind!r}")


def load_curve(path) -> CurveSpec:
    with open(path) as fh:
        return CurveSpec.from_json(json.load(fh))


def circle(radius: float = 1.0, center=(0, 0), mult: int = 1) -> CurveSpec:
    return CurveSpec("arc", center=center, radius=radius, start=0.0, end=2 * math.pi, mult=mult)


def segment_area(radius: float, theta: float) -> float:
    """Area between a circular arc of angle theta and its chord."""
    return radius * radius * (theta - math.sin(theta)) / 2


@dataclass
class ApproxCertificate:
    chords: int
    rho: float
    mass_P: float
    mass_T: float
    boundary_preserved: bool
    gap_bound: float  # analytic area between the arc and the chords
    filler_area: Fraction  # constructed filler against the dense reference
    reference_chords: int

    @property
    def ok(self) -> bool:
        return (self.boundary_preserved and self.mass_P <= self.mass_T + 1e-12
                and self.gap_bound <= self.rho * (1 + 1e-12) and float(self.filler_area) <= self.rho)

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["filler_area"] = float(self.filler_area)
        d["ok"] = self.ok
        return d


def approximate_curve(curve: CurveSpec, rho: float, reference_chords: int = REFERENCE_CHORDS):
    """Chord approximation P of the curve with a filler of area at most rho.

    Arcs get 2^j uniform chords, j the smallest with total segment area
    (chords * r^2 (theta - sin theta) / 2) at most rho. Returns ``(P, certificate)``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    if curve.kind == "polyline":
        P = curve.polyline(0)
        cert = ApproxCertificate(0, rho, P.mass(), P.mass(), True, 0.0, Fraction(0), 0)
        return P, cert
    span = abs(curve.end - curve.start)
    k = 1 if not curve.full_circle else 4
    while k * segment_area(curve.radius, span / k) * abs(curve.mult) > rho * (1 + 1e-12):
        k *= 2
        if k > 2 ** 24:
            raise ValueError("rho too small")
    P = curve.polyline(k)
    ref_k = max(reference_chords, k)
    # nested vertices: the reference refines P when both are powers of two
    while ref_k % k:
        ref_k += 1
    ref = curve.polyline(ref_k)
    boundary_ok = pl_boundary(P) == pl_boundary(ref)
    filler = filler_area_bound(P, ref)
    gap = k * segment_area(curve.radius, span / k) * abs(curve.mult)
    cert = ApproxCertificate(k, rho, P.mass(), curve.mass(), boundary_ok, gap, filler, ref_k)
    return P, cert


def inscribed_polygon(n: int, radius: float = 1.0, bits: int = COORD_BITS) -> PLCurrent:
    """Closed CCW regular n-gon inscribed in the circle, vertices on a dyadic grid."""
    if n < 3:
        raise GeometryError("a polygon needs three vertices")
    return circle(radius).polyline(n)
