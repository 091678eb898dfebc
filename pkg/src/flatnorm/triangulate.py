"""Planar straight line graphs, rotated grids and quality meshes.

A PSLG carries, per segment, a dict of tags ``{input index: multiplicity}``
(multiplicity measured along the stored vertex order). Tags survive noding,
grid superposition and refinement, so input chains can be read back off the
final complex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complex import (BETA, Complex2, angle_regularity_bound, regularity,
                      small_angle_locations)
from .geom import GeometryError, PLCurrent, as_rational, orient
from .mesher import RefinementError, delaunay_refine

__all__ = ["PSLG", "GridSpec", "AngleSet", "Mesh", "LocalizeReport", "node_segments",
           "convex_hull", "with_hull", "forbidden_angles", "choose_rotation",
           "rational_rotation", "superimpose_grid", "refine", "localize",
           "select_delta", "tube_area_bound", "RefinementError"]


def _add_tags(into: dict, tags: dict, sign: int = 1):
    for k, m in tags.items():
        v = into.get(k, 0) + sign * m
        if v:
            into[k] = v
        else:
            into.pop(k, None)


@dataclass
class PSLG:
    vertices: list
    segments: list  # (i, j) vertex index pairs
    tags: list = field(default_factory=list)  # per segment {input: multiplicity}

    def __post_init__(self):
        self.vertices = [(as_rational(x), as_rational(y)) for x, y in self.vertices]
        self.segments = [(int(a), int(b)) for a, b in self.segments]
        if not self.tags:
            self.tags = [{} for _ in self.segments]
        if len(self.tags) != len(self.segments):
            raise GeometryError("one tag dict per segment required")
        self.tags = [dict(t) for t in self.tags]

    @property
    def multiplicities(self):
        return [sum(t.values()) for t in self.tags]

    @property
    def n_vertices(self):
        return len(self.vertices)

    def length(self) -> float:
        V = self.vertices
        return sum(math.dist(map(float, V[a]), map(float, V[b])) for a, b in self.segments)

    def skeleton(self) -> PLCurrent:
        V = self.vertices
        return PLCurrent([(V[a], V[b], 1) for a, b in self.segments])

    def validate(self):
        """Raise unless segments meet only at shared endpoints."""
        n = len(self.vertices)
        if len(set(self.vertices)) != n:
            raise GeometryError("duplicate vertices")
        seen = set()
        for a, b in self.segments:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise GeometryError(f"bad segment {(a, b)}")
            k = (min(a, b), max(a, b))
            if k in seen:
                raise GeometryError(f"duplicate segment {k}")
            seen.add(k)
        noded = node_segments([(self.vertices[a], self.vertices[b], {}) for a, b in self.segments])
        if len(noded.segments) != len(self.segments) or len(noded.vertices) > n:
            raise GeometryError("segments cross or overlap")
        return self

    def input_angles(self):
        """Smallest angle (radians) between segments at each shared vertex."""
        V = self.vertices
        dirs = {}
        for a, b in self.segments:
            for p, q in ((a, b), (b, a)):
                dirs.setdefault(p, []).append(math.atan2(float(V[q][1] - V[p][1]),
                                                         float(V[q][0] - V[p][0])))
        out = {}
        for v, ds in dirs.items():
            if len(ds) < 2:
                continue
            ds.sort()
            gaps = [(ds[(i + 1) % len(ds)] - ds[i]) % (2 * math.pi) for i in range(len(ds))]
            out[v] = min(gaps)
        return out

    def min_input_angle(self) -> float:
        """Smallest input angle in degrees (180 when no two segments meet)."""
        angs = self.input_angles()
        return math.degrees(min(angs.values())) if angs else 180.0

    def tagged_current(self, key=0) -> PLCurrent:
        V = self.vertices
        return PLCurrent([(V[a], V[b], t[key]) for (a, b), t in zip(self.segments, self.tags)
                          if t.get(key)])


def _seg_params(p, q, segs_xy, idx, exact):
    """Parameters along p->q where other segments touch it."""
    ts = []
    px, py = p
    dx, dy = q[0] - p[0], q[1] - p[1]
    L2 = dx * dx + dy * dy
    for j in idx:
        a, b = exact[j][0], exact[j][1]
        o1, o2 = orient(p, q, a), orient(p, q, b)
        if o1 == 0 and o2 == 0:
            for c in (a, b):
                t = ((c[0] - px) * dx + (c[1] - py) * dy) / L2
                if 0 < t < 1:
                    ts.append(t)
            continue
        if (o1 > 0 and o2 > 0) or (o1 < 0 and o2 < 0):
            continue
        o3, o4 = orient(a, b, p), orient(a, b, q)
        if (o3 > 0 and o4 > 0) or (o3 < 0 and o4 < 0):
            continue
        # proper crossing or touching: intersection parameter along p->q
        ex, ey = b[0] - a[0], b[1] - a[1]
        den = dx * ey - dy * ex
        if den == 0:
            continue
        t = ((a[0] - px) * ey - (a[1] - py) * ex) / den
        if 0 < t < 1:
            ts.append(t)
    return ts


def node_segments(items) -> PSLG:
    """Node a list of ``(p, q, tags)`` segments into a valid PSLG.

    Crossings become vertices; collinear overlaps are merged and their tags
    summed with orientation. Zero-length items are dropped.
    """
    exact = []
    for p, q, tags in items:
        p = (as_rational(p[0]), as_rational(p[1]))
        q = (as_rational(q[0]), as_rational(q[1]))
        if p != q:
            exact.append((p, q, dict(tags)))
    if not exact:
        return PSLG([], [], [])
    arr = np.array([[float(p[0]), float(p[1]), float(q[0]), float(q[1])] for p, q, _ in exact])
    lo = np.minimum(arr[:, :2], arr[:, 2:])
    hi = np.maximum(arr[:, :2], arr[:, 2:])
    span = float(max(hi.max(axis=0) - lo.min(axis=0))) or 1.0
    pad = 1e-9 * span
    # uniform bucket grid for candidate pairs
    nb = max(1, int(math.sqrt(len(exact))))
    cell = span / nb
    origin = lo.min(axis=0)
    buckets = {}
    for i in range(len(exact)):
        i0 = ((lo[i] - pad - origin) // cell).astype(int)
        i1 = ((hi[i] + pad - origin) // cell).astype(int)
        for bx in range(i0[0], i1[0] + 1):
            for by in range(i0[1], i1[1] + 1):
                buckets.setdefault((bx, by), []).append(i)
    cands = [set() for _ in exact]
    for members in buckets.values():
        for i in members:
            cands[i].update(members)
    vid = {}
    verts = []

    def vertex(p):
        if p not in vid:
            vid[p] = len(verts)
            verts.append(p)
        return vid[p]

    pieces = {}
    for i, (p, q, tags) in enumerate(exact):
        idx = [j for j in cands[i] if j != i
               and np.all(hi[j] >= lo[i] - pad) and np.all(lo[j] <= hi[i] + pad)]
        ts = sorted(set(_seg_params(p, q, None, idx, exact)))
        pts = [p] + [(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])) for t in ts] + [q]
        for u, w in zip(pts, pts[1:]):
            a, b = vertex(u), vertex(w)
            key = (min(a, b), max(a, b))
            acc = pieces.setdefault(key, {})
            _add_tags(acc, tags, 1 if a < b else -1)
    segs = sorted(pieces)
    return PSLG(verts, segs, [pieces[k] for k in segs])


def convex_hull(points):
    """Exact convex hull (CCW, no collinear points) by the monotone chain."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def with_hull(pslg: PSLG) -> PSLG:
    """The PSLG plus its convex hull edges (noded)."""
    hull = convex_hull(pslg.vertices)
    items = [(pslg.vertices[a], pslg.vertices[b], t) for (a, b), t in zip(pslg.segments, pslg.tags)]
    if len(hull) >= 2:
        ring = hull if len(hull) > 2 else hull[:1] + hull[1:]
        m = len(ring)
        edges = [(ring[i], ring[(i + 1) % m]) for i in range(m)] if m > 2 else [(ring[0], ring[1])]
        items += [(p, q, {}) for p, q in edges]
    out = node_segments(items)
    # keep isolated input vertices
    known = set(out.vertices)
    extra = [v for v in pslg.vertices if v not in known]
    return PSLG(out.vertices + extra, out.segments, out.tags)


# -- rotated grid ----------------------------------------------------------------

@dataclass
class AngleSet:
    E: list  # sorted direction angles in [0, pi)
    eta: int
    theta_guard: float  # pi / (2 eta), or pi/4 when E is empty

    def degrees(self):
        return [math.degrees(e) for e in self.E]


def forbidden_angles(pslg: PSLG) -> AngleSet:
    """Segment directions and their right-angle turns, modulo pi."""
    V = pslg.vertices
    raw = []
    for a, b in pslg.segments:
        phi = math.atan2(float(V[b][1] - V[a][1]), float(V[b][0] - V[a][0])) % math.pi
        raw += [phi, (phi + math.pi / 2) % math.pi]
    E = []
    for phi in sorted(raw):
        if phi > math.pi - 1e-12:
            phi = 0.0
        if not any(abs(phi - e) < 1e-12 for e in E):
            E.append(phi)
    E.sort()
    eta = len(E)
    return AngleSet(E, eta, math.pi / (2 * eta) if eta else math.pi / 4)


def choose_rotation(angles: AngleSet) -> float:
    """Midpoint of the largest gap of E taken modulo pi/2 (smallest on ties)."""
    q = math.pi / 2
    mods = sorted({round(e % q, 12) % q for e in angles.E})
    if not mods:
        return 0.0
    best = None
    for i, e in enumerate(mods):
        nxt = mods[(i + 1) % len(mods)] + (q if i + 1 == len(mods) else 0)
        gap = nxt - e
        mid = (e + gap / 2) % q
        key = (-round(gap, 12), mid)
        if best is None or key < best[0]:
            best = (key, mid)
    return best[1]


def rational_rotation(angle: float, bits: int = 16):
    """Exact (cos, sin) of an angle within about 2^-bits of ``angle``."""
    t = Fraction(round(math.tan(angle / 2) * 2 ** bits), 2 ** bits)
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def crossing_angle(angles: AngleSet, rotation: float) -> float:
    """Smallest angle between a grid direction and a segment direction."""
    if not angles.E:
        return math.pi / 2
    q = math.pi / 2
    return min(min((e - rotation) % q, (rotation - e) % q) for e in angles.E)


@dataclass
class GridSpec:
    delta: Fraction  # cell diameter
    rotation: float
    origin: tuple = (Fraction(0), Fraction(0))  # in the rotated frame

    def __post_init__(self):
        self.delta = as_rational(self.delta)
        if self.delta <= 0:
            raise ValueError("grid cell diameter must be positive")
        self.origin = (as_rational(self.origin[0]), as_rational(self.origin[1]))

    @property
    def spacing(self) -> Fraction:
        # largest dyadic spacing with spacing * sqrt(2) <= delta
        h = Fraction(math.floor(float(self.delta) / math.sqrt(2) * 2 ** 40), 2 ** 40)
        while 2 * h * h > self.delta ** 2:
            h -= Fraction(1, 2 ** 40)
        return h


def _clip_line(hull, base, direction):
    """Parameter interval of base + s*direction inside a CCW convex polygon."""
    lo, hi = None, None
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        ex, ey = b[0] - a[0], b[1] - a[1]
        # inside: cross(e, p - a) >= 0
        num = ex * (base[1] - a[1]) - ey * (base[0] - a[0])
        den = ex * direction[1] - ey * direction[0]
        if den == 0:
            if num < 0:
                return None
            continue
        s = -num / den
        if den > 0:
            lo = s if lo is None or s > lo else lo
        else:
            hi = s if hi is None or s < hi else hi
    if lo is None or hi is None or lo >= hi:
        return None
    return lo, hi


def _grid_lines(hull, grid: GridSpec, cs):
    c, s = cs
    h = grid.spacing
    u_dir, v_dir = (c, s), (-s, c)
    us = [p[0] * c + p[1] * s for p in hull]
    vs = [-p[0] * s + p[1] * c for p in hull]
    out = []
    for (lo_c, hi_c, off, along, normal) in ((min(us), max(us), grid.origin[0], v_dir, u_dir),
                                             (min(vs), max(vs), grid.origin[1], u_dir, v_dir)):
        k0 = math.ceil((lo_c - off) / h)
        k1 = math.floor((hi_c - off) / h)
        for k in range(k0, k1 + 1):
            w = off + k * h
            base = (w * normal[0], w * normal[1])
            iv = _clip_line(hull, base, along)
            if iv is None:
                continue
            p = (base[0] + iv[0] * along[0], base[1] + iv[0] * along[1])
            q = (base[0] + iv[1] * along[0], base[1] + iv[1] * along[1])
            out.append((p, q))
    return out


def _clearance(pslg: PSLG, grid: GridSpec, cs) -> float:
    """Smallest distance, in units of spacing, from a PSLG vertex to a grid line."""
    c, s = float(cs[0]), float(cs[1])
    h = float(grid.spacing)
    if not pslg.vertices:
        return 0.5
    xy = np.array([[float(x), float(y)] for x, y in pslg.vertices])
    u = (xy[:, 0] * c + xy[:, 1] * s - float(grid.origin[0])) / h
    v = (-xy[:, 0] * s + xy[:, 1] * c - float(grid.origin[1])) / h
    du = np.abs(u - np.round(u))
    dv = np.abs(v - np.round(v))
    score = float(min(du.min(), dv.min()))
    # shortest piece an input segment is cut into, in units of spacing
    for a, b in pslg.segments:
        ua, ub, va, vb = u[a], u[b], v[a], v[b]
        ts = [0.0, 1.0]
        for w0, w1 in ((ua, ub), (va, vb)):
            if abs(w1 - w0) < 1e-15:
                continue
            lo, hi = sorted((w0, w1))
            ks = np.arange(math.ceil(lo), math.floor(hi) + 1)
            ts.extend(((ks - w0) / (w1 - w0)).tolist())
        ts = np.unique(np.clip(ts, 0.0, 1.0))
        seg_len = math.hypot(ub - ua, vb - va)
        gaps = np.diff(ts) * seg_len
        gaps = gaps[gaps > 1e-12]
        if len(gaps):
            score = min(score, float(gaps.min()))
    return score


_GRID = "__grid__"


def superimpose_grid(pslg: PSLG, grid: GridSpec, choose_origin: bool = True):
    """Overlay the rotated square grid, clipped to the convex hull, and node.

    With ``choose_origin`` the origin is replaced by the best of a fixed set of
    sub-cell offsets (largest clearance between grid lines and PSLG vertices),
    which also rules out grid lines through input vertices. Returns the noded
    PSLG and the grid actually used.
    """
    hull = convex_hull(pslg.vertices)
    if not hull:
        return pslg, grid
    degenerate = len(hull) < 3
    if degenerate:
        # clip to a padded bounding box; only the split points are kept
        xs = [p[0] for p in hull]
        ys = [p[1] for p in hull]
        pad = grid.delta
        hull = [(min(xs) - pad, min(ys) - pad), (max(xs) + pad, min(ys) - pad),
                (max(xs) + pad, max(ys) + pad), (min(xs) - pad, max(ys) + pad)]
    cs = rational_rotation(grid.rotation)
    if choose_origin:
        h = grid.spacing
        best = None
        for k in range(64):
            # deterministic low-discrepancy offsets (R2 sequence)
            fu = Fraction(round(((0.5 + k * 0.7548776662466927) % 1) * 2 ** 16), 2 ** 16)
            fv = Fraction(round(((0.5 + k * 0.5698402909980532) % 1) * 2 ** 16), 2 ** 16)
            cand = GridSpec(grid.delta, grid.rotation, (fu * h, fv * h))
            score = _clearance(pslg, cand, cs)
            if best is None or score > best[0] + 1e-12:
                best = (score, cand)
        grid = best[1]
    lines = _grid_lines(hull, grid, cs)
    items = [(pslg.vertices[a], pslg.vertices[b], t) for (a, b), t in zip(pslg.segments, pslg.tags)]
    items += [(p, q, {_GRID: 1}) for p, q in lines]
    noded = node_segments(items)
    keep = [i for i, t in enumerate(noded.tags) if not (degenerate and set(t) == {_GRID})]
    segs = [noded.segments[i] for i in keep]
    tags = [{k: m for k, m in noded.tags[i].items() if k != _GRID} for i in keep]
    used = sorted({v for sg in segs for v in sg})
    remap = {v: i for i, v in enumerate(used)}
    out = PSLG([noded.vertices[v] for v in used], [(remap[a], remap[b]) for a, b in segs], tags)
    known = set(out.vertices)
    extra = [v for v in pslg.vertices if v not in known]
    return PSLG(out.vertices + extra, out.segments, out.tags), grid


# -- refinement ------------------------------------------------------------------

@dataclass
class Mesh:
    complex: Complex2
    pslg: PSLG
    edge_tags: dict  # mesh edge index -> {input: multiplicity along the stored edge}
    stats: dict

    def chain_coeffs(self, key=0) -> dict:
        return {e: t[key] for e, t in self.edge_tags.items() if t.get(key)}


def refine(pslg: PSLG, target_angle: float = 25.0, size_cap: int = 50_000,
           max_edge=None, check: bool = False) -> Mesh:
    """Quality conforming Delaunay mesh of a PSLG whose segments include the hull."""
    if target_angle > 30.0 + 1e-12:
        raise ValueError("target angle above 30 degrees is not supported")
    if len(pslg.vertices) < 3:
        raise GeometryError("need at least three vertices")
    res = delaunay_refine(pslg.vertices, pslg.segments, target_angle, max_edge=max_edge,
                          size_cap=size_cap)
    if len(res.triangles) > size_cap:
        raise RefinementError("size cap exceeded", res.stats)
    K = Complex2(res.vertices, res.triangles, check_embedding=check)
    edge_tags = {}
    for (a, b), (parent, same) in res.subsegments.items():
        tags = pslg.tags[parent]
        if not tags:
            continue
        pa, pb = pslg.segments[parent]
        e = K.edge_index[(a, b)]
        # ``same``: parent orientation runs from a to b (a < b)
        edge_tags[e] = {k: (m if same else -m) for k, m in tags.items()}
    stats = dict(res.stats)
    stats["skipped"] = len(res.skipped)
    return Mesh(K, pslg, edge_tags, stats)


# -- localization ------------------------------------------------------------------

def tube_area_bound(length: float, n_segments: int, delta: float) -> float:
    """Union-of-capsules bound on the area within 3*delta of a skeleton."""
    r = 3 * delta
    return 2 * r * length + n_segments * math.pi * r * r


def select_delta(pslg: PSLG, eps: float) -> Fraction:
    """Largest power of 1/2 whose 3-delta tube bound is below eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    L = pslg.length()
    n = len(pslg.segments)
    k = 0
    while tube_area_bound(L, n, 2.0 ** -k) >= eps:
        k += 1
        if k > 60:
            raise ValueError("eps too small")
    return Fraction(1, 2 ** k)


@dataclass
class LocalizeReport:
    delta: Fraction
    eps: float
    tube_area_bound: float
    rotation_deg: float
    eta: int
    crossing_guarantee_deg: float
    crossing_angle_deg: float
    theta_in: float  # smallest input angle after grid superposition, degrees
    angle_guarantee: float  # arcsin((sqrt3/2) sin(theta_in/2)), degrees
    triangles: int
    min_angle: float
    theta_K: float
    theta_complement: float | None
    alpha_bound: float  # C_theta at the measured minimum angle
    beta: float
    small_angles_in_tube: bool
    n_small: int

    def to_json(self):
        d = dict(self.__dict__)
        d["delta"] = float(self.delta)
        return d


def angle_guarantee(theta_in_deg: float) -> float:
    th = math.radians(min(theta_in_deg, 180.0))
    return math.degrees(math.asin(math.sqrt(3) / 2 * math.sin(th / 2)))


def localize(pslg: PSLG, eps: float | None, target_angle: float = 30.0, size_cap: int = 50_000,
             max_edge=None, grid_delta=None):
    """Mesh with small angles quarantined near the input skeleton.

    Returns ``(mesh, complement_ids, report)``; ``complement_ids`` are the
    triangles not fully inside the 3-delta tube. With ``eps=None`` no grid is
    superimposed and the tube radius is zero (every triangle is in the
    complement); this is the right choice when no input angle is below 60
    degrees. ``grid_delta`` overrides the eps-driven cell diameter.
    """
    base = with_hull(pslg)
    skeleton = base.skeleton()
    angles = forbidden_angles(base)
    rot = choose_rotation(angles)
    if eps is None and grid_delta is None:
        noded, delta = base, None
    else:
        delta = as_rational(grid_delta) if grid_delta is not None else select_delta(base, eps)
        noded, _ = superimpose_grid(base, GridSpec(delta, rot))
    mesh = refine(noded, target_angle, size_cap, max_edge)
    K = mesh.complex
    theta_in = noded.min_input_angle()
    rep = regularity(K)
    if delta is None:
        comp = list(range(K.n_triangles))
        small = [t for t in range(K.n_triangles) if rep.min_angles[t] < 30.0]
        theta_c = rep.theta_K
        in_tube = not small
        tube = 0.0
    else:
        audit = small_angle_locations(K, skeleton, 3 * float(delta))
        comp = audit.complement
        small = audit.small_angles
        theta_c = audit.theta_complement
        in_tube = audit.all_inside
        tube = tube_area_bound(base.length(), len(base.segments), float(delta))
    report = LocalizeReport(
        delta=delta if delta is not None else Fraction(0), eps=float(eps) if eps else 0.0,
        tube_area_bound=tube, rotation_deg=math.degrees(rot) if delta is not None else 0.0,
        eta=angles.eta, crossing_guarantee_deg=math.degrees(angles.theta_guard),
        crossing_angle_deg=math.degrees(crossing_angle(angles, rot)),
        theta_in=theta_in, angle_guarantee=angle_guarantee(theta_in),
        triangles=K.n_triangles, min_angle=rep.min_angle, theta_K=rep.theta_K,
        theta_complement=theta_c, alpha_bound=angle_regularity_bound(min(rep.min_angle, 60.0)),
        beta=BETA, small_angles_in_tube=in_tube, n_small=len(small))
    return mesh, comp, report
