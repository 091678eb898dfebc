"""Pushing PL currents onto a planar complex by radial projection.

Curves (1-currents) are pushed in two steps. Inside each triangle every
clipped piece is projected radially from the triangle's center onto the
triangle boundary; the straight-line homotopy sweeps a polygon R and moves the
curve's end points along rays (Q). On each edge the resulting 1-current is then
pushed from the edge's center to the end vertices: a piece crossing the center
becomes the whole edge, end points slide to a vertex (more Q). Altogether

    T - P = Q + dR

holds exactly, with every coordinate rational.

Regions (2-currents) are top-dimensional here: the push keeps, on each
triangle, the region's multiplicity at the triangle's center. Their boundaries
are pushed as curves with the same centers, so d(pi S) = pi(dS).

Centers are shared by all currents, which makes the push linear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .complex import Chain, Complex2, regularity
from .geom import GeometryError, PLCurrent, PLRegion, orient, pl_boundary, region_boundary

EDGE_THETA = 8.0  # regularity constant of a segment (middle half as center set)
MAX_CANDIDATES = 10_000
CENTER_BITS = 40


class DeformError(GeometryError):
    pass


class CenterExhausted(DeformError):
    def __init__(self, simplex, worst):
        super().__init__(f"no admissible center in simplex {simplex}; best worst-case expansion {worst:.4g}")
        self.simplex = simplex
        self.worst = worst


# -- low level geometry ---------------------------------------------------------

def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _lerp(p, q, t):
    return (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))


def _dist(p, q) -> float:
    return math.sqrt(float((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2))


def _clip_interval(p, q, tri):
    """Closed parameter interval of p->q inside a CCW triangle, or None."""
    lo, hi = Fraction(0), Fraction(1)
    for i in range(3):
        u, v = tri[i], tri[(i + 1) % 3]
        c0 = _cross(u, v, p)
        c1 = (v[0] - u[0]) * (q[1] - p[1]) - (v[1] - u[1]) * (q[0] - p[0])
        if c1 == 0:
            if c0 < 0:
                return None
            continue
        t = -c0 / c1
        if c1 > 0:
            lo = max(lo, t)
        else:
            hi = min(hi, t)
        if lo > hi:
            return None
    return lo, hi


def _on_closed_segment(p, a, b) -> bool:
    if _cross(a, b, p) != 0:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])


def radial_exit(a, x, tri):
    """Point where the ray from a through x leaves the triangle (a inside)."""
    best = None
    for i in range(3):
        u, v = tri[i], tri[(i + 1) % 3]
        # inside value along the ray: c(a) + s * (c(x) - c(a)) with c = cross(u, v, .)
        ca, cx = _cross(u, v, a), _cross(u, v, x)
        if cx >= ca:
            continue  # not heading towards this edge
        s = ca / (ca - cx)
        if best is None or s < best:
            best = s
    if best is None:
        raise DeformError("center is not inside the triangle")
    return _lerp(a, x, best)


def project_segment(a, x, y, tri):
    """Radial image path of x->y from a on the triangle boundary, and the filler polygon.

    Returns ``(path, polygon)``: path is the list of image points from f(x) to
    f(y) through any swept corners; polygon is x, y, f(y), corners reversed, f(x).
    """
    s = orient(a, x, y)
    if s == 0:
        if _on_closed_segment(a, x, y):
            raise DeformError("segment passes through the center")
        fx = radial_exit(a, x, tri)
        return [fx, fx], []
    fx, fy = radial_exit(a, x, tri), radial_exit(a, y, tri)
    corners = [v for v in tri if orient(a, x, v) * s > 0 and orient(a, v, y) * s > 0]
    if len(corners) == 2 and orient(a, corners[0], corners[1]) * s < 0:
        corners.reverse()
    path = [fx] + corners + [fy]
    poly = [x, y] + path[::-1]
    dedup = []
    for p in poly:
        if not dedup or dedup[-1] != p:
            dedup.append(p)
    while len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return path, dedup


def project_in_triangle(current: PLCurrent, tri, center):
    """Push a 1-current lying in a triangle onto its boundary.

    Returns ``(image, filler)``. Segments already on the triangle boundary are
    kept; raises :class:`DeformError` if a segment passes through the center.
    """
    tri = [tuple(map(Fraction, v)) for v in tri]
    if _cross(tri[0], tri[1], tri[2]) < 0:
        tri = [tri[0], tri[2], tri[1]]
    a = tuple(map(Fraction, center))
    img, polys = [], []
    for x, y, m in current.segments:
        if any(_on_closed_segment(x, tri[i], tri[(i + 1) % 3]) and
               _on_closed_segment(y, tri[i], tri[(i + 1) % 3]) for i in range(3)):
            img.append((x, y, m))
            continue
        path, poly = project_segment(a, x, y, tri)
        img.extend((p, q, m) for p, q in zip(path, path[1:]) if p != q)
        if len(poly) >= 3 and _area2(poly) != 0:
            polys.append((poly, m))
    return PLCurrent(tuple(img)), PLRegion(tuple(polys), check=False)


def _area2(poly):
    return sum(poly[i][0] * poly[(i + 1) % len(poly)][1] - poly[(i + 1) % len(poly)][0] * poly[i][1]
               for i in range(len(poly)))


def _winding(p, poly) -> int:
    """Winding number of a closed polygon around p (p not on the polygon)."""
    w = 0
    n = len(poly)
    for i in range(n):
        u, v = poly[i], poly[(i + 1) % n]
        if u[1] <= p[1]:
            if v[1] > p[1] and _cross(u, v, p) > 0:
                w += 1
        elif v[1] <= p[1] and _cross(u, v, p) < 0:
            w -= 1
    return w


def region_density(region: PLRegion, p) -> int:
    return sum(m * _winding(p, verts) for verts, m in region.polygons)


def _clip_polygon(poly, tri):
    """Sutherland-Hodgman clip of a polygon against a CCW triangle (exact)."""
    out = list(poly)
    for i in range(3):
        u, v = tri[i], tri[(i + 1) % 3]
        inp, out = out, []
        if not inp:
            break
        for j in range(len(inp)):
            cur, prev = inp[j], inp[j - 1]
            cc, cp = _cross(u, v, cur), _cross(u, v, prev)
            if cc >= 0:
                if cp < 0:
                    out.append(_lerp(prev, cur, cp / (cp - cc)))
                out.append(cur)
            elif cp >= 0:
                out.append(_lerp(prev, cur, cp / (cp - cc)))
    return out


# -- decomposition of currents along the complex ----------------------------------

@dataclass
class _Pieces:
    """A curve split along the complex."""
    tri: dict  # triangle -> list of (x, y, m) strictly inside (end points may touch the boundary)
    edge: dict  # edge -> list of (x, y, m) lying on the edge
    mass_tri: dict
    boundary: dict  # point -> multiplicity (the curve's boundary)


def _locate_point(K: Complex2, p, cand):
    """('v', i) | ('e', e) | ('t', t) for a point of |K|, searching candidate triangles."""
    for t in cand:
        tri = [K.vertices[v] for v in K.triangles[t]]
        cs = [_cross(tri[i], tri[(i + 1) % 3], p) for i in range(3)]
        if min(cs) < 0:
            continue
        for i, v in enumerate(K.triangles[t]):
            if K.vertices[v] == p:
                return ("v", v)
        for i in range(3):
            if cs[i] == 0:
                a, b = K.triangles[t][i], K.triangles[t][(i + 1) % 3]
                return ("e", K.edge_index[(min(a, b), max(a, b))])
        return ("t", t)
    return None


class _Locator:
    def __init__(self, K: Complex2):
        self.K = K
        xy = K._vxy[np.array(K.triangles)]
        self.lo = xy.min(axis=1)
        self.hi = xy.max(axis=1)
        span = float(max(self.hi.max(axis=0) - self.lo.min(axis=0))) or 1.0
        self.pad = 1e-9 * span

    def candidates(self, lo, hi):
        m = np.all(self.hi >= np.asarray(lo) - self.pad, axis=1) & np.all(self.lo <= np.asarray(hi) + self.pad, axis=1)
        return np.nonzero(m)[0].tolist()

    def point(self, p):
        f = (float(p[0]), float(p[1]))
        loc = _locate_point(self.K, p, self.candidates(f, f))
        if loc is None:
            raise DeformError(f"point {tuple(map(float, p))} is outside the complex")
        return loc


def split_curve(K: Complex2, T: PLCurrent, loc: _Locator | None = None) -> _Pieces:
    loc = loc or _Locator(K)
    tri, edge, mass = {}, {}, {}
    for p, q, m in T.normalized().segments:
        lo = (min(float(p[0]), float(q[0])), min(float(p[1]), float(q[1])))
        hi = (max(float(p[0]), float(q[0])), max(float(p[1]), float(q[1])))
        cand = loc.candidates(lo, hi)
        ivs = {}
        ts = {Fraction(0), Fraction(1)}
        for t in cand:
            iv = _clip_interval(p, q, [K.vertices[v] for v in K.triangles[t]])
            if iv is not None and iv[0] < iv[1]:
                ivs[t] = iv
                ts.update(iv)
        ts = sorted(ts)
        covered = Fraction(0)
        for t0, t1 in zip(ts, ts[1:]):
            x, y = _lerp(p, q, t0), _lerp(p, q, t1)
            mid = _lerp(p, q, (t0 + t1) / 2)
            owners = [t for t, (a, b) in ivs.items() if a <= t0 and t1 <= b]
            if not owners:
                raise DeformError("curve leaves the complex")
            kind = _locate_point(K, mid, owners)
            if kind[0] == "e":
                edge.setdefault(kind[1], []).append((x, y, m))
            elif kind[0] == "t":
                tri.setdefault(kind[1], []).append((x, y, m))
                mass[kind[1]] = mass.get(kind[1], 0.0) + abs(m) * _dist(x, y)
            else:
                raise DeformError("degenerate piece")
            covered += t1 - t0
    return _Pieces(tri, edge, mass, pl_boundary(T))


# -- centers ---------------------------------------------------------------------

def _halton(i: int, base: int) -> float:
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


def incenter(tri):
    a = _dist(tri[1], tri[2])
    b = _dist(tri[2], tri[0])
    c = _dist(tri[0], tri[1])
    s = a + b + c
    x = (a * float(tri[0][0]) + b * float(tri[1][0]) + c * float(tri[2][0])) / s
    y = (a * float(tri[0][1]) + b * float(tri[1][1]) + c * float(tri[2][1])) / s
    area = abs(float(_cross(tri[0], tri[1], tri[2]))) / 2
    return (x, y), 2 * area / s


def _incenters(K: Complex2) -> np.ndarray:
    """Float incenters of all triangles of K."""
    xy = K._vxy[np.array(K.triangles)]
    a = np.linalg.norm(xy[:, 1] - xy[:, 2], axis=1)
    b = np.linalg.norm(xy[:, 2] - xy[:, 0], axis=1)
    c = np.linalg.norm(xy[:, 0] - xy[:, 1], axis=1)
    w = np.stack([a, b, c], axis=1)
    return (w[:, :, None] * xy).sum(axis=1) / w.sum(axis=1)[:, None]


def center_candidates(tri, seed: int):
    """Deterministic low-discrepancy points in the disk of radius inradius/2 about the incenter."""
    (cx, cy), r = incenter(tri)
    rad = 0.999 * r / 2
    den = 2 ** CENTER_BITS
    for k in range(1, MAX_CANDIDATES + 1):
        i = k + 7919 * seed
        u, v = _halton(i, 2), _halton(i, 3)
        rho = rad * math.sqrt(u)
        phi = 2 * math.pi * v
        yield (Fraction(round((cx + rho * math.cos(phi)) * den), den),
               Fraction(round((cy + rho * math.sin(phi)) * den), den))


def _triangle_expansions(a, tri, curve_pieces, region_parts, area_tri):
    """Expansion factor of each current in one triangle for center a, or None
    when a lies on some current."""
    out = []
    for pieces in curve_pieces:
        pre = img = 0.0
        for x, y, m in pieces:
            if orient(a, x, y) == 0 and _on_closed_segment(a, x, y):
                return None
            if orient(a, x, y) == 0:
                # radial piece: its image is a single point
                pre += abs(m) * _dist(x, y)
                continue
            path, _ = project_segment(a, x, y, tri)
            pre += abs(m) * _dist(x, y)
            img += abs(m) * sum(_dist(p, q) for p, q in zip(path, path[1:]))
        out.append(img / pre if pre > 0 else 0.0)
    for polys, mass_in in region_parts:
        dens = 0
        for verts, m in polys:
            for i in range(len(verts)):
                if _on_closed_segment(a, verts[i], verts[(i + 1) % len(verts)]):
                    return None
            dens += m * _winding(a, verts)
        out.append(abs(dens) * area_tri / mass_in if mass_in > 0 else (0.0 if dens == 0 else math.inf))
    return out


def select_center(tri, curves, eps: float = 1.0, regions=(), m: int | None = None, n: int | None = None,
                  theta=None, seed: int = 0):
    """A center whose expansion for every listed current is at most (2m+2n+eps)*theta.

    ``curves`` are lists of ``(x, y, mult)`` pieces inside the triangle,
    ``regions`` lists of ``(polygon, mult)`` already clipped to the triangle.
    Returns ``(center, expansions, bound)``.
    """
    tri = [tuple(map(Fraction, v)) for v in tri]
    if _cross(tri[0], tri[1], tri[2]) < 0:
        tri = [tri[0], tri[2], tri[1]]
    m = len(curves) if m is None else m
    n = len(regions) if n is None else n
    if theta is None:
        theta = triangle_theta(tri)
    bound = (2 * m + 2 * n + eps) * theta
    area_tri = abs(float(_cross(*tri))) / 2
    region_parts = [(polys, sum(abs(mm) * abs(float(_area2(v))) / 2 for v, mm in polys)) for polys in regions]
    worst_best = math.inf
    for a in center_candidates(tri, seed):
        ex = _triangle_expansions(a, tri, curves, region_parts, area_tri)
        if ex is None:
            continue
        worst = max(ex, default=0.0)
        if worst <= bound:
            return a, ex, bound
        worst_best = min(worst_best, worst)
    raise CenterExhausted(seed, worst_best)


def triangle_theta(tri) -> float:
    a = _dist(tri[1], tri[2])
    b = _dist(tri[2], tri[0])
    c = _dist(tri[0], tri[1])
    area = abs(float(_cross(tri[0], tri[1], tri[2]))) / 2
    perim = a + b + c
    diam = max(a, b, c)
    r = 2 * area / perim
    return diam * perim / (math.pi * (r / 2) ** 2) + 2 * diam / r


@dataclass
class CenterChoice:
    triangle: dict  # triangle -> center point
    edge: dict  # edge -> parameter in [1/4, 3/4] from the low vertex

    def edge_point(self, K: Complex2, e: int):
        a, b = K.edges[e]
        return _lerp(K.vertices[a], K.vertices[b], self.edge[e])


# -- the push ----------------------------------------------------------------------

@dataclass
class PushedCurve:
    chain: Chain
    Q: PLCurrent
    R: PLRegion
    step1: PLCurrent  # image on the 1-skeleton before the edge push
    pushed_boundary: Chain  # 0-chain: pi(dT)


@dataclass
class DeformCertificate:
    m: int
    n: int
    eps: float
    theta_K: float
    delta: float  # largest simplex diameter
    factor: float  # (2m + 2n + eps) * theta_K
    centers: CenterChoice
    curves: list = field(default_factory=list)  # per curve: dict of masses and checks
    regions: list = field(default_factory=list)
    triangle_expansion: dict = field(default_factory=dict)  # triangle -> (max ratio, bound)
    edge_expansion: dict = field(default_factory=dict)
    Q: list = field(default_factory=list)
    R: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (all(c["bounds_ok"] and c["boundary_commutes"] for c in self.curves)
                and all(r["bounds_ok"] and r["boundary_commutes"] for r in self.regions)
                and all(x <= b * (1 + 1e-12) for x, b in self.triangle_expansion.values())
                and all(x <= b * (1 + 1e-12) for x, b in self.edge_expansion.values()))

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "eps": self.eps, "theta_K": self.theta_K,
                "Delta": self.delta, "factor": self.factor, "ok": self.ok,
                "curves": self.curves, "regions": self.regions,
                "max_triangle_expansion_ratio": max((x / b for x, b in self.triangle_expansion.values()
                                                     if b > 0), default=0.0),
                "max_edge_expansion_ratio": max((x / b for x, b in self.edge_expansion.values()
                                                 if b > 0), default=0.0)}


def _edge_param(K, e, p) -> Fraction:
    a, b = K.edges[e]
    A, B = K.vertices[a], K.vertices[b]
    if A[0] != B[0]:
        return (p[0] - A[0]) / (B[0] - A[0])
    return (p[1] - A[1]) / (B[1] - A[1])


def _push_step1(K, pieces: _Pieces, centers: CenterChoice, loc):
    """Radial push inside triangles: pieces on edges (by edge), Q and R parts."""
    on_edges = {e: list(v) for e, v in pieces.edge.items()}
    Q, R = [], []
    point_images = {}
    for t, segs in pieces.tri.items():
        tv = K.triangles[t]
        tri = [K.vertices[v] for v in tv]
        a = centers.triangle[t]
        for x, y, m in segs:
            path, poly = project_segment(a, x, y, tri)
            for p, q in zip(path, path[1:]):
                if p == q:
                    continue
                e = _edge_of(K, tv, tri, p, q)
                on_edges.setdefault(e, []).append((p, q, m))
            if len(poly) >= 3 and _area2(poly) != 0:
                R.append((poly, m))
    for p, mult in pieces.boundary.items():
        kind, t = loc.point(p)
        if kind != "t":
            continue
        fp = radial_exit(centers.triangle[t], p, [K.vertices[v] for v in K.triangles[t]])
        point_images[p] = fp
        Q.append((fp, p, mult))
    return on_edges, Q, R, point_images


def _edge_of(K, tv, tri, p, q):
    for i in range(3):
        u, v = tri[i], tri[(i + 1) % 3]
        if _on_closed_segment(p, u, v) and _on_closed_segment(q, u, v):
            a, b = tv[i], tv[(i + 1) % 3]
            return K.edge_index[(min(a, b), max(a, b))]
    raise DeformError("image piece is not on a triangle edge")


def _push_step2(K, on_edges: dict, centers: CenterChoice):
    coeffs = {}
    Q = []
    for e, segs in on_edges.items():
        c = centers.edge[e]
        total = 0
        bnd = {}
        for x, y, m in segs:
            tx, ty = _edge_param(K, e, x), _edge_param(K, e, y)
            if tx == c or ty == c:
                raise DeformError("edge center on a piece end point")
            if min(tx, ty) < c < max(tx, ty):
                total += m if tx < ty else -m
            bnd[tx] = bnd.get(tx, 0) - m
            bnd[ty] = bnd.get(ty, 0) + m
        if total:
            coeffs[e] = total
        a, b = K.edges[e]
        for tp, mult in bnd.items():
            if mult == 0 or tp in (0, 1):
                continue
            p = _lerp(K.vertices[a], K.vertices[b], tp)
            g = K.vertices[a] if tp < c else K.vertices[b]
            Q.append((g, p, mult))
    return coeffs, Q


def _choose_edge_centers(K, on_edges_all: list, eps, m, n, seed_base=0):
    """Middle-half parameters avoiding piece end points with bounded expansion."""
    params = {}
    expansions = {}
    edges = set()
    for oe in on_edges_all:
        edges.update(oe)
    bound = (2 * m + 2 * n + eps) * EDGE_THETA
    den = 2 ** CENTER_BITS
    for e in sorted(edges):
        a, b = K.edges[e]
        L = _dist(K.vertices[a], K.vertices[b])
        per = []
        forbid = set()
        for oe in on_edges_all:
            segs = [(_edge_param(K, e, x), _edge_param(K, e, y), mm) for x, y, mm in oe.get(e, [])]
            per.append(segs)
            for tx, ty, _ in segs:
                forbid.update((tx, ty))
        best = None
        for k in range(1, MAX_CANDIDATES + 1):
            c = Fraction(round((0.25 + 0.5 * _halton(k + 31 * (e + seed_base), 2)) * den), den)
            if c in forbid:
                continue
            worst = 0.0
            for segs in per:
                pre = sum(abs(mm) * abs(float(ty - tx)) for tx, ty, mm in segs)
                tot = sum((mm if tx < ty else -mm) for tx, ty, mm in segs if min(tx, ty) < c < max(tx, ty))
                if pre > 0:
                    worst = max(worst, abs(tot) / pre)
            if worst <= bound:
                best = (c, worst)
                break
        if best is None:
            raise CenterExhausted(("edge", e), math.inf)
        params[e] = best[0]
        expansions[e] = (best[1], bound)
    return params, expansions


def deform_currents(curves, regions, K: Complex2, eps: float = 1.0, centers: CenterChoice | None = None,
                    m: int | None = None, n: int | None = None, verify_forms: int = 0):
    """Push curves and regions onto K with shared centers.

    Returns ``(curve_chains, region_chains, certificate)``. Pass ``centers``
    (for example from an earlier certificate) to reuse the projection, and
    ``verify_forms`` > 0 to record the Stokes pairing residual per curve.
    """
    curves = list(curves)
    regions = list(regions)
    m = len(curves) if m is None else m
    n = len(regions) if n is None else n
    loc = _Locator(K)
    rep = regularity(K)
    theta_sigma = rep.theta_sigma
    delta = float(rep.diameter.max())
    boundaries = [region_boundary(S) for S in regions]
    all_curves = curves + boundaries
    pieces = [split_curve(K, T, loc) for T in all_curves]
    region_clips = []
    for S in regions:
        per_tri = {}
        for verts, mult in S.polygons:
            xs = [float(v[0]) for v in verts]
            ys = [float(v[1]) for v in verts]
            for t in loc.candidates((min(xs), min(ys)), (max(xs), max(ys))):
                tri = [K.vertices[v] for v in K.triangles[t]]
                cl = _clip_polygon(list(verts), tri)
                if len(cl) >= 3 and _area2(cl) != 0:
                    per_tri.setdefault(t, []).append((cl, mult))
        region_clips.append(per_tri)
    tri_exp = {}
    if centers is None:
        tri_centers = {}
        active = set()
        for pc in pieces:
            active.update(pc.tri)
        for rc in region_clips:
            active.update(rc)
        # untouched triangles get their incenter, rounded to a dyadic point
        den = 2 ** CENTER_BITS
        for t, (cx, cy) in enumerate(_incenters(K).tolist()):
            if t not in active:
                tri_centers[t] = (Fraction(round(cx * den), den), Fraction(round(cy * den), den))
        for t in sorted(active):
            tri = [K.vertices[v] for v in K.triangles[t]]
            cur = [pc.tri.get(t, []) for pc in pieces]
            reg = [rc.get(t, []) for rc in region_clips]
            a, ex, bound = select_center(tri, cur, eps, reg, m, n, float(theta_sigma[t]), seed=t)
            tri_centers[t] = a
            tri_exp[t] = (max(ex, default=0.0), bound)
        centers = CenterChoice(tri_centers, {})
    else:
        for t in range(K.n_triangles):
            tri = [K.vertices[v] for v in K.triangles[t]]
            cur = [pc.tri.get(t, []) for pc in pieces]
            reg = [rc.get(t, []) for rc in region_clips]
            area = abs(float(_cross(*tri))) / 2
            parts = [(polys, sum(abs(mm) * abs(float(_area2(v))) / 2 for v, mm in polys)) for polys in reg]
            ex = _triangle_expansions(centers.triangle[t], tri, cur, parts, area)
            if ex is None:
                raise DeformError(f"shared center of triangle {t} lies on a current")
            tri_exp[t] = (max(ex, default=0.0), (2 * m + 2 * n + eps) * float(theta_sigma[t]))
    step1 = [_push_step1(K, pc, centers, loc) for pc in pieces]
    edge_exp = {}
    if not centers.edge:
        params, edge_exp = _choose_edge_centers(K, [s[0] for s in step1], eps, m, n)
        # edges without pieces get the midpoint
        for e in range(K.n_edges):
            params.setdefault(e, Fraction(1, 2))
        centers.edge = params
    pushed = []
    for T, pc, (on_edges, Q1, R1, _) in zip(all_curves, pieces, step1):
        coeffs, Q2 = _push_step2(K, on_edges, centers)
        P = Chain(K, 1, coeffs)
        step_img = PLCurrent(tuple((x, y, mm) for segs in on_edges.values() for x, y, mm in segs))
        Q = PLCurrent(tuple((p, q, mm) for p, q, mm in Q1 + Q2 if p != q))
        R = PLRegion(tuple(R1), check=False)
        pushed.append(PushedCurve(P, Q, R, step_img, _push_points(K, pc.boundary, centers, loc)))
    curve_chains = [pc.chain for pc in pushed[:len(curves)]]
    region_chains = []
    for S in regions:
        coeffs = {}
        xs = [float(v[0]) for verts, _ in S.polygons for v in verts]
        ys = [float(v[1]) for verts, _ in S.polygons for v in verts]
        near = loc.candidates((min(xs), min(ys)), (max(xs), max(ys))) if xs else []
        for t in near:
            d = region_density(S, centers.triangle[t])
            if d:
                coeffs[t] = d
        region_chains.append(Chain(K, 2, coeffs))
    factor = (2 * m + 2 * n + eps) * rep.theta_K
    cert = DeformCertificate(m, n, eps, rep.theta_K, delta, factor, centers,
                             triangle_expansion=tri_exp, edge_expansion=edge_exp)
    from .complex import apply_boundary  # local: avoid a cycle at import time
    for T, pc in zip(curves, pushed[:len(curves)]):
        MT, MdT = T.mass(), float(sum(abs(v) for v in pl_boundary(T).values()))
        MP = pc.chain.mass()
        MdP = float(sum(abs(v) for v in apply_boundary(pc.chain).coeffs.values()))
        MQ, MR = pc.Q.mass(), pc.R.mass()
        c = factor
        bounds = {"M(P)": c * MT + delta * c ** 2 * MdT, "M(dP)": c ** 2 * MdT,
                  "M(Q)+M(R)": delta * c * (MT + (1 + c) * MdT)}
        cert.curves.append({
            "M(T)": MT, "M(dT)": MdT, "M(P)": MP, "M(dP)": MdP, "M(Q)": MQ, "M(R)": MR,
            "bounds": bounds,
            "bounds_ok": MP <= bounds["M(P)"] + 1e-9 and MdP <= bounds["M(dP)"] + 1e-9
            and MQ + MR <= bounds["M(Q)+M(R)"] + 1e-9,
            "boundary_commutes": apply_boundary(pc.chain) == pc.pushed_boundary})
        if verify_forms:
            cert.curves[-1]["stokes_residual"] = homotopy_residual(T, pc.chain, pc.Q, pc.R, verify_forms)
        cert.Q.append(pc.Q)
        cert.R.append(pc.R)
    for S, O, pc in zip(regions, region_chains, pushed[len(curves):]):
        MS = S.mass()
        MdS = region_boundary(S).mass()
        MO = O.mass()
        MdO = apply_boundary(O).mass()
        c = factor
        bounds = {"M(O)": MS + delta * c * MdS, "M(dO)": c * MdS}
        cert.regions.append({
            "M(S)": MS, "M(dS)": MdS, "M(O)": MO, "M(dO)": MdO, "bounds": bounds,
            "bounds_ok": MO <= bounds["M(O)"] + 1e-9 and MdO <= bounds["M(dO)"] + 1e-9,
            "boundary_commutes": apply_boundary(O) == pc.chain,
            "overlay_matches": _overlay_check(S, K, O)})
    return curve_chains, region_chains, cert


def _push_points(K, points: dict, centers: CenterChoice, loc: _Locator) -> Chain:
    """Push a 0-current to the vertices: radial in triangles, then along edges."""
    coeffs = {}
    for p, mult in points.items():
        kind, idx = loc.point(p)
        if kind == "t":
            tri = [K.vertices[v] for v in K.triangles[idx]]
            p = radial_exit(centers.triangle[idx], p, tri)
            kind, idx = loc.point(p)
        if kind == "e":
            a, b = K.edges[idx]
            idx = a if _edge_param(K, idx, p) < centers.edge[idx] else b
        coeffs[idx] = coeffs.get(idx, 0) + mult
    return Chain(K, 0, coeffs)


def push_curve(T: PLCurrent, K: Complex2, centers: CenterChoice) -> PushedCurve:
    """Push one curve with fixed centers (no expansion checks)."""
    loc = _Locator(K)
    pc = split_curve(K, T, loc)
    on_edges, Q1, R1, _ = _push_step1(K, pc, centers, loc)
    coeffs, Q2 = _push_step2(K, on_edges, centers)
    step_img = PLCurrent(tuple((x, y, mm) for segs in on_edges.values() for x, y, mm in segs))
    return PushedCurve(Chain(K, 1, coeffs),
                       PLCurrent(tuple((p, q, mm) for p, q, mm in Q1 + Q2 if p != q)),
                       PLRegion(tuple(R1), check=False), step_img,
                       _push_points(K, pc.boundary, centers, loc))


def _overlay_check(S, K, O):
    """True/False against the exact overlay when S conforms to K, else None."""
    ov = overlay_coefficients(S, K)
    if any(c.denominator != 1 for c in ov.values()):
        return None
    return ov == dict(O.coeffs)


def overlay_coefficients(S: PLRegion, K: Complex2) -> dict:
    """Signed overlap area of S with each triangle divided by the triangle's area (exact)."""
    loc = _Locator(K)
    out = {}
    for verts, mult in S.polygons:
        xs = [float(v[0]) for v in verts]
        ys = [float(v[1]) for v in verts]
        for t in loc.candidates((min(xs), min(ys)), (max(xs), max(ys))):
            tri = [K.vertices[v] for v in K.triangles[t]]
            cl = _clip_polygon(list(verts), tri)
            if len(cl) >= 3:
                a = Fraction(_area2(cl), 2)
                if a:
                    out[t] = out.get(t, 0) + mult * a / K.triangle_area(t)
    return {t: c for t, c in out.items() if c}


def homotopy_residual(T: PLCurrent, P: Chain, Q: PLCurrent, R: PLRegion, n_forms: int = 20, seed: int = 0):
    """Largest relative residual of <T - P - Q - dR, phi> over random polynomial 1-forms.

    ``<dR, phi>`` is evaluated as ``<R, d phi>``. Everything is exact, so the
    residual of a correct construction is 0.
    """
    import random

    from .forms import pair, random_form
    rng = random.Random(seed)
    Pc = P.to_current()
    worst = 0.0
    for _ in range(n_forms):
        phi = random_form(1, rng)
        parts = [pair(T, phi), pair(Pc, phi), pair(Q, phi), pair(R, phi.d())]
        res = parts[0] - parts[1] - parts[2] - parts[3]
        scale = max(1.0, max(abs(float(x)) for x in parts))
        worst = max(worst, abs(float(res)) / scale)
    return worst
