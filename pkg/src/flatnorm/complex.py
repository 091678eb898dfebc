"""Simplicial 2-complexes in the plane, chains, boundary matrices and
regularity metrics."""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .geom import GeometryError, PLCurrent, PLRegion, dist2, orient, point, sign


class ComplexError(GeometryError):
    """Invalid simplicial complex; ``offenders`` lists the simplices involved."""

    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class Complex2:
    """A planar simplicial 2-complex with canonically oriented simplices.

    Edges run from the lower to the higher vertex index and are sorted;
    triangles are stored counter-clockwise in the order given.
    """

    def __init__(self, vertices, triangles, extra_edges=(), check_embedding=True):
        self.vertices = tuple(point(*v) for v in vertices)
        nv = len(self.vertices)
        tris = []
        bad = []
        seen = {}
        for k, tri in enumerate(triangles):
            a, b, c = (int(i) for i in tri)
            if not all(0 <= i < nv for i in (a, b, c)) or len({a, b, c}) < 3:
                bad.append(k)
                continue
            o = orient(self.vertices[a], self.vertices[b], self.vertices[c])
            if o == 0:
                raise ComplexError(f"triangle {k} is degenerate", [k])
            if o < 0:
                b, c = c, b
            key = frozenset((a, b, c))
            if key in seen:
                raise ComplexError(f"duplicate triangle {k} (same as {seen[key]})", [seen[key], k])
            seen[key] = k
            tris.append((a, b, c))
        if bad:
            raise ComplexError("triangles with invalid vertex indices", bad)
        self.triangles = tuple(tris)
        eset = set()
        for a, b, c in tris:
            for u, v in ((a, b), (b, c), (c, a)):
                eset.add((min(u, v), max(u, v)))
        for u, v in extra_edges:
            u, v = int(u), int(v)
            if u == v or not (0 <= u < nv and 0 <= v < nv):
                raise ComplexError(f"invalid edge ({u}, {v})")
            eset.add((min(u, v), max(u, v)))
        self.edges = tuple(sorted(eset))
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.edge_triangles = defaultdict(list)
        for t, (a, b, c) in enumerate(tris):
            for u, v in ((a, b), (b, c), (c, a)):
                self.edge_triangles[self.edge_index[(min(u, v), max(u, v))]].append(t)
        over = [e for e, ts in self.edge_triangles.items() if len(ts) > 2]
        if over:
            raise ComplexError("edges shared by more than two triangles", over)
        self._d1 = None
        self._d2 = None
        self._vxy = np.array([[float(x), float(y)] for x, y in self.vertices]).reshape(-1, 2)
        if check_embedding:
            self._check_embedding()

    # -- validation ---------------------------------------------------------

    def _check_embedding(self):
        V = self.vertices
        vxy = self._vxy
        if len(set(V)) != len(V):
            first = {}
            dup = [i for i, v in enumerate(V) if first.setdefault(v, i) != i]
            raise ComplexError("duplicate vertex coordinates", dup)
        # adjacent triangles must lie on opposite sides of their shared edge
        for e, ts in self.edge_triangles.items():
            if len(ts) == 2:
                u, v = self.edges[e]
                apex = [next(i for i in self.triangles[t] if i not in (u, v)) for t in ts]
                if sign(orient(V[u], V[v], V[apex[0]])) == sign(orient(V[u], V[v], V[apex[1]])):
                    raise ComplexError("triangles overlap across a shared edge", ts)
        simplices = [("t", k, tri) for k, tri in enumerate(self.triangles)]
        used = {i for tri in self.triangles for i in tri}
        tri_edges = {i for i in range(len(self.edges)) if self.edge_triangles.get(i)}
        loose = [k for k in range(len(self.edges)) if k not in tri_edges]
        simplices += [("e", k, self.edges[k]) for k in loose]
        used |= {i for k in loose for i in self.edges[k]}
        simplices += [("v", i, (i,)) for i in range(len(V)) if i not in used]
        if len(simplices) < 2:
            return
        boxes = np.array([[vxy[list(s[2])][:, 0].min(), vxy[list(s[2])][:, 1].min(),
                           vxy[list(s[2])][:, 0].max(), vxy[list(s[2])][:, 1].max()]
                          for s in simplices])
        span = max(boxes[:, 2].max() - boxes[:, 0].min(), boxes[:, 3].max() - boxes[:, 1].min(), 1e-300)
        tol = 1e-9 * max(span, float(np.abs(vxy).max()))
        cell = max(span / max(1.0, math.sqrt(len(simplices))), 1e-300)
        buckets = defaultdict(list)
        x0, y0 = boxes[:, 0].min(), boxes[:, 1].min()
        for idx, (bx0, by0, bx1, by1) in enumerate(boxes):
            for gx in range(int((bx0 - tol - x0) // cell), int((bx1 + tol - x0) // cell) + 1):
                for gy in range(int((by0 - tol - y0) // cell), int((by1 + tol - y0) // cell) + 1):
                    buckets[(gx, gy)].append(idx)
        pred = _Pred(V, [tuple(r) for r in vxy.tolist()])
        checked = set()
        for members in buckets.values():
            for i, j in itertools.combinations(members, 2):
                if (i, j) in checked:
                    continue
                checked.add((i, j))
                bi, bj = boxes[i], boxes[j]
                if bi[0] > bj[2] + tol or bj[0] > bi[2] + tol or bi[1] > bj[3] + tol or bj[1] > bi[3] + tol:
                    continue
                if not _proper_pair(pred, simplices[i][2], simplices[j][2]):
                    raise ComplexError("simplices intersect improperly",
                                       [simplices[i][:2], simplices[j][:2]])

    # -- structure ----------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def triangle_edges(self, t: int):
        """[(edge index, sign)] of the oriented boundary of triangle t."""
        a, b, c = self.triangles[t]
        out = []
        for u, v in ((a, b), (b, c), (c, a)):
            out.append((self.edge_index[(min(u, v), max(u, v))], 1 if u < v else -1))
        return out

    def edge_length(self, e: int) -> float:
        return self.edge_lengths()[e]

    def edge_lengths(self) -> list:
        """Float lengths (square roots of exact squared lengths), cached."""
        if not hasattr(self, "_elen"):
            V = self.vertices
            self._elen = [math.sqrt(dist2(V[u], V[v])) for u, v in self.edges]
        return self._elen

    def triangle_areas(self) -> list:
        """Exact areas, cached."""
        if not hasattr(self, "_tarea"):
            V = self.vertices
            self._tarea = [orient(V[a], V[b], V[c]) / 2 for a, b, c in self.triangles]
        return self._tarea

    def edge_length2(self, e: int) -> Fraction:
        u, v = self.edges[e]
        return dist2(self.vertices[u], self.vertices[v])

    def triangle_area(self, t: int) -> Fraction:
        return self.triangle_areas()[t]

    def boundary_edges(self):
        return [e for e in range(len(self.edges)) if len(self.edge_triangles.get(e, ())) == 1]

    def find_vertex(self, p) -> int | None:
        if not hasattr(self, "_vmap"):
            self._vmap = {v: i for i, v in enumerate(self.vertices)}
        return self._vmap.get(point(*p))

    def vertex_neighbors(self):
        if not hasattr(self, "_nbrs"):
            nb = defaultdict(list)
            for k, (u, v) in enumerate(self.edges):
                nb[u].append((v, k, 1))
                nb[v].append((u, k, -1))
            self._nbrs = nb
        return self._nbrs

    def scaled(self, factor) -> "Complex2":
        from .geom import as_rational
        f = as_rational(factor)
        return Complex2([(x * f, y * f) for x, y in self.vertices], self.triangles,
                        extra_edges=self.edges, check_embedding=False)

    def subcomplex(self, triangle_ids) -> "Complex2":
        ids = sorted(set(triangle_ids))
        return Complex2(self.vertices, [self.triangles[t] for t in ids], check_embedding=False)

    def boundary_matrix(self, k: int) -> "BoundaryMatrix":
        return boundary_matrix(self, k)


class _Pred:
    """Orientation signs with a float filter and exact fallback."""

    def __init__(self, V, F):
        self.V = V
        self.F = F
        den = 1
        for x, y in V:
            for c in (x, y):
                den = den * c.denominator // math.gcd(den, c.denominator)
            if den.bit_length() > 256:
                break
        # integer coordinates on a common grid make the exact fallback cheap
        self.I = [(int(x * den), int(y * den)) for x, y in V] if den.bit_length() <= 256 else None

    def osgn(self, a, b, c) -> int:
        F = self.F
        ax, ay = F[a]
        bx, by = F[b]
        cx, cy = F[c]
        l = (bx - ax) * (cy - ay)
        r = (by - ay) * (cx - ax)
        det = l - r
        err = 1e-12 * (abs(l) + abs(r))
        if det > err:
            return 1
        if det < -err:
            return -1
        if self.I is not None:
            I = self.I
            (ax, ay), (bx, by), (cx, cy) = I[a], I[b], I[c]
            d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            return (d > 0) - (d < 0)
        return sign(orient(self.V[a], self.V[b], self.V[c]))

    def between(self, a, b, p) -> bool:
        """p (collinear with a, b) lies strictly between a and b."""
        V = self.V
        A, B, P = V[a], V[b], V[p]
        d = (P[0] - A[0]) * (B[0] - A[0]) + (P[1] - A[1]) * (B[1] - A[1])
        return 0 < d < (B[0] - A[0]) ** 2 + (B[1] - A[1]) ** 2

    def in_simplex(self, p, s) -> bool:
        """Vertex p lies in simplex s minus its vertices."""
        if p in s:
            return False
        if len(s) == 1:
            return self.V[p] == self.V[s[0]]
        if len(s) == 2:
            return self.osgn(s[0], s[1], p) == 0 and self.between(s[0], s[1], p)
        a, b, c = s
        o = (self.osgn(a, b, p), self.osgn(b, c, p), self.osgn(c, a, p))
        return all(x >= 0 for x in o) or all(x <= 0 for x in o)


def _proper_pair(P: _Pred, s1, s2) -> bool:
    """Two simplices (vertex-index tuples) meet only in a common face."""
    shared = set(s1) & set(s2)
    for verts, other in ((s1, s2), (s2, s1)):
        for i in other:
            if i not in shared and P.in_simplex(i, verts):
                return False
    for a, b in _simplex_edges(s1):
        for c, d in _simplex_edges(s2):
            common = {a, b} & {c, d}
            if common:
                if {a, b} == {c, d}:
                    continue
                sv = common.pop()
                x = b if a == sv else a
                y = d if c == sv else c
                if P.osgn(sv, x, y) == 0:
                    V = P.V
                    dot = (V[x][0] - V[sv][0]) * (V[y][0] - V[sv][0]) + (V[x][1] - V[sv][1]) * (V[y][1] - V[sv][1])
                    if dot > 0:
                        return False
                continue
            o1, o2 = P.osgn(a, b, c), P.osgn(a, b, d)
            if o1 * o2 < 0 and P.osgn(c, d, a) * P.osgn(c, d, b) < 0:
                return False
    return True


def _simplex_edges(s):
    if len(s) == 3:
        return [(s[0], s[1]), (s[1], s[2]), (s[2], s[0])]
    if len(s) == 2:
        return [(s[0], s[1])]
    return []


def build_complex(vertices, triangles, check_embedding=True) -> Complex2:
    return Complex2(vertices, triangles, check_embedding=check_embedding)


@dataclass
class BoundaryMatrix:
    """Signed incidence matrix: rows are (k-1)-simplices, columns k-simplices."""

    k: int
    matrix: sp.csc_matrix

    @property
    def shape(self):
        return self.matrix.shape

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def column(self, j: int):
        m = self.matrix
        lo, hi = m.indptr[j], m.indptr[j + 1]
        return list(zip(m.indices[lo:hi].tolist(), m.data[lo:hi].tolist()))

    def __matmul__(self, other: "BoundaryMatrix"):
        return self.matrix @ other.matrix


def boundary_matrix(K: Complex2, k: int) -> BoundaryMatrix:
    if k == 1:
        if K._d1 is None:
            rows, cols, vals = [], [], []
            for j, (u, v) in enumerate(K.edges):
                rows += [u, v]
                cols += [j, j]
                vals += [-1, 1]
            K._d1 = sp.csc_matrix((vals, (rows, cols)), shape=(K.n_vertices, K.n_edges), dtype=np.int64)
        return BoundaryMatrix(1, K._d1)
    if k == 2:
        if K._d2 is None:
            rows, cols, vals = [], [], []
            for t in range(K.n_triangles):
                for e, s in K.triangle_edges(t):
                    rows.append(e)
                    cols.append(t)
                    vals.append(s)
            K._d2 = sp.csc_matrix((vals, (rows, cols)), shape=(K.n_edges, K.n_triangles), dtype=np.int64)
        return BoundaryMatrix(2, K._d2)
    raise ValueError("k must be 1 or 2")


class Chain:
    """Sparse chain of a given dimension on a complex.

    Coefficients are ints (integral chains) or Fractions; zeros are dropped.
    """

    def __init__(self, complex: Complex2, dim: int, coeffs=None):
        if dim not in (0, 1, 2):
            raise ValueError("chain dimension must be 0, 1 or 2")
        self.complex = complex
        self.dim = dim
        size = (complex.n_vertices, complex.n_edges, complex.n_triangles)[dim]
        out = {}
        for i, c in dict(coeffs or {}).items():
            i = int(i)
            if not 0 <= i < size:
                raise IndexError(f"simplex index {i} out of range for dimension {dim}")
            if isinstance(c, Fraction) and c.denominator == 1:
                c = c.numerator
            elif isinstance(c, (np.integer,)):
                c = int(c)
            elif isinstance(c, float):
                c = int(c) if c.is_integer() else Fraction(c)
            if c != 0:
                out[i] = c
        self.coeffs = out

    @property
    def size(self):
        return (self.complex.n_vertices, self.complex.n_edges, self.complex.n_triangles)[self.dim]

    @property
    def integral(self) -> bool:
        return all(isinstance(c, int) or (isinstance(c, Fraction) and c.denominator == 1)
                   for c in self.coeffs.values())

    def _check(self, other):
        if other.complex is not self.complex or other.dim != self.dim:
            raise ValueError("chains live on different complexes or dimensions")

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return Chain(self.complex, self.dim, out)

    def __neg__(self):
        return Chain(self.complex, self.dim, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        return Chain(self.complex, self.dim, {i: k * c for i, c in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, Chain):
            return NotImplemented
        return other.complex is self.complex and other.dim == self.dim and other.coeffs == self.coeffs

    def __repr__(self):
        return f"Chain(dim={self.dim}, {dict(sorted(self.coeffs.items()))})"

    def is_zero(self) -> bool:
        return not self.coeffs

    def vector(self) -> np.ndarray:
        v = np.zeros(self.size, dtype=object)
        for i, c in self.coeffs.items():
            v[i] = c
        return v

    def support(self):
        return set(self.coeffs)

    def mass(self) -> float:
        return chain_mass(self)

    def to_current(self):
        K = self.complex
        if self.dim == 1:
            if not self.integral:
                raise ValueError("only integral chains convert to integral currents")
            segs = []
            for e, c in sorted(self.coeffs.items()):
                u, v = K.edges[e]
                segs.append((K.vertices[u], K.vertices[v], int(c)))
            return PLCurrent(tuple(segs))
        if self.dim == 2:
            polys = [(tuple(K.vertices[i] for i in K.triangles[t]), int(c))
                     for t, c in sorted(self.coeffs.items())]
            return PLRegion(tuple(polys), check=False)
        return {K.vertices[i]: int(c) for i, c in self.coeffs.items()}


def apply_boundary(chain: Chain) -> Chain:
    K = chain.complex
    if chain.dim == 0:
        raise ValueError("0-chains have no boundary")
    out = defaultdict(int)
    if chain.dim == 2:
        for t, c in chain.coeffs.items():
            for e, s in K.triangle_edges(t):
                out[e] += s * c
    else:
        for e, c in chain.coeffs.items():
            u, v = K.edges[e]
            out[u] -= c
            out[v] += c
    return Chain(K, chain.dim - 1, out)


def chain_mass(chain: Chain) -> float:
    K = chain.complex
    if chain.dim == 0:
        return math.fsum(abs(float(c)) for c in chain.coeffs.values())
    if chain.dim == 1:
        return math.fsum(abs(float(c)) * K.edge_length(e) for e, c in chain.coeffs.items())
    return math.fsum(abs(float(c)) * float(K.triangle_area(t)) for t, c in chain.coeffs.items())


def chain_from_current(K: Complex2, current: PLCurrent) -> Chain:
    """Express a PL current lying on edges of K (as unions of whole edges)."""
    out = defaultdict(int)
    nbrs = K.vertex_neighbors()
    from .geom import on_segment
    for p, q, m in current.normalized().segments:
        u = K.find_vertex(p)
        target = K.find_vertex(q)
        if u is None or target is None:
            raise ValueError(f"segment endpoint {p} or {q} is not a vertex of the complex")
        guard = 0
        while u != target:
            step = None
            for w, e, s in nbrs[u]:
                W = K.vertices[w]
                if on_segment(W, p, q) and dist2(W, q) < dist2(K.vertices[u], q):
                    step = (w, e, s)
                    break
            if step is None:
                raise ValueError(f"segment {p}->{q} is not a union of complex edges")
            w, e, s = step
            out[e] += s * m
            u = w
            guard += 1
            if guard > K.n_edges:
                raise ValueError("edge walk did not terminate")
    return Chain(K, 1, out)


# -- regularity ------------------------------------------------------------

@dataclass
class RegularityReport:
    diameter: np.ndarray
    inradius: np.ndarray
    perimeter: np.ndarray
    ball_area: np.ndarray
    theta_sigma: np.ndarray
    theta_K: float
    min_angle: float  # degrees
    min_angles: np.ndarray = field(repr=False)  # per-triangle, degrees


def _triangle_metrics(xy: np.ndarray):
    a = np.linalg.norm(xy[:, 1] - xy[:, 2], axis=1)
    b = np.linalg.norm(xy[:, 2] - xy[:, 0], axis=1)
    c = np.linalg.norm(xy[:, 0] - xy[:, 1], axis=1)
    return a, b, c


def regularity(K: Complex2, triangle_ids=None) -> RegularityReport:
    ids = range(K.n_triangles) if triangle_ids is None else sorted(triangle_ids)
    ids = list(ids)
    if not ids:
        raise ValueError("regularity of an empty complex is undefined")
    cache = getattr(K, "_regularity_cache", None)
    if triangle_ids is None and cache is not None:
        return cache
    xy = K._vxy[np.array([K.triangles[t] for t in ids])]
    e1, e2 = xy[:, 1] - xy[:, 0], xy[:, 2] - xy[:, 0]
    areas = (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) / 2
    # exact area where the float value is not clearly resolved
    shaky = np.nonzero(areas <= 1e-9 * np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1))[0]
    for i in shaky:
        a_, b_, c_ = (K.vertices[v] for v in K.triangles[ids[i]])
        areas[i] = float(orient(a_, b_, c_) / 2)
    if np.any(areas <= 0):
        bad = [t for t, a in zip(ids, areas) if a <= 0]
        raise ComplexError("degenerate triangle", bad)
    a, b, c = _triangle_metrics(xy)
    perim = a + b + c
    diam = np.maximum(np.maximum(a, b), c)
    inr = 2 * areas / perim
    ball = math.pi * (inr / 2) ** 2
    theta = diam * perim / ball + 2 * diam / inr
    theta_K = float(np.max(diam * perim / ball) + 2 * np.max(diam / inr))
    angs = np.degrees(np.stack([
        np.arccos(np.clip((b ** 2 + c ** 2 - a ** 2) / (2 * b * c), -1, 1)),
        np.arccos(np.clip((a ** 2 + c ** 2 - b ** 2) / (2 * a * c), -1, 1)),
        np.arccos(np.clip((a ** 2 + b ** 2 - c ** 2) / (2 * a * b), -1, 1)),
    ], axis=1))
    mins = angs.min(axis=1)
    rep = RegularityReport(diam, inr, perim, ball, theta, theta_K, float(mins.min()), mins)
    if triangle_ids is None:
        K._regularity_cache = rep
    return rep


def angle_regularity_bound(theta, degrees: bool = True) -> float:
    """Upper bound on the regularity constant of any triangle with all angles >= theta."""
    th = math.radians(theta) if degrees else float(theta)
    if not 0 < th <= math.pi / 3 + 1e-15:
        raise ValueError("angle must lie in (0, 60 degrees]")
    ct = 1 / math.tan(th / 2)
    return 48 / math.pi * ct * ct + 4 * ct


BETA = 4 * (2 + math.sqrt(3)) * (24 + 12 * math.sqrt(3) + math.pi) / math.pi


def angle_below(K: Complex2, t: int, cos2_threshold: Fraction) -> bool:
    """Exact test: some angle of triangle t is smaller than the angle whose
    squared cosine is ``cos2_threshold`` (threshold below 90 degrees)."""
    V = K.vertices
    a, b, c = K.triangles[t]
    for p, q, r in ((a, b, c), (b, c, a), (c, a, b)):
        ux, uy = V[q][0] - V[p][0], V[q][1] - V[p][1]
        vx, vy = V[r][0] - V[p][0], V[r][1] - V[p][1]
        dot = ux * vx + uy * vy
        if dot > 0 and dot * dot > cos2_threshold * (ux * ux + uy * uy) * (vx * vx + vy * vy):
            return True
    return False


def cos2_of(angle_deg: float) -> Fraction:
    return Fraction(math.cos(math.radians(angle_deg)) ** 2)


# -- tube audit ------------------------------------------------------------

def _seg_dist(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / np.where(L2 > 0, L2, 1), 0, 1)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def triangles_in_tube(K: Complex2, skeleton: PLCurrent, radius: float, samples: int = 8) -> np.ndarray:
    """Boolean per triangle: lies within ``radius`` of the skeleton.

    A triangle counts as inside when all three vertices are within the radius
    of a single skeleton segment (the capsule is convex), or when a barycentric
    sample grid of the triangle lies within the radius of the skeleton.
    """
    segs = np.array([[float(p[0]), float(p[1]), float(q[0]), float(q[1])]
                     for p, q, _ in skeleton.segments]).reshape(-1, 4)
    out = np.zeros(K.n_triangles, dtype=bool)
    if len(segs) == 0:
        return out
    smin = np.minimum(segs[:, :2], segs[:, 2:])
    smax = np.maximum(segs[:, :2], segs[:, 2:])
    bary = np.array([(i / samples, j / samples) for i in range(samples + 1)
                     for j in range(samples + 1 - i)])
    for t, tri in enumerate(K.triangles):
        xy = K._vxy[list(tri)]
        lo = xy.min(axis=0) - radius
        hi = xy.max(axis=0) + radius
        cand = np.nonzero(np.all(smax >= lo, axis=1) & np.all(smin <= hi, axis=1))[0]
        if len(cand) == 0:
            continue
        cs = segs[cand]
        d = _seg_dist(xy[:, 0][:, None], xy[:, 1][:, None], cs[:, 0], cs[:, 1], cs[:, 2], cs[:, 3])
        if np.any(np.all(d < radius, axis=0)):
            out[t] = True
            continue
        if not np.all(d.min(axis=1) < radius):
            continue
        pts = xy[0] + bary[:, :1] * (xy[1] - xy[0]) + bary[:, 1:] * (xy[2] - xy[0])
        d = _seg_dist(pts[:, 0][:, None], pts[:, 1][:, None], cs[:, 0], cs[:, 1], cs[:, 2], cs[:, 3])
        out[t] = bool(np.all(d.min(axis=1) < radius))
    return out


@dataclass
class AngleAudit:
    small_angles: list  # (triangle, min angle in degrees, inside tube)
    inside: np.ndarray
    complement: list  # triangle ids of the subcomplex outside the tube
    theta_complement: float | None
    theta_all: float
    all_inside: bool


def small_angle_locations(K: Complex2, skeleton: PLCurrent, radius: float,
                          threshold_deg: float = 30.0) -> AngleAudit:
    if radius <= 0:
        raise ValueError("radius must be positive")
    rep = regularity(K)
    inside = triangles_in_tube(K, skeleton, radius)
    c2 = cos2_of(threshold_deg)
    small = []
    for t in range(K.n_triangles):
        if rep.min_angles[t] < threshold_deg + 1e-6 and angle_below(K, t, c2):
            small.append((t, float(rep.min_angles[t]), bool(inside[t])))
    comp = [t for t in range(K.n_triangles) if not inside[t]]
    theta_c = regularity(K, comp).theta_K if comp else None
    return AngleAudit(small, inside, comp, theta_c, rep.theta_K, all(s[2] for s in small))


# -- total unimodularity -----------------------------------------------------

def _det(rows) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    m = [list(r) for r in rows]
    n = len(m)
    sgn = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sgn = -sgn
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sgn * m[n - 1][n - 1]


@dataclass
class TUVerdict:
    unimodular: bool
    max_order: int
    checked: int
    violation: tuple | None = None  # (row ids, column ids, determinant)

    def __bool__(self):
        return self.unimodular


def tu_verify(matrix, max_order: int = 6, max_checks: int | None = None) -> TUVerdict:
    """Brute-force check that every square submatrix up to ``max_order`` has
    determinant in {-1, 0, 1}."""
    if max_order < 1:
        raise ValueError("max_order must be >= 1")
    if isinstance(matrix, BoundaryMatrix):
        A = matrix.dense()
    elif sp.issparse(matrix):
        A = matrix.toarray()
    else:
        A = np.asarray(matrix)
    A = [[int(v) for v in row] for row in A.tolist()]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    checked = 0
    for i in range(nr):
        for j in range(nc):
            checked += 1
            if A[i][j] not in (-1, 0, 1):
                return TUVerdict(False, max_order, checked, ((i,), (j,), A[i][j]))
    for k in range(2, min(max_order, nr, nc) + 1):
        for cols in itertools.combinations(range(nc), k):
            # rows with support in these columns; others give a zero row
            live = [i for i in range(nr) if any(A[i][j] for j in cols)]
            for rows in itertools.combinations(live, k):
                sub = [[A[i][j] for j in cols] for i in rows]
                if any(not any(col) for col in zip(*sub)):
                    continue
                checked += 1
                d = _det(sub)
                if d not in (-1, 0, 1):
                    return TUVerdict(False, max_order, checked, (rows, cols, d))
                if max_checks is not None and checked >= max_checks:
                    return TUVerdict(True, k, checked)
    return TUVerdict(True, max_order, checked)
