"""Conforming Delaunay refinement with exact predicates.

The triangulation is an unconstrained Delaunay triangulation (Bowyer-Watson
insertion inside a far bounding triangle). Input segments are enforced by
splitting every subsegment whose closed diametral disk holds another vertex;
an unencroached subsegment is strictly Delaunay and hence a mesh edge.

Quality refinement follows Ruppert's algorithm with two of Shewchuk's
additions for small input angles: subsegments with one input-vertex endpoint
are split on concentric shells (powers of two from the apex), and a skinny
triangle whose circumcenter encroaches a subsegment of a small-angle cluster
is left alone when splitting would produce an edge shorter than its own
shortest edge.

Coordinates are ``Fraction``; predicates run in floating point with a
conservative error filter and fall back to exact arithmetic.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

# relative rounding of a rational coordinate converted to float
_IN_ROUND = 2.0 ** -52

SMALL_CLUSTER_DEG = 60.0


class RefinementError(RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def _dyadic(v: Fraction, den: int) -> Fraction:
    return Fraction(round(v * den), den)


@dataclass
class MeshResult:
    vertices: list  # exact points
    triangles: list  # CCW index triples
    subsegments: dict  # (i, j) with i < j -> (parent segment id, same orientation as parent)
    input_vertex_count: int
    stats: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)  # triangles left skinny on purpose


class DelaunayRefiner:
    def __init__(self, points, segments, min_angle_deg=25.0, max_edge=None,
                 size_cap=50_000, round_bits=40, terminator=True):
        pts = [(Fraction(x), Fraction(y)) for x, y in points]
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate input points")
        self.P = []  # exact coordinates
        self.H = []  # homogeneous integer coordinates (X, Y, D), D > 0
        self.F = []  # float coordinates
        self.is_input = []
        self.min_angle = math.radians(min_angle_deg)
        self.max_edge2 = None if max_edge is None else float(max_edge) ** 2
        self.size_cap = size_cap
        self.terminator = terminator
        xs = [float(p[0]) for p in pts] or [0.0]
        ys = [float(p[1]) for p in pts] or [0.0]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1e-12)
        self.round_den = 2 ** max(0, round_bits - math.floor(math.log2(span)))
        # bounding triangle far outside
        cx, cy = (max(xs) + min(xs)) / 2, (max(ys) + min(ys)) / 2
        R = 2 ** math.ceil(math.log2(span * 64))
        cxr, cyr = Fraction(round(cx)), Fraction(round(cy))
        for p in ((cxr - 3 * R, cyr - 3 * R), (cxr + 3 * R, cyr - 3 * R), (cxr, cyr + 3 * R)):
            self._add_point(p, False)
        self.tv = [[0, 1, 2]]
        self.tn = [[-1, -1, -1]]
        self.alive = [True]
        self.vt = [0, 0, 0]
        self.last = 0
        self.n_super = 3
        self.seg = {}
        self.input_dirs = {}  # input vertex -> list of (angle, parent)
        self.skip = set()
        self.on_seg = {}  # split vertex -> parent input segment
        self.n_inserted = 0
        order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
        ids = {}
        for i in order:
            ids[i] = self._insert(pts[i], input_vertex=True)
        self.input_map = [ids[i] for i in range(len(pts))]
        for k, (a, b) in enumerate(segments):
            ia, ib = self.input_map[a], self.input_map[b]
            if ia == ib:
                raise ValueError(f"segment {k} has coincident endpoints")
            key = (min(ia, ib), max(ia, ib))
            if key in self.seg:
                raise ValueError(f"duplicate segment {k}")
            self.seg[key] = (k, ia < ib)
            for v, w in ((ia, ib), (ib, ia)):
                ang = math.atan2(self.F[w][1] - self.F[v][1], self.F[w][0] - self.F[v][0])
                self.input_dirs.setdefault(v, []).append((ang, k))
        self.cluster_angle = {}
        for v, dirs in self.input_dirs.items():
            dirs.sort()
            n = len(dirs)
            for i, (ang, k) in enumerate(dirs):
                if n == 1:
                    self.cluster_angle[(v, k)] = 2 * math.pi
                    continue
                prev = dirs[i - 1][0]
                nxt = dirs[(i + 1) % n][0]
                d1 = (ang - prev) % (2 * math.pi)
                d2 = (nxt - ang) % (2 * math.pi)
                self.cluster_angle[(v, k)] = min(d1, d2)
        self.parent_apex = {}  # parent segment -> its two input endpoints
        for k, (a, b) in enumerate(segments):
            self.parent_apex[k] = (self.input_map[a], self.input_map[b])

    # -- predicates ------------------------------------------------------------

    def _add_point(self, p, input_vertex):
        self.P.append(p)
        self.F.append((float(p[0]), float(p[1])))
        x, y = p
        d = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
        self.H.append((x.numerator * (d // x.denominator), y.numerator * (d // y.denominator), d))
        self.is_input.append(input_vertex)
        return len(self.P) - 1

    def orient(self, a, b, c) -> int:
        F = self.F
        ax, ay = F[a]
        bx, by = F[b]
        cx, cy = F[c]
        l = (bx - ax) * (cy - ay)
        r = (by - ay) * (cx - ax)
        det = l - r
        # float coordinates are rounded rationals: add the input rounding term
        M = max(abs(ax), abs(ay), abs(bx), abs(by), abs(cx), abs(cy))
        D = max(abs(bx - ax), abs(by - ay), abs(cx - ax), abs(cy - ay))
        err = 1e-12 * (abs(l) + abs(r)) + _IN_ROUND * 8 * M * D
        if det > err:
            return 1
        if det < -err:
            return -1
        (X1, Y1, D1), (X2, Y2, D2), (X3, Y3, D3) = self.H[a], self.H[b], self.H[c]
        d = X1 * (Y2 * D3 - Y3 * D2) - Y1 * (X2 * D3 - X3 * D2) + D1 * (X2 * Y3 - X3 * Y2)
        return (d > 0) - (d < 0)

    def incircle(self, a, b, c, d) -> int:
        """> 0 when d is strictly inside the circle through CCW a, b, c."""
        F = self.F
        dx, dy = F[d]
        adx, ady = F[a][0] - dx, F[a][1] - dy
        bdx, bdy = F[b][0] - dx, F[b][1] - dy
        cdx, cdy = F[c][0] - dx, F[c][1] - dy
        al = adx * adx + ady * ady
        bl = bdx * bdx + bdy * bdy
        cl = cdx * cdx + cdy * cdy
        t1 = bdx * cdy - bdy * cdx
        t2 = cdx * ady - cdy * adx
        t3 = adx * bdy - ady * bdx
        det = al * t1 + bl * t2 + cl * t3
        perm = al * abs(t1) + bl * abs(t2) + cl * abs(t3)
        M = max(abs(F[v][k]) for v in (a, b, c, d) for k in (0, 1))
        D = max(abs(adx), abs(ady), abs(bdx), abs(bdy), abs(cdx), abs(cdy))
        err = 1e-11 * perm + _IN_ROUND * 256 * M * D ** 3
        if det > err:
            return 1
        if det < -err:
            return -1
        # exact: translate to d on the common denominator of the four points
        H = self.H
        Xd, Yd, Dd = H[d]
        rows = []
        for v in (a, b, c):
            X, Y, D = H[v]
            # (x - xd) = (X*Dd - Xd*D) / (D*Dd); the positive factor D*Dd is dropped per row
            # after scaling the lifted term consistently
            u, w, s = X * Dd - Xd * D, Y * Dd - Yd * D, D * Dd
            rows.append((u * s, w * s, u * u + w * w))
        (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = rows
        det = a3 * (b1 * c2 - b2 * c1) + b3 * (c1 * a2 - c2 * a1) + c3 * (a1 * b2 - a2 * b1)
        return (det > 0) - (det < 0)

    def in_diametral(self, a, b, p) -> bool:
        """p lies in the closed disk with diameter ab."""
        F = self.F
        v = (F[a][0] - F[p][0]) * (F[b][0] - F[p][0]) + (F[a][1] - F[p][1]) * (F[b][1] - F[p][1])
        scale = (abs(F[a][0] - F[p][0]) + abs(F[a][1] - F[p][1])) * \
            (abs(F[b][0] - F[p][0]) + abs(F[b][1] - F[p][1]))
        M = max(abs(F[v][k]) for v in (a, b, p) for k in (0, 1))
        D = max(abs(F[a][0] - F[p][0]), abs(F[a][1] - F[p][1]), abs(F[b][0] - F[p][0]), abs(F[b][1] - F[p][1]))
        tol = 1e-12 * scale + _IN_ROUND * 16 * M * D
        if v < -tol:
            return True
        if v > tol:
            return False
        (Xa, Ya, Da), (Xb, Yb, Db), (Xp, Yp, Dp) = self.H[a], self.H[b], self.H[p]
        v = (Xa * Dp - Xp * Da) * (Xb * Dp - Xp * Db) + (Ya * Dp - Yp * Da) * (Yb * Dp - Yp * Db)
        return v <= 0

    # -- triangulation ---------------------------------------------------------

    def _locate(self, p, start=None):
        """Triangle containing vertex index p (closed), by a visibility walk."""
        t = start if start is not None and self.alive[start] else self.last
        if not self.alive[t]:
            t = next(i for i in range(len(self.alive) - 1, -1, -1) if self.alive[i])
        steps = 0
        limit = 4 * len(self.tv) + 100
        rot = 0
        while True:
            tv = self.tv[t]
            moved = False
            for k in range(3):
                i = (k + rot) % 3
                a, b = tv[(i + 1) % 3], tv[(i + 2) % 3]
                if self.orient(a, b, p) < 0:
                    t = self.tn[t][i]
                    moved = True
                    break
            if not moved:
                return t
            rot = (rot + 1) % 3
            steps += 1
            if t < 0 or steps > limit:
                raise RefinementError("point location failed (outside the bounding triangle?)")

    def _cavity(self, p, t0):
        cav = [t0]
        seen = {t0}
        stack = [t0]
        while stack:
            t = stack.pop()
            for n in self.tn[t]:
                if n < 0 or n in seen:
                    continue
                a, b, c = self.tv[n]
                if self.incircle(a, b, c, p) > 0:
                    seen.add(n)
                    cav.append(n)
                    stack.append(n)
        return cav, seen

    def _insert_at(self, p_idx, t0):
        cav, cset = self._cavity(p_idx, t0)
        boundary = []  # (u, v, outside triangle)
        destroyed_edges = set()
        for t in cav:
            tv = self.tv[t]
            for i in range(3):
                u, v = tv[(i + 1) % 3], tv[(i + 2) % 3]
                n = self.tn[t][i]
                if n >= 0 and n in cset:
                    destroyed_edges.add((min(u, v), max(u, v)))
                else:
                    boundary.append((u, v, n))
        for t in cav:
            self.alive[t] = False
        new = []
        by_start = {}
        by_end = {}
        for u, v, n in boundary:
            t = len(self.tv)
            self.tv.append([u, v, p_idx])
            self.tn.append([-1, -1, n])  # opposite u, opposite v, opposite p
            self.alive.append(True)
            if n >= 0:
                nt = self.tn[n]
                nv = self.tv[n]
                for j in range(3):
                    if {nv[(j + 1) % 3], nv[(j + 2) % 3]} == {u, v}:
                        nt[j] = t
                        break
            by_start[u] = t
            by_end[v] = t
            new.append(t)
        for t in new:
            u, v, _ = self.tv[t]
            # edge (v, p) is opposite u: neighbour is the triangle starting at v
            self.tn[t][0] = by_start[v]
            # edge (p, u) is opposite v: neighbour is the triangle ending at u
            self.tn[t][1] = by_end[u]
            self.vt[u] = t
            self.vt[v] = t
        self.vt.append(new[0]) if len(self.vt) == p_idx else None
        self.vt[p_idx] = new[0]
        self.last = new[0]
        self.n_inserted += 1
        return new, destroyed_edges

    def _insert(self, p, input_vertex=False, hint=None):
        idx = self._add_point(p, input_vertex)
        self.vt.append(-1)
        t0 = self._locate(idx, hint)
        a, b, c = self.tv[t0]
        if p in (self.P[a], self.P[b], self.P[c]):
            raise RefinementError("duplicate vertex insertion")
        new, destroyed = self._insert_at(idx, t0)
        self._last_new = new
        self._last_destroyed = destroyed
        return idx

    def triangles_around(self, v):
        t0 = self.vt[v]
        out = []
        t = t0
        for _ in range(10 ** 6):
            out.append(t)
            tv = self.tv[t]
            i = tv.index(v)
            # rotate CCW around v: next triangle shares edge (v, tv[i+1])... across edge opposite tv[i+2]
            t = self.tn[t][(i + 2) % 3]
            if t < 0 or t == t0:
                break
        return out

    def edge_triangles(self, a, b):
        out = []
        for t in self.triangles_around(a):
            if b in self.tv[t]:
                out.append(t)
        return out

    # -- refinement ------------------------------------------------------------

    def _real(self, t):
        return all(v >= self.n_super for v in self.tv[t])

    def _quality(self, t):
        """(min angle in radians, max squared edge length, shortest edge)."""
        F = self.F
        a, b, c = self.tv[t]
        (ax, ay), (bx, by), (cx, cy) = F[a], F[b], F[c]
        la = (bx - cx) ** 2 + (by - cy) ** 2
        lb = (ax - cx) ** 2 + (ay - cy) ** 2
        lc = (ax - bx) ** 2 + (ay - by) ** 2
        area2 = abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))
        ls = sorted((la, lb, lc))
        # smallest angle is opposite the shortest edge: sin = area2 / (product of the other two)
        s = area2 / math.sqrt(ls[1] * ls[2]) if ls[1] * ls[2] > 0 else 0.0
        ang = math.asin(min(1.0, s))
        return ang, ls[2], math.sqrt(ls[0])

    def _is_bad(self, t):
        if not self.alive[t] or not self._real(t):
            return False
        key = tuple(sorted(self.tv[t]))
        if key in self.skip:
            return False
        ang, lmax2, _ = self._quality(t)
        if self.max_edge2 is not None and lmax2 > self.max_edge2 * (1 + 1e-12):
            return True
        return ang < self.min_angle - 1e-12 and not self._sheltered(t)

    def _sheltered(self, t) -> bool:
        """Skinny triangles that refinement cannot improve: the small angle is
        itself an input angle, or the short edge joins equidistant points on two
        segments of a small-angle cluster."""
        F = self.F
        tv = self.tv[t]
        lens = []
        for i in range(3):
            p, q = tv[(i + 1) % 3], tv[(i + 2) % 3]
            lens.append(math.dist(F[p], F[q]))
        i = min(range(3), key=lambda k: lens[k])
        v, p, q = tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]
        if (min(v, p), max(v, p)) in self.seg and (min(v, q), max(v, q)) in self.seg \
                and self.is_input[v]:
            return True
        sp, sq = self.on_seg.get(p), self.on_seg.get(q)
        if sp is None or sq is None or sp == sq:
            return False
        shared = set(self.parent_apex[sp]) & set(self.parent_apex[sq])
        for c in shared:
            if self.cluster_angle.get((c, sp), 7.0) >= math.radians(SMALL_CLUSTER_DEG):
                continue
            dp, dq = math.dist(F[c], F[p]), math.dist(F[c], F[q])
            if abs(dp - dq) <= 1e-6 * max(dp, dq):
                return True
        return False

    def _push_bad(self, heap, ts):
        for t in ts:
            if self._is_bad(t):
                ang, lmax2, _ = self._quality(t)
                size_only = ang >= self.min_angle - 1e-12
                heapq.heappush(heap, (size_only, ang if not size_only else -lmax2, t))

    def _encroached(self, key):
        a, b = key
        ts = self.edge_triangles(a, b)
        if len(ts) < 2:
            return True  # not (or not fully) a mesh edge
        for t in ts:
            apex = next(v for v in self.tv[t] if v != a and v != b)
            if apex >= self.n_super and self.in_diametral(a, b, apex):
                return True
        return False

    def _split_point(self, a, b):
        P = self.P
        ia, ib = self.is_input[a], self.is_input[b]
        if ia != ib:
            apex, other = (a, b) if ia else (b, a)
            L = math.dist(self.F[apex], self.F[other])
            d = 2.0 ** round(math.log2(L / 2))
            t = Fraction(round(d / L * 2 ** 20), 2 ** 20)
            if not Fraction(1, 4) <= t <= Fraction(3, 4):
                t = Fraction(1, 2)
            pa, po = P[apex], P[other]
            return (pa[0] + t * (po[0] - pa[0]), pa[1] + t * (po[1] - pa[1])), apex, t * Fraction(L)
        pa, pb = P[a], P[b]
        return ((pa[0] + pb[0]) / 2, (pa[1] + pb[1]) / 2), None, None

    def _split_segment(self, key, enc_queue, heap):
        a, b = key
        parent, fwd = self.seg.pop(key)
        m_pt, _, _ = self._split_point(a, b)
        ts = self.edge_triangles(a, b)
        hint = ts[0] if ts else self.vt[a]
        m = self._insert(m_pt, input_vertex=False, hint=hint)
        self.on_seg[m] = parent
        # orientation flags relative to the parent: fwd means low->high index is parent direction
        if fwd:
            first, second = (a, m), (m, b)
        else:
            first, second = (b, m), (m, a)
        for u, v in ((a, m), (m, b)):
            k2 = (min(u, v), max(u, v))
            # parent direction from the original orientation a->b when fwd
            along = (u, v) if fwd else (v, u)
            self.seg[k2] = (parent, along[0] < along[1])
            # a half need not be a mesh edge yet when another vertex encroaches it
            enc_queue.append(k2)
        self._after_insert(m, enc_queue, heap)
        return m

    def _after_insert(self, p, enc_queue, heap):
        new = self._last_new
        for u, v in self._last_destroyed:
            if (u, v) in self.seg:
                enc_queue.append((u, v))
        for t in new:
            a, b, _ = self.tv[t]
            k = (min(a, b), max(a, b))
            if k in self.seg and self.in_diametral(a, b, p):
                enc_queue.append(k)
        for k in ((min(p, x), max(p, x)) for t in new for x in self.tv[t][:2]):
            if k in self.seg:
                enc_queue.append(k)
        self._push_bad(heap, new)
        if self.n_real_triangles_estimate() > self.size_cap:
            raise RefinementError("size cap exceeded", self.diagnostics())

    def n_real_triangles_estimate(self):
        # every insertion adds two triangles to the triangulation
        return 2 * (len(self.P) - self.n_super)

    def _drain(self, enc_queue, heap):
        while enc_queue:
            key = enc_queue.popleft()
            if key in self.seg and self._encroached(key):
                self._split_segment(key, enc_queue, heap)

    def _circumcenter(self, t):
        P = self.P
        a, b, c = self.tv[t]
        (ax, ay), (bx, by), (cx, cy) = P[a], P[b], P[c]
        bx, by, cx, cy = bx - ax, by - ay, cx - ax, cy - ay
        d = 2 * (bx * cy - by * cx)
        b2, c2 = bx * bx + by * by, cx * cx + cy * cy
        ux = (cy * b2 - by * c2) / d
        uy = (bx * c2 - cx * b2) / d
        return (_dyadic(ax + ux, self.round_den), _dyadic(ay + uy, self.round_den))

    def _encroached_by_point(self, p_idx, t0):
        """Subsegments whose closed diametral disk holds p, among cavity edges."""
        cav, _ = self._cavity(p_idx, t0)
        out = []
        seen = set()
        for t in cav:
            tv = self.tv[t]
            for i in range(3):
                u, v = tv[(i + 1) % 3], tv[(i + 2) % 3]
                k = (min(u, v), max(u, v))
                if k in self.seg and k not in seen:
                    seen.add(k)
                    if self.in_diametral(u, v, p_idx):
                        out.append(k)
        return out, cav

    def refine(self):
        enc_queue = deque(sorted(self.seg))
        heap = []
        self._drain(enc_queue, heap)
        self._push_bad(heap, [t for t in range(len(self.tv)) if self.alive[t]])
        while heap:
            size_only, _, t = heapq.heappop(heap)
            if not self._is_bad(t):
                continue
            ang, _, shortest = self._quality(t)
            c = self._circumcenter(t)
            # temporarily register c to run the predicates
            idx = self._add_point(c, False)
            self.vt.append(-1)
            try:
                t0 = self._locate(idx, t)
            except RefinementError:
                t0 = None
            if t0 is None:
                self._pop_point()
                self.skip.add(tuple(sorted(self.tv[t])))
                continue
            tv0 = self.tv[t0]
            duplicate = c in (self.P[tv0[0]], self.P[tv0[1]], self.P[tv0[2]])
            enc, _ = self._encroached_by_point(idx, t0) if not duplicate else ([], None)
            outside = not self._real(t0)
            if duplicate or (outside and not enc):
                self._pop_point()
                self.skip.add(tuple(sorted(self.tv[t])))
                continue
            if enc:
                self._pop_point()
                if self.terminator and not size_only and self._reject(enc, shortest):
                    self.skip.add(tuple(sorted(self.tv[t])))
                    continue
                eq = deque()
                for key in enc:
                    if key in self.seg:
                        self._split_segment(key, eq, heap)
                self._drain(eq, heap)
                if self.alive[t]:
                    self._push_bad(heap, [t])
                continue
            new, destroyed = self._insert_at(idx, t0)
            self._last_new, self._last_destroyed = new, destroyed
            eq = deque()
            self._after_insert(idx, eq, heap)
            self._drain(eq, heap)
        return self.result()

    def _pop_point(self):
        self.H.pop()
        self.P.pop()
        self.F.pop()
        self.is_input.pop()
        self.vt.pop()

    def _reject(self, enc, shortest) -> bool:
        """Terminator rule: leave the triangle if a small-angle cluster subsegment
        would be split into pieces shorter than the triangle's shortest edge."""
        for a, b in enc:
            parent, _ = self.seg[(a, b)]
            for apex in (a, b):
                if not self.is_input[apex]:
                    continue
                if self.cluster_angle.get((apex, parent), 2 * math.pi) >= math.radians(SMALL_CLUSTER_DEG):
                    continue
                _, sp_apex, d = self._split_point(a, b)
                piece = float(d) if d is not None else math.dist(self.F[a], self.F[b]) / 2
                if piece < shortest:
                    return True
        return False

    def diagnostics(self):
        return {"vertices": len(self.P) - self.n_super, "insertions": self.n_inserted,
                "subsegments": len(self.seg), "skipped": len(self.skip)}

    def result(self) -> MeshResult:
        keep = [t for t in range(len(self.tv)) if self.alive[t] and self._real(t)]
        used = sorted({v for t in keep for v in self.tv[t]})
        # input vertices first, in input order, then the rest by creation
        order = list(self.input_map) + [v for v in used if v not in set(self.input_map)]
        remap = {v: i for i, v in enumerate(order)}
        verts = [self.P[v] for v in order]
        tris = [tuple(remap[v] for v in self.tv[t]) for t in keep]
        subs = {}
        for (a, b), (parent, fwd) in self.seg.items():
            ra, rb = remap[a], remap[b]
            lo, hi = min(ra, rb), max(ra, rb)
            # fwd: parent runs from the lower old index to the higher one
            runs_a_to_b = fwd  # a < b in old indices
            subs[(lo, hi)] = (parent, (ra < rb) == runs_a_to_b)
        skipped = [tuple(remap[v] for v in key) for key in self.skip
                   if all(v in remap for v in key)]
        stats = self.diagnostics()
        stats["triangles"] = len(tris)
        return MeshResult(verts, tris, subs, len(self.input_map), stats, skipped)


def delaunay_refine(points, segments, min_angle_deg=25.0, max_edge=None, size_cap=50_000,
                    terminator=True) -> MeshResult:
    r = DelaunayRefiner(points, segments, min_angle_deg, max_edge, size_cap, terminator=terminator)
    return r.refine()
