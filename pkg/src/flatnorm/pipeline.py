"""End-to-end experiments: embedding, the strip and n-gon examples, convergence, spanning."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .approx import CurveSpec, approximate_curve, circle, inscribed_polygon
from .complex import BETA, Chain, Complex2, angle_regularity_bound, regularity
from .deform import deform_currents, region_density
from .flatlp import find_threshold, flat_norm_decompose
from .geom import GeometryError, PLCurrent, PLRegion, as_rational, dyadic
from .io import atomic_write, write_json
from .triangulate import LocalizeReport, Mesh, localize, node_segments, PSLG

CSV_COLUMNS = ["delta", "mass_P", "value", "gap", "integral", "triangles", "min_angle", "theta_K", "seconds"]


# -- embedding -------------------------------------------------------------------

@dataclass
class Embedding:
    complex: Complex2
    chains: list
    mesh: Mesh
    report: LocalizeReport
    complement: list


def _box(lo, hi):
    (x0, y0), (x1, y1) = lo, hi
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    return [(pts[i], pts[(i + 1) % 4], {}) for i in range(4)]


def embed(inputs, eps=None, target_angle: float = 30.0, max_edge=None, size_cap: int = 50_000,
          margin=0) -> Embedding:
    """Mesh the inputs together and express each one exactly as a chain.

    ``inputs`` holds :class:`PLCurrent` (1-chains) and :class:`PLRegion`
    (2-chains). ``margin`` > 0 adds a bounding box that much larger on every
    side, which gives curves without area (a single segment) a 2-dimensional
    domain.
    """
    items = []
    for i, c in enumerate(inputs):
        if isinstance(c, PLCurrent):
            items += [(p, q, {i: m}) for p, q, m in c.segments]
        elif isinstance(c, PLRegion):
            for verts, _ in c.polygons:
                items += [(verts[k], verts[(k + 1) % len(verts)], {}) for k in range(len(verts))]
        else:
            raise TypeError(f"cannot embed {type(c).__name__}")
    if not items:
        raise GeometryError("nothing to embed")
    if margin:
        margin = as_rational(margin)
        xs = [p[0] for p, q, _ in items] + [q[0] for p, q, _ in items]
        ys = [p[1] for p, q, _ in items] + [q[1] for p, q, _ in items]
        items += _box((as_rational(min(xs)) - margin, as_rational(min(ys)) - margin),
                      (as_rational(max(xs)) + margin, as_rational(max(ys)) + margin))
    pslg = node_segments(items)
    mesh, comp, report = localize(pslg, eps, target_angle, size_cap, max_edge)
    K = mesh.complex
    chains = []
    for i, c in enumerate(inputs):
        if isinstance(c, PLCurrent):
            chains.append(Chain(K, 1, mesh.chain_coeffs(i)))
        else:
            coeffs = {}
            for t, tri in enumerate(K.triangles):
                a, b, d = (K.vertices[v] for v in tri)
                g = ((a[0] + b[0] + d[0]) / 3, (a[1] + b[1] + d[1]) / 3)
                m = region_density(c, g)
                if m:
                    coeffs[t] = m
            chains.append(Chain(K, 2, coeffs))
    return Embedding(K, chains, mesh, report, comp)


def embed_chains(inputs, eps=None, **kw):
    """``(K, chains)`` for the inputs; see :func:`embed`."""
    e = embed(inputs, eps, **kw)
    return e.complex, e.chains


# -- worked examples -------------------------------------------------------------

SQRT3 = dyadic(math.sqrt(3), 48)


def gen_strip(n: int, side=2):
    """The alternating equilateral strip from A to B.

    Each of the n diamonds is two equilateral triangles sharing a vertical
    edge; consecutive diamonds touch at a vertex on the axis. Returns
    ``(K, P, T)`` with P the top chain and T the segment A->B. The height
    sqrt(3) is rounded to 48 bits.
    """
    if n < 1 or not side > 0:
        raise ValueError("need n >= 1 and side > 0")
    s = as_rational(side)
    w, h = s * SQRT3 / 2, s / 2
    verts, tris = [(Fraction(0), Fraction(0))], []
    for k in range(n):
        x0 = 2 * k * w
        left = 3 * k
        verts += [(x0 + w, h), (x0 + w, -h), (x0 + 2 * w, Fraction(0))]
        top, bot, right = left + 1, left + 2, left + 3
        tris += [(left, bot, top), (top, bot, right)]
    K = Complex2(verts, tris)
    coeffs = {}
    for k in range(n):
        left, top, right = 3 * k, 3 * k + 1, 3 * k + 3
        for a, b in ((left, top), (top, right)):
            e = K.edge_index[(min(a, b), max(a, b))]
            coeffs[e] = 1 if a < b else -1
    P = Chain(K, 1, coeffs)
    T = PLCurrent((((Fraction(0), Fraction(0)), verts[-1], 1),))
    return K, P, T


def gen_ngon_disk(n: int, radius: float = 1.0, max_edge=None, target_angle: float = 30.0,
                  size_cap: int = 50_000):
    """Inscribed n-gon boundary chain on a quality mesh of the polygon."""
    if n < 3:
        raise ValueError("n >= 3 required")
    poly = inscribed_polygon(n, radius)
    K, (t,) = embed_chains([poly], None, target_angle=target_angle, max_edge=max_edge, size_cap=size_cap)
    return K, t


# -- convergence -----------------------------------------------------------------

@dataclass
class ConvergenceRow:
    delta: float
    mass_P: float
    value: float
    gap: float
    integral: bool
    residual_ok: bool
    triangles: int
    min_angle: float
    theta_K: float
    Delta: float
    mass_x: float
    mass_s: float
    seconds: float
    deform_fixed: bool = True  # the deformation leaves the embedded chain unchanged
    decomposition_bound: float | None = None  # M(X) + lam*M(S) of a known decomposition

    def csv_row(self) -> dict:
        return {k: getattr(self, k) for k in CSV_COLUMNS}


@dataclass
class ExperimentConfig:
    curve: CurveSpec
    deltas: list = field(default_factory=lambda: [0.1, 0.05, 0.02, 0.01])
    lam: float = 1.0
    f_ref: float | None = None
    X: CurveSpec | None = None
    S: PLRegion | None = None
    margin: float = 0.0
    target_angle: float = 30.0
    eps_deform: float = 1.0
    seed: int = 0
    workers: int = 1
    out: str | None = None
    size_cap: int = 400_000
    name: str = "run"

    def __post_init__(self):
        d = list(self.deltas)
        if not d or any(x <= 0 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")


def reference_value(curve: CurveSpec, lam: float) -> float | None:
    """Analytic flat norm where known: a segment, a full circle, or a closed convex polygon."""
    lam = float(lam)
    if curve.kind == "arc" and curve.full_circle:
        r = curve.radius
        return abs(curve.mult) * min(2 * math.pi * r, lam * math.pi * r * r)
    if curve.kind == "polyline":
        pts = curve.points
        if len(pts) == 2 and not curve.closed:
            return abs(curve.mult) * curve.polyline(0).mass()
    return None


def _row(cfg: ExperimentConfig, delta: float) -> ConvergenceRow:
    t0 = time.perf_counter()
    P, _ = approximate_curve(cfg.curve, delta)
    inputs = [P]
    if cfg.X is not None:
        inputs.append(approximate_curve(cfg.X, delta)[0])
    if cfg.S is not None:
        inputs.append(cfg.S)
    emb = embed(inputs, None, cfg.target_angle, max_edge=delta, size_cap=cfg.size_cap, margin=cfg.margin)
    K, t = emb.complex, emb.chains[0]
    # the pushed chain of an input already on K is the chain itself
    (pushed,), _, _ = deform_currents([P], [], K, cfg.eps_deform, m=2, n=3)
    res = flat_norm_decompose(t, K, as_rational(cfg.lam))
    rep = regularity(K)
    bound = None
    if cfg.X is not None or cfg.S is not None:
        mx = emb.chains[1].mass() if cfg.X is not None else 0.0
        ms = emb.chains[-1].mass() if cfg.S is not None else 0.0
        bound = mx + cfg.lam * ms
    f_ref = cfg.f_ref if cfg.f_ref is not None else reference_value(cfg.curve, cfg.lam)
    gap = abs(res.value - f_ref) if f_ref is not None else float("nan")
    return ConvergenceRow(delta, t.mass(), res.value, gap, res.integral, res.residual_ok, K.n_triangles,
                          rep.min_angle, rep.theta_K, float(rep.diameter.max()), res.mass_x, res.mass_s,
                          time.perf_counter() - t0, pushed == t, bound)


def convergence_constant() -> float:
    """C with |F_K(P) - F(T)| <= C*delta from the proof's final bound, L = 2*beta."""
    L = 2 * BETA
    return 2 + 2 * (11 * L) * (1 + 11 * L) + 3 * (1 + 11 * L)


@dataclass
class ConvergenceResult:
    config: ExperimentConfig
    rows: list
    f_ref: float | None
    verdict: dict

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, CSV_COLUMNS)
        w.writeheader()
        for r in self.rows:
            w.writerow(r.csv_row())
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"name": self.config.name, "curve": self.config.curve.to_json(), "lambda": self.config.lam,
                "f_ref": self.f_ref, "rows": [asdict(r) for r in self.rows], "verdict": self.verdict}


def _verdict(rows, f_ref, mass_T) -> dict:
    gaps = [r.gap for r in rows]
    vals = [r.value for r in rows]
    tol = 1e-9 * max(1.0, abs(f_ref or 1.0))
    v = {"integral": all(r.integral and r.residual_ok for r in rows),
         "deform_fixed": all(r.deform_fixed for r in rows),
         "Delta_cap": all(r.Delta <= r.delta * (1 + 1e-12) for r in rows),
         "bounded": all(r.mass_x <= mass_T + 1 and r.mass_s <= mass_T + 1 for r in rows),
         "C_theory": convergence_constant()}
    if f_ref is not None:
        v["gap_nonincreasing"] = all(b <= a + tol for a, b in zip(gaps, gaps[1:]))
        v["C_measured"] = max(g / r.delta for g, r in zip(gaps, rows))
        v["within_C_theory"] = all(g <= v["C_theory"] * r.delta for g, r in zip(gaps, rows))
        v["final_relative_gap"] = gaps[-1] / abs(f_ref) if f_ref else gaps[-1]
        v["final_gap_below_5pct"] = v["final_relative_gap"] < 0.05
    diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    v["cauchy"] = all(b <= a + tol for a, b in zip(diffs, diffs[1:]))
    v["ok"] = all(v[k] for k in ("integral", "deform_fixed", "Delta_cap", "bounded")) and \
        (f_ref is None or (v["gap_nonincreasing"] and v["within_C_theory"] and v["final_gap_below_5pct"]))
    return v


def converge_experiment(cfg: ExperimentConfig) -> ConvergenceResult:
    """One row per delta; rows run in parallel when ``workers`` > 1.

    Completed rows are persisted even if a later one fails.
    """
    f_ref = cfg.f_ref if cfg.f_ref is not None else reference_value(cfg.curve, cfg.lam)
    rows = []
    out = Path(cfg.out) if cfg.out else None
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as ex:
                futs = [ex.submit(_row, cfg, d) for d in cfg.deltas]
                for f in futs:
                    rows.append(f.result())
        else:
            for d in cfg.deltas:
                rows.append(_row(cfg, d))
    finally:
        if out is not None and rows:
            partial = ConvergenceResult(cfg, rows, f_ref, {})
            atomic_write(out / f"{cfg.name}.csv", partial.csv())
    result = ConvergenceResult(cfg, rows, f_ref, _verdict(rows, f_ref, cfg.curve.mass()))
    if out is not None:
        write_json(result.to_json(), out / f"{cfg.name}.json")
    return result


def unit_segment() -> CurveSpec:
    return CurveSpec("polyline", [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))])


def ngon_curve(n: int = 512, radius: float = 1.0) -> CurveSpec:
    """The inscribed n-gon as a closed polyline curve."""
    pts = [p for p, _, _ in inscribed_polygon(n, radius).segments]
    return CurveSpec("polyline", pts, closed=True)


def default_configs(deltas=None, lam: float = 1.0, workers: int = 1, out=None):
    """The two standard convergence runs: the unit segment and the 512-gon."""
    kw = {"lam": lam, "workers": workers, "out": out}
    if deltas is not None:
        kw["deltas"] = list(deltas)
    seg = ExperimentConfig(unit_segment(), margin=Fraction(1, 4), name="segment", **kw)
    gon = ExperimentConfig(ngon_curve(512), f_ref=reference_value(circle(), lam), name="ngon512", **kw)
    return [seg, gon]


# -- spanning and scale ------------------------------------------------------------

@dataclass
class SpanningRow:
    lam: float
    value: float
    mass_x: float
    mass_s: float
    x_zero: bool
    x_is_t: bool


def spanning_experiment(t: Chain, K: Complex2, lams, threshold_range=None) -> dict:
    """Optimal x-mass per scale; checks that small scales span (x = 0) and large ones keep t."""
    rows = []
    for lam in sorted(as_rational(l) for l in lams):
        r = flat_norm_decompose(t, K, lam)
        rows.append(SpanningRow(float(lam), r.value, r.mass_x, r.mass_s, r.x.is_zero(), r.x == t))
    thr = None
    if threshold_range is not None:
        thr = find_threshold(t, K, *threshold_range)
    # lam_0: every tested scale below it spans
    zero_prefix = 0
    while zero_prefix < len(rows) and rows[zero_prefix].x_zero:
        zero_prefix += 1
    verdict = {"spans_below": zero_prefix > 0 and all(not r.x_zero for r in rows[zero_prefix:]) or
               zero_prefix == len(rows),
               "keeps_t_at_top": bool(rows) and rows[-1].x_is_t,
               "lam0": rows[zero_prefix].lam if 0 < zero_prefix < len(rows) else None,
               "threshold": float(thr) if thr is not None else None,
               "threshold_exact": str(thr) if thr is not None else None}
    return {"rows": [asdict(r) for r in rows], "verdict": verdict}


def unit_square_boundary(max_edge=None):
    """Unit-square boundary chain on a mesh of the square."""
    sq = PLCurrent.from_polyline([(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)
    return embed_chains([sq], None, target_angle=30.0, max_edge=max_edge)


def dilation_check(t: Chain, K: Complex2, lam) -> tuple:
    """``(F_lam(t), F_1(dilate(t, lam)) / lam)`` on K and on K scaled by lam."""
    lam = as_rational(lam)
    a = flat_norm_decompose(t, K, lam).value
    Ks = K.scaled(lam)
    ts = Chain(Ks, t.dim, dict(t.coeffs))
    b = flat_norm_decompose(ts, Ks, 1).value / float(lam)
    return a, b


def save_rows_csv(rows, path, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, columns, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    atomic_write(path, buf.getvalue())


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, default=float)
