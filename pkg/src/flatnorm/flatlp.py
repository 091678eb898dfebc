"""The simplicial flat norm with scale as an L1 linear program.

For an integral k-chain t on K (k = 1 or 0) the program is

    minimize  sum_e w_e (x+_e + x-_e) + lam * sum_f a_f (s+_f + s-_f)
    subject to  x+ - x- + D (s+ - s-) = t,   all variables >= 0,

with D the (k+1)-boundary matrix, w the k-simplex volumes and a the
(k+1)-simplex volumes. D is totally unimodular on a planar complex, so every
basic optimum is integral; the exact simplex returns one and the result
records that certificate.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .complex import Chain, Complex2, apply_boundary, boundary_matrix
from .geom import as_rational
from .simplex import LPError, StandardLP, bland_simplex, simplex_from_external

DEFAULT_BITS = 48  # weight grid 2**-48 (tolerance well below 1e-12 at unit scale)
CRASH_LIMIT = 250  # below this many rows start from the slack basis, no warm start


class FlatLPError(ValueError):
    pass


def _round_weight(v: Fraction, den: int) -> Fraction:
    if den % v.denominator == 0:
        return v
    return Fraction(round(v * den), den)


def _weight_scale(max_weight: float, bits: int) -> int:
    room = 52 - max(0, math.ceil(math.log2(max_weight + 1)))
    return 2 ** max(8, min(bits, room))


@dataclass
class LPProblem:
    complex: Complex2
    t: Chain
    lam: Fraction
    weights: list  # rational costs per primal column
    lp: StandardLP
    n_low: int  # number of k-simplices (rows)
    n_high: int  # number of (k+1)-simplices
    weight_tolerance: float
    true_low: np.ndarray  # float volumes of k-simplices
    true_high: np.ndarray

    @property
    def n_constraints(self):
        return self.lp.shape[0]

    @property
    def n_variables(self):
        return self.lp.shape[1]


def formulate(t: Chain, K: Complex2, lam=1, bits: int = DEFAULT_BITS) -> LPProblem:
    if t.complex is not K:
        raise FlatLPError("chain is not defined on this complex")
    if t.dim not in (0, 1):
        raise FlatLPError("flat norm LP is defined for 0- and 1-chains")
    if not t.integral:
        raise FlatLPError("input chain must be integral")
    lam = as_rational(lam)
    if lam < 0:
        raise FlatLPError("scale must be nonnegative")
    if t.dim == 1:
        D = boundary_matrix(K, 2).matrix
        low = np.array(K.edge_lengths())
        high_exact = K.triangle_areas()
        low_exact = None
    else:
        D = boundary_matrix(K, 1).matrix
        low = np.ones(K.n_vertices)
        low_exact = [Fraction(1)] * K.n_vertices
        high_exact = None
    nl, nh = D.shape
    if t.dim == 1:
        high = np.array([float(a) for a in high_exact])
    else:
        high = np.array(K.edge_lengths())
    mx = max([0.0] + list(low) + list(float(lam) * high))
    den = _weight_scale(mx, bits)
    if low_exact is None:
        wl = [Fraction(round(v * den), den) for v in low]
    else:
        wl = list(low_exact)
    if high_exact is not None:
        wh = [_round_weight(lam * a, den) for a in high_exact]
    else:
        wh = [_round_weight(lam * Fraction(v), den) for v in high]
    I = sp.identity(nl, format="csc", dtype=np.int64)
    A = sp.hstack([I, -I, D, -D], format="csc").astype(np.int64)
    c = wl + wl + wh + wh
    b = [Fraction(0)] * nl
    for i, v in t.coeffs.items():
        b[i] = Fraction(v)
    return LPProblem(K, t, lam, c, StandardLP(A, b, c), nl, nh, 1 / den, low, high)


@dataclass
class FlatNormResult:
    lam: Fraction
    value: float  # with the true (irrational) volumes
    value_exact: Fraction  # LP optimum under the rational weights
    x: Chain
    s: Chain
    integral: bool
    residual_ok: bool
    diagnostics: dict = field(default_factory=dict)

    @property
    def mass_x(self) -> float:
        return self.x.mass()

    @property
    def mass_s(self) -> float:
        return self.s.mass()

    def to_json(self) -> dict:
        return {
            "lambda": float(self.lam),
            "value": self.value,
            "x": [[i, int(c)] for i, c in sorted(self.x.coeffs.items())],
            "s": [[i, int(c)] for i, c in sorted(self.s.coeffs.items())],
            "integral": self.integral,
            "residual_ok": self.residual_ok,
        }


def _crash_basis(prob: LPProblem) -> list:
    nl = prob.n_low
    return [i if prob.lp.b[i] >= 0 else nl + i for i in range(nl)]


def _highs_basis(prob: LPProblem):
    """Optimal basis proposed by HiGHS in floating point: (columns, rows) or None."""
    import highspy

    lp = prob.lp
    m, n = lp.shape
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("solver", "simplex")
    # presolve only slows the dual simplex down on these sparse network-like rows
    h.setOptionValue("presolve", "off")
    h.addVars(n, np.zeros(n), np.full(n, highspy.kHighsInf))
    h.changeColsCost(n, np.arange(n, dtype=np.int32), np.array([float(v) for v in lp.c]))
    bb = np.array([float(v) for v in lp.b])
    At = lp.A.tocsr()
    h.addRows(m, bb, bb, At.nnz, At.indptr.astype(np.int32), At.indices.astype(np.int32),
              At.data.astype(float))
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    basis = h.getBasis()
    if not basis.valid:
        return None
    basic = highspy.HighsBasisStatus.kBasic
    cols = [j for j, st in enumerate(basis.col_status) if st == basic]
    rows = [i for i, st in enumerate(basis.row_status) if st == basic]
    return cols, rows


def solve(prob: LPProblem, start: str = "auto", backend: str = "auto") -> FlatNormResult:
    """Exact Bland simplex on the problem; optionally warm-started by HiGHS."""
    t0 = time.perf_counter()
    m = prob.n_low
    if m == 0 or not prob.t.coeffs:
        res = None
    else:
        res = None
        warm = start == "highs" or (start == "auto" and m > CRASH_LIMIT)
        if warm:
            proposal = _highs_basis(prob)
            if proposal is not None:
                try:
                    res = simplex_from_external(prob.lp, *proposal, backend=backend)
                except LPError:
                    res = None
        if res is None:
            res = bland_simplex(prob.lp, _crash_basis(prob), backend=backend)
    K, nl, nh = prob.complex, prob.n_low, prob.n_high
    kdim = prob.t.dim
    if res is None:
        xv = {}
        sv = {}
        value_exact = Fraction(0)
        diag = {"pivots": 0, "backend": None, "warm_start": False}
    else:
        xs = res.x
        xv = {i: xs[i] - xs[nl + i] for i in range(nl) if xs[i] or xs[nl + i]}
        sv = {f: xs[2 * nl + f] - xs[2 * nl + nh + f] for f in range(nh)
              if xs[2 * nl + f] or xs[2 * nl + nh + f]}
        value_exact = res.value
        diag = {"pivots": res.pivots, "backend": res.backend, "warm_start": res.warm_start,
                "min_reduced_cost": float(res.min_reduced_cost) if res.min_reduced_cost is not None else None,
                "optimal_certificate": res.min_reduced_cost is None or res.min_reduced_cost >= 0,
                "notes": res.notes}
    integral = all(Fraction(v).denominator == 1 for v in list(xv.values()) + list(sv.values()))
    x = Chain(K, kdim, xv)
    s = Chain(K, kdim + 1, sv)
    residual_ok = (x + apply_boundary(s)) == prob.t if s.dim <= 2 else False
    value = math.fsum(abs(float(c)) * prob.true_low[i] for i, c in xv.items()) + \
        float(prob.lam) * math.fsum(abs(float(c)) * prob.true_high[f] for f, c in sv.items())
    diag.update({"weight_tolerance": prob.weight_tolerance, "rows": nl,
                 "columns": prob.n_variables, "seconds": time.perf_counter() - t0})
    return FlatNormResult(prob.lam, value, value_exact, x, s, integral, residual_ok, diag)


def flat_norm_decompose(t: Chain, K: Complex2, lam=1, **kw) -> FlatNormResult:
    return solve(formulate(t, K, lam), **kw)


def simplicial_flat_distance(t1: Chain, t2: Chain, K: Complex2, lam=1, **kw) -> FlatNormResult:
    return flat_norm_decompose(t1 - t2, K, lam, **kw)


# -- scale studies ------------------------------------------------------------

@dataclass
class SweepReport:
    lams: list
    results: list
    thresholds: list  # (lam_lo, lam_hi) intervals where the optimal support changes
    monotone_value: bool
    monotone_mass_s: bool
    concave: bool


def _support(r: FlatNormResult):
    return (frozenset(r.x.coeffs.items()), frozenset(r.s.coeffs.items()))


def sweep(t: Chain, K: Complex2, lams: Sequence, tol: float = 1e-9, **kw) -> SweepReport:
    lams = [as_rational(l) for l in lams]
    if any(b < a for a, b in zip(lams, lams[1:])):
        raise FlatLPError("scales must be sorted ascending")
    results = [flat_norm_decompose(t, K, l, **kw) for l in lams]
    thr = [(lams[i], lams[i + 1]) for i in range(len(lams) - 1)
           if _support(results[i]) != _support(results[i + 1])]
    vals = [r.value for r in results]
    scale = max([1.0] + [abs(v) for v in vals])
    mono_v = all(b >= a - tol * scale for a, b in zip(vals, vals[1:]))
    ms = [r.mass_s for r in results]
    mono_s = all(b <= a + tol * max(1.0, a) for a, b in zip(ms, ms[1:]))
    conc = True
    for i in range(1, len(lams) - 1):
        l0, l1, l2 = (float(lams[i - 1]), float(lams[i]), float(lams[i + 1]))
        if l2 == l0:
            continue
        interp = vals[i - 1] + (vals[i + 1] - vals[i - 1]) * (l1 - l0) / (l2 - l0)
        if vals[i] < interp - tol * scale:
            conc = False
    return SweepReport(lams, results, thr, mono_v, mono_s, conc)


def breakpoints(t: Chain, K: Complex2, lo, hi, max_solves: int = 60, **kw) -> list:
    """Scales in [lo, hi] where the optimal value function changes slope.

    The value is a concave piecewise-linear function of the scale; each
    linear piece is fixed by an optimal (x, s) pair. Intersecting the pieces
    at the interval ends locates the breakpoints exactly (with respect to the
    rational LP weights).
    """
    lo, hi = as_rational(lo), as_rational(hi)
    cache = {}
    count = [0]

    def piece(l):
        if l not in cache:
            count[0] += 1
            if count[0] > max_solves:
                raise FlatLPError("breakpoint search exceeded its solve budget")
            prob = formulate(t, K, l)
            r = solve(prob, **kw)
            lowc = sum((abs(c) * prob.weights[i] for i, c in r.x.coeffs.items()), Fraction(0))
            cache[l] = (lowc, _filling_volume(K, r.s))
        return cache[l]

    out = []

    def rec(a, b, depth=0):
        pa, pb = piece(a), piece(b)
        if pa == pb or pa[1] == pb[1]:
            return
        lstar = (pb[0] - pa[0]) / (pa[1] - pb[1])
        if not a < lstar < b:
            if a <= lstar <= b:
                out.append(lstar)
            return
        pm = piece(lstar)
        vm = pm[0] + lstar * pm[1]
        va = pa[0] + lstar * pa[1]
        if vm >= va:  # no piece strictly below: lstar is the single breakpoint
            out.append(lstar)
            return
        rec(a, lstar, depth + 1)
        rec(lstar, b, depth + 1)

    rec(lo, hi)
    return sorted(set(out))


def _filling_volume(K, s: Chain) -> Fraction:
    if s.dim == 2:
        return sum((abs(c) * K.triangle_area(f) for f, c in s.coeffs.items()), Fraction(0))
    return sum((abs(c) * Fraction(K.edge_length(e)) for e, c in s.coeffs.items()), Fraction(0))


def find_threshold(t: Chain, K: Complex2, lo, hi, **kw):
    """Largest breakpoint in [lo, hi]: above it the optimum keeps no filling."""
    bps = breakpoints(t, K, lo, hi, **kw)
    return bps[-1] if bps else None
