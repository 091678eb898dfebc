"""Exact primal simplex with Bland's rule.

Problems are in standard form: minimize c.x subject to A x = b, x >= 0.
Two linear-algebra back ends are provided:

* ``FractionBasis``: dense Gauss-Jordan over ``Fraction``; any rational data.
* ``UnimodularBasis``: for integer A whose bases have determinant +-1 (true
  for totally unimodular A). Systems are solved in floating point through a
  sparse LU, rounded to integers and then checked exactly in integer
  arithmetic, with integer residual refinement. If the check fails the basis
  is not unimodular and the caller falls back to ``FractionBasis``.

Every reported quantity (primal values, duals, reduced costs, objective) is
exact; floating point only proposes candidates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class LPError(Exception):
    pass


class Unbounded(LPError):
    pass


class Infeasible(LPError):
    pass


class NotUnimodular(LPError):
    """A float-proposed integer solution failed exact verification."""


@dataclass
class StandardLP:
    A: sp.csc_matrix  # integer or float-representable rational entries
    b: list
    c: list
    names: list | None = None

    def __post_init__(self):
        self.A = sp.csc_matrix(self.A)
        self.b = [v if type(v) is Fraction else Fraction(v) for v in self.b]
        self.c = [v if type(v) is Fraction else Fraction(v) for v in self.c]
        m, n = self.A.shape
        if len(self.b) != m or len(self.c) != n:
            raise ValueError("dimension mismatch between A, b and c")

    @property
    def shape(self):
        return self.A.shape

    def integer_matrix(self) -> bool:
        d = self.A.data
        return bool(np.all(np.asarray(d) == np.round(np.asarray(d, dtype=float))))


@dataclass
class SimplexResult:
    x: list  # Fractions, length n
    basis: list  # column indices, length m
    value: Fraction
    y: list  # duals, Fractions, length m
    pivots: int
    backend: str
    min_reduced_cost: Fraction | None = None
    warm_start: bool = False
    notes: list = field(default_factory=list)


# -- back ends ---------------------------------------------------------------

def _frac_solve(M: list, rhs: list) -> list:
    """Solve M z = rhs exactly (M square, list of Fraction rows)."""
    n = len(M)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise LPError("singular basis")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        if p != 1:
            inv = 1 / p
            aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                rowc = aug[col]
                aug[r] = [a - f * b for a, b in zip(aug[r], rowc)]
    return [aug[i][n] for i in range(n)]


class FractionBasis:
    name = "fraction"

    def __init__(self, lp: StandardLP):
        self.lp = lp
        A = lp.A.tocsc()
        m, n = A.shape
        self.m = m
        self.cols = []
        for j in range(n):
            lo, hi = A.indptr[j], A.indptr[j + 1]
            self.cols.append({int(i): Fraction(v) for i, v in zip(A.indices[lo:hi], A.data[lo:hi])})

    def set_basis(self, basis):
        m = self.m
        self.basis = list(basis)
        self.M = [[Fraction(0)] * m for _ in range(m)]
        for k, j in enumerate(basis):
            for i, v in self.cols[j].items():
                self.M[i][k] = v
        self.MT = [list(r) for r in zip(*self.M)] if m else []

    def solve(self, rhs):
        return _frac_solve(self.M, rhs)

    def solve_t(self, rhs):
        return _frac_solve(self.MT, rhs)

    def column(self, j):
        v = [Fraction(0)] * self.m
        for i, a in self.cols[j].items():
            v[i] = a
        return v

    def reduced_costs(self, y):
        c = self.lp.c
        return [c[j] - sum((a * y[i] for i, a in self.cols[j].items()), Fraction(0))
                for j in range(len(self.cols))]


class UnimodularBasis:
    """Integer arithmetic with float proposals; costs scaled to integers."""

    name = "unimodular"
    MAX_REFINE = 6

    def __init__(self, lp: StandardLP):
        if not lp.integer_matrix():
            raise NotUnimodular("matrix has non-integer entries")
        self.lp = lp
        self.A = sp.csc_matrix(lp.A, dtype=np.int64)
        self.AT = self.A.T.tocsr()
        m, n = self.A.shape
        self.m = m
        den = 1
        for v in lp.c:
            den = den * v.denominator // math.gcd(den, v.denominator)
        self.scale = den
        ci = [v.numerator * (den // v.denominator) for v in lp.c]
        if any(abs(v) >= 2 ** 52 for v in ci):
            raise NotUnimodular("scaled costs exceed exact float range")
        self.c_int = np.array(ci, dtype=np.int64)
        for v in lp.b:
            if v.denominator != 1 or abs(v) >= 2 ** 52:
                raise NotUnimodular("right-hand side must be a small integer vector")

    def set_basis(self, basis):
        self.basis = list(basis)
        B = self.A[:, self.basis]
        self.B = B
        self.BT = B.T.tocsc()
        try:
            self.lu = spla.splu(sp.csc_matrix(B, dtype=float))
        except RuntimeError as exc:  # exactly singular
            raise LPError("singular basis") from exc

    def _int_solve(self, rhs: np.ndarray, trans: bool) -> np.ndarray:
        M = self.BT if trans else self.B
        tflag = "T" if trans else "N"
        z = np.zeros(self.m, dtype=np.int64)
        r = rhs.astype(np.int64).copy()
        for _ in range(self.MAX_REFINE):
            if not r.any():
                return z
            dz = self.lu.solve(r.astype(float), trans=tflag)
            if not np.all(np.isfinite(dz)) or np.abs(dz).max() >= 2 ** 62:
                break
            dz = np.rint(dz).astype(np.int64)
            if not dz.any():
                break
            z = z + dz
            r = rhs - M @ z
        if r.any():
            raise NotUnimodular("integer solve did not verify")
        return z

    def solve(self, rhs):
        arr = np.array([int(v) for v in rhs], dtype=np.int64)
        return [Fraction(int(v)) for v in self._int_solve(arr, False)]

    def solve_t(self, rhs):
        sc = self.scale
        arr = np.array([v.numerator * (sc // v.denominator) for v in rhs], dtype=np.int64)
        return [Fraction(int(v), sc) for v in self._int_solve(arr, True)]

    def column(self, j):
        v = [Fraction(0)] * self.m
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        for i, a in zip(self.A.indices[lo:hi], self.A.data[lo:hi]):
            v[int(i)] = Fraction(int(a))
        return v

    def reduced_costs_int(self, y):
        sc = self.scale
        yi = np.array([v.numerator * (sc // v.denominator) for v in y], dtype=np.int64)
        return self.c_int - self.AT @ yi

    def reduced_costs(self, y):
        return [Fraction(int(v), self.scale) for v in self.reduced_costs_int(y)]


# -- driver ------------------------------------------------------------------

def _entering(backend, y, basic_set):
    if isinstance(backend, UnimodularBasis):
        d = backend.reduced_costs_int(y)
        neg = np.nonzero(d < 0)[0]
        for j in neg:  # ascending: Bland's smallest index
            if int(j) not in basic_set:
                return int(j), Fraction(int(d[j]), backend.scale), Fraction(int(d.min()), backend.scale)
        nb = [int(j) for j in range(len(d)) if int(j) not in basic_set]
        mn = Fraction(int(d[nb].min()), backend.scale) if nb else None
        return None, None, mn
    d = backend.reduced_costs(y)
    mn = None
    for j, v in enumerate(d):
        if j in basic_set:
            continue
        if mn is None or v < mn:
            mn = v
        if v < 0:
            return j, v, v
    return None, None, mn


def bland_simplex(lp: StandardLP, basis: Sequence[int], backend: str = "auto",
                  max_pivots: int | None = None, warm_start: bool = False,
                  artificial=()) -> SimplexResult:
    """Primal simplex from a primal-feasible basis, Bland's rule throughout.

    Columns listed in ``artificial`` must sit at level zero; they never enter
    and leave the basis at the first pivot whose direction touches them, so
    the iterates stay feasible for the problem without them.
    """
    m, n = lp.shape
    artificial = set(artificial)
    basis = list(basis)
    if len(basis) != m or len(set(basis)) != m:
        raise LPError("basis must list m distinct columns")
    notes = []
    bk = None
    if backend in ("auto", "unimodular"):
        try:
            bk = UnimodularBasis(lp)
            bk.set_basis(basis)
        except NotUnimodular as exc:
            if backend == "unimodular":
                raise
            notes.append(f"fraction back end: {exc}")
            bk = None
    if bk is None:
        bk = FractionBasis(lp)
        bk.set_basis(basis)
    try:
        xB = bk.solve(lp.b)
    except NotUnimodular as exc:
        if backend == "unimodular":
            raise
        notes.append(f"fraction back end: {exc}")
        bk = FractionBasis(lp)
        bk.set_basis(basis)
        xB = bk.solve(lp.b)
    if any(v < 0 for v in xB):
        raise Infeasible("starting basis is not primal feasible")
    if any(xB[i] != 0 for i, j in enumerate(basis) if j in artificial):
        raise Infeasible("artificial columns must start at level zero")
    pivots = 0
    limit = max_pivots if max_pivots is not None else 50 * (m + n) + 1000
    while True:
        cB = [lp.c[j] for j in basis]
        try:
            y = bk.solve_t(cB)
        except NotUnimodular as exc:
            notes.append(f"fraction back end after {pivots} pivots: {exc}")
            bk = FractionBasis(lp)
            bk.set_basis(basis)
            y = bk.solve_t(cB)
        q, dq, dmin = _entering(bk, y, set(basis) | artificial)
        if q is None:
            break
        try:
            u = bk.solve(bk.column(q))
        except NotUnimodular as exc:
            notes.append(f"fraction back end after {pivots} pivots: {exc}")
            bk = FractionBasis(lp)
            bk.set_basis(basis)
            u = bk.solve(bk.column(q))
        best = None
        for i, ui in enumerate(u):
            if ui != 0 and basis[i] in artificial:
                key = (Fraction(0), -1, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
            elif ui > 0:
                ratio = xB[i] / ui
                key = (ratio, 0, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise Unbounded(f"column {q} gives an unbounded ray")
        theta = best[0][0]
        r = best[1]
        xB = [xi - theta * ui for xi, ui in zip(xB, u)]
        xB[r] = theta
        basis[r] = q
        pivots += 1
        if pivots > limit:
            raise LPError("pivot limit exceeded")
        try:
            bk.set_basis(basis)
        except LPError:
            raise
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        x[j] = xB[i]
    value = sum((lp.c[j] * x[j] for j in basis), Fraction(0))
    return SimplexResult(x, basis, value, y, pivots, bk.name, dmin, warm_start, notes)


def two_phase(lp: StandardLP, backend: str = "fraction") -> SimplexResult:
    """Solve a general standard-form LP: artificial phase 1, then phase 2."""
    m, n = lp.shape
    A = lp.A.tolil(copy=True)
    b = list(lp.b)
    flipped = [i for i in range(m) if b[i] < 0]
    for i in flipped:
        A[i, :] = -A[i, :]
        b[i] = -b[i]
    A = sp.csc_matrix(A)
    art = sp.identity(m, format="csc", dtype=A.dtype)
    A1 = sp.hstack([A, art], format="csc")
    c1 = [Fraction(0)] * n + [Fraction(1)] * m
    p1 = bland_simplex(StandardLP(A1, b, c1), list(range(n, n + m)), backend=backend)
    if p1.value > 0:
        raise Infeasible("phase 1 optimum is positive")
    basis = list(p1.basis)
    # drive remaining (zero-valued) artificials out of the basis
    fb = FractionBasis(StandardLP(A1, b, c1))
    for r, j in enumerate(list(basis)):
        if j < n:
            continue
        fb.set_basis(basis)
        for q in range(n):
            if q in basis:
                continue
            u = fb.solve(fb.column(q))
            if u[r] != 0:
                basis[r] = q
                break
    keep_rows = [r for r, j in enumerate(basis) if j < n]
    if len(keep_rows) < m:
        # redundant rows: drop them
        A = A[keep_rows, :]
        b = [b[i] for i in keep_rows]
        basis = [basis[r] for r in keep_rows]
    res = bland_simplex(StandardLP(A, b, lp.c), basis, backend=backend)
    if len(keep_rows) < m:
        y = [Fraction(0)] * m
        for k, r in enumerate(keep_rows):
            y[r] = res.y[k]
        res.y = y
        res.notes.append(f"dropped {m - len(keep_rows)} redundant rows")
    # duals of the rows negated for phase 1 refer to the original rows with a sign flip
    res.y = list(res.y)
    for i in flipped:
        res.y[i] = -res.y[i]
    return res


def certify_basis(lp: StandardLP, cols: Sequence[int], rows: Sequence[int]) -> SimplexResult | None:
    """Exactly certify an optimal basis proposed by an external solver.

    The basis consists of structural columns ``cols`` and the row (slack)
    variables of ``rows``, as reported by solvers that carry a row variable per
    equality. The primal point is the one fixed by the nonbasic columns at
    zero; the duals solve ``A_B^T y = c_B`` with ``y_i = 0`` on basic rows.
    Returns a result when the primal point is exactly feasible and the duals
    are exactly feasible (equal objectives then follow), else ``None``.
    """
    m, n = lp.shape
    cols, rows = list(cols), list(rows)
    if len(cols) + len(rows) != m:
        return None
    ext = sp.hstack([lp.A, sp.identity(m, format="csc", dtype=lp.A.dtype)], format="csc")
    ext_lp = StandardLP(ext, lp.b, list(lp.c) + [Fraction(0)] * m)
    basis = cols + [n + i for i in rows]
    try:
        bk = UnimodularBasis(ext_lp)
        bk.set_basis(basis)
        xb = bk.solve(ext_lp.b)
        y = bk.solve_t([ext_lp.c[j] for j in basis])
        d = bk.reduced_costs_int(y)[:n]
    except (NotUnimodular, LPError):
        return None
    if any(v < 0 for v in xb) or any(xb[len(cols) + k] != 0 for k in range(len(rows))):
        return None
    if d.min(initial=0) < 0:
        return None
    x = [Fraction(0)] * n
    for k, j in enumerate(cols):
        x[j] = xb[k]
    value = sum((lp.c[j] * x[j] for j in cols), Fraction(0))
    dual_value = sum((bi * yi for bi, yi in zip(lp.b, y)), Fraction(0))
    if value != dual_value:
        return None
    res = SimplexResult(x, cols, value, y, 0, "certified", Fraction(int(d.min(initial=0)), bk.scale), True)
    res.notes.append(f"external basis certified by exact duality ({len(rows)} basic row variables)")
    return res


def simplex_from_external(lp: StandardLP, cols: Sequence[int], rows: Sequence[int],
                          backend: str = "auto") -> SimplexResult:
    """Certify an external basis, or continue from it with Bland pivots.

    Basic row variables become zero-level artificial columns of the extended
    problem [A | I]; they are pivoted out as the simplex proceeds.
    """
    res = certify_basis(lp, cols, rows)
    if res is not None:
        return res
    m, n = lp.shape
    ext = sp.hstack([lp.A, sp.identity(m, format="csc", dtype=lp.A.dtype)], format="csc")
    ext_lp = StandardLP(ext, lp.b, list(lp.c) + [Fraction(0)] * m)
    basis = list(cols) + [n + i for i in rows]
    out = bland_simplex(ext_lp, basis, backend=backend, warm_start=True,
                        artificial=range(n, n + m))
    out.x = out.x[:n]
    out.notes.append(f"continued from external basis with {out.pivots} Bland pivots")
    return out
