"""Polynomial differential forms on the plane and exact pairing with PL currents.

Only polynomial coefficients are supported; they are enough to separate the
piecewise-linear currents that appear here and they integrate exactly over
segments and triangles.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .geom import PLCurrent, PLRegion, as_rational


class DimensionMismatch(TypeError):
    """Form degree does not match current dimension."""


def _poly(coeffs) -> dict:
    out = {}
    for (i, j), c in dict(coeffs).items():
        c = as_rational(c)
        if c != 0:
            out[(int(i), int(j))] = c
    return out


def _deriv(poly: dict, var: int) -> dict:
    out = {}
    for (i, j), c in poly.items():
        e = (i, j)[var]
        if e == 0:
            continue
        key = (i - 1, j) if var == 0 else (i, j - 1)
        out[key] = out.get(key, 0) + c * e
    return {k: v for k, v in out.items() if v != 0}


def _degree(poly: dict) -> int:
    return max((i + j for i, j in poly), default=0)


@dataclass(frozen=True)
class PolyForm:
    """A k-form with polynomial coefficients, k in {0, 1, 2}.

    ``components`` holds one polynomial (a ``{(i, j): coeff}`` map for
    ``x**i * y**j``) for a 0- or 2-form and two (``f``, ``g`` of
    ``f dx + g dy``) for a 1-form.
    """

    degree: int
    components: tuple = field(default_factory=tuple)
    max_poly_degree: int = 3

    def __post_init__(self):
        if self.degree not in (0, 1, 2):
            raise ValueError("form degree must be 0, 1 or 2")
        want = 2 if self.degree == 1 else 1
        comps = tuple(_poly(c) for c in self.components) or tuple({} for _ in range(want))
        if len(comps) != want:
            raise ValueError(f"a {self.degree}-form needs {want} coefficient polynomial(s)")
        for c in comps:
            if _degree(c) > self.max_poly_degree:
                raise ValueError("coefficient exceeds the polynomial degree bound")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero_form(cls, f, **kw):
        return cls(0, (f,), **kw)

    @classmethod
    def one_form(cls, f, g, **kw):
        return cls(1, (f, g), **kw)

    @classmethod
    def two_form(cls, h, **kw):
        return cls(2, (h,), **kw)

    def d(self) -> "PolyForm":
        """Exterior derivative."""
        cap = self.max_poly_degree
        if self.degree == 0:
            (f,) = self.components
            return PolyForm(1, (_deriv(f, 0), _deriv(f, 1)), cap)
        if self.degree == 1:
            f, g = self.components
            h = dict(_deriv(g, 0))
            for k, v in _deriv(f, 1).items():
                h[k] = h.get(k, 0) - v
            return PolyForm(2, (h,), cap)
        return PolyForm(2, ({},), cap)

    def __add__(self, other: "PolyForm") -> "PolyForm":
        if self.degree != other.degree:
            raise DimensionMismatch("cannot add forms of different degree")
        comps = []
        for a, b in zip(self.components, other.components):
            c = dict(a)
            for k, v in b.items():
                c[k] = c.get(k, 0) + v
            comps.append(c)
        return PolyForm(self.degree, tuple(comps), max(self.max_poly_degree, other.max_poly_degree))

    def scale(self, k) -> "PolyForm":
        k = as_rational(k)
        return PolyForm(self.degree, tuple({m: c * k for m, c in comp.items()}
                                           for comp in self.components), self.max_poly_degree)


def random_form(degree: int, rng: random.Random, max_poly_degree: int = 3,
                coeff_range: int = 5) -> PolyForm:
    """A form with small random rational coefficients on every monomial."""
    monos = [(i, j) for i in range(max_poly_degree + 1) for j in range(max_poly_degree + 1 - i)]
    ncomp = 2 if degree == 1 else 1
    comps = []
    for _ in range(ncomp):
        comps.append({m: Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, 3))
                      for m in monos})
    return PolyForm(degree, tuple(comps), max_poly_degree)


def _pmul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _ppow(base: list, n: int, cache: dict) -> list:
    if n not in cache:
        cache[n] = [Fraction(1)] if n == 0 else _pmul(_ppow(base, n - 1, cache), base)
    return cache[n]


def _along(poly: dict, p, d) -> list:
    """Coefficients in t of poly(p + t d)."""
    xs, ys = {}, {}
    bx = [p[0], d[0]]
    by = [p[1], d[1]]
    out = [Fraction(0)]
    for (i, j), c in poly.items():
        term = _pmul(_ppow(bx, i, xs), _ppow(by, j, ys))
        if len(term) > len(out):
            out += [Fraction(0)] * (len(term) - len(out))
        for k, v in enumerate(term):
            out[k] += c * v
    return out


def _segment_integral(f: dict, g: dict, p, q) -> Fraction:
    d = (q[0] - p[0], q[1] - p[1])
    total = Fraction(0)
    for poly, dk in ((f, d[0]), (g, d[1])):
        if not poly or dk == 0:
            continue
        coeffs = _along(poly, p, d)
        total += dk * sum((c / (k + 1) for k, c in enumerate(coeffs)), Fraction(0))
    return total


def _triangle_integral(h: dict, a, b, c) -> Fraction:
    """Signed integral of h over triangle (a, b, c) through the affine map
    a + u (b - a) + v (c - a) and the reference moments u^i v^j -> i! j! / (i+j+2)!."""
    e1 = (b[0] - a[0], b[1] - a[1])
    e2 = (c[0] - a[0], c[1] - a[1])
    jac = e1[0] * e2[1] - e1[1] * e2[0]
    if jac == 0:
        return Fraction(0)
    # bivariate polynomials as {(du, dv): coeff}
    xlin = {(0, 0): a[0], (1, 0): e1[0], (0, 1): e2[0]}
    ylin = {(0, 0): a[1], (1, 0): e1[1], (0, 1): e2[1]}

    def mul(p1, p2):
        out = {}
        for (i1, j1), c1 in p1.items():
            if not c1:
                continue
            for (i2, j2), c2 in p2.items():
                if c2:
                    k = (i1 + i2, j1 + j2)
                    out[k] = out.get(k, 0) + c1 * c2
        return out

    xp = [{(0, 0): Fraction(1)}]
    yp = [{(0, 0): Fraction(1)}]
    total = Fraction(0)
    for (i, j), coeff in h.items():
        while len(xp) <= i:
            xp.append(mul(xp[-1], xlin))
        while len(yp) <= j:
            yp.append(mul(yp[-1], ylin))
        for (du, dv), v in mul(xp[i], yp[j]).items():
            total += coeff * v * Fraction(factorial(du) * factorial(dv), factorial(du + dv + 2))
    return jac * total


def _eval(poly: dict, p) -> Fraction:
    return sum((c * p[0] ** i * p[1] ** j for (i, j), c in poly.items()), Fraction(0))


def pair(current, form: PolyForm) -> Fraction:
    """Exact value of the current on the form.

    0-currents are ``{point: multiplicity}`` maps, 1-currents are
    :class:`PLCurrent`, 2-currents are :class:`PLRegion`.
    """
    if isinstance(current, PLCurrent):
        if form.degree != 1:
            raise DimensionMismatch("a 1-current pairs with 1-forms")
        f, g = form.components
        return sum((m * _segment_integral(f, g, p, q) for p, q, m in current.segments), Fraction(0))
    if isinstance(current, PLRegion):
        if form.degree != 2:
            raise DimensionMismatch("a 2-current pairs with 2-forms")
        (h,) = form.components
        total = Fraction(0)
        for verts, m in current.polygons:
            v0 = verts[0]
            for k in range(1, len(verts) - 1):
                total += m * _triangle_integral(h, v0, verts[k], verts[k + 1])
        return total
    if isinstance(current, dict):
        if form.degree != 0:
            raise DimensionMismatch("a 0-current pairs with 0-forms")
        (f,) = form.components
        return sum((m * _eval(f, p) for p, m in current.items()), Fraction(0))
    raise TypeError(f"cannot pair {type(current).__name__}")
