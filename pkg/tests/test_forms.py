import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from flatnorm.forms import DimensionMismatch, PolyForm, pair, random_form
from flatnorm.geom import PLCurrent, PLRegion, pl_boundary, region_boundary


def test_unit_square_area_and_segment_length():
    sq = PLRegion(((((0, 0), (1, 0), (1, 1), (0, 1)), 1),))
    assert pair(sq, PolyForm.two_form({(0, 0): 1})) == 1
    assert pair(PLCurrent((((0, 0), (1, 0), 1),)), PolyForm.one_form({(0, 0): 1}, {})) == 1


def test_polynomial_integral_exact():
    # integral of x*y over the unit square
    sq = PLRegion(((((0, 0), (1, 0), (1, 1), (0, 1)), 1),))
    assert pair(sq, PolyForm.two_form({(1, 1): 1})) == F(1, 4)
    # integral of x^2 dx along (0,0)->(3,0)
    assert pair(PLCurrent((((0, 0), (3, 0), 1),)), PolyForm.one_form({(2, 0): 1}, {})) == 9


@given(st.integers(0, 10_000))
def test_stokes_on_regions(seed):
    rng = random.Random(seed)
    S = PLRegion(((((0, 0), (3, 0), (2, 2), (F(1, 2), 3)), 2), (((5, 5), (4, 6), (6, 7)), -1)))
    psi = random_form(1, rng)
    assert pair(region_boundary(S), psi) == pair(S, psi.d())


@given(st.integers(0, 10_000))
def test_stokes_on_curves(seed):
    rng = random.Random(seed)
    c = PLCurrent.from_polyline([(0, 0), (F(1, 3), 2), (3, F(-1, 2)), (1, 1)], mult=3)
    f = random_form(0, rng)
    assert pair(c, f.d()) == pair(pl_boundary(c), f)


def test_dd_is_zero():
    f = random_form(0, random.Random(3))
    assert f.d().d().components == ({},) or all(v == 0 for v in f.d().d().components[0].values())


def test_degree_mismatch():
    with pytest.raises(DimensionMismatch):
        pair(PLCurrent((((0, 0), (1, 0), 1),)), PolyForm.two_form({(0, 0): 1}))
    with pytest.raises(ValueError):
        PolyForm.one_form({(4, 0): 1}, {})
