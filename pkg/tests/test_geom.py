import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from flatnorm.geom import (GeometryError, PLCurrent, PLRegion, dilate, dyadic, filler_area_bound,
                           filler_region, on_segment, orient, pl_boundary, region_boundary,
                           segment_intersection, signed_area)

coord = st.fractions(min_value=-4, max_value=4, max_denominator=16)
pt = st.tuples(coord, coord)


def polyline(points):
    pts = [p for i, p in enumerate(points) if i == 0 or p != points[i - 1]]
    return PLCurrent.from_polyline(pts)


@given(st.lists(pt, min_size=2, max_size=6))
def test_boundary_of_polyline_is_end_minus_start(points):
    c = polyline(points)
    b = pl_boundary(c)
    pts = [p for i, p in enumerate(points) if i == 0 or p != points[i - 1]]
    if len(pts) < 2 or pts[0] == pts[-1]:
        assert b == {}
    else:
        assert b == {pts[-1]: 1, pts[0]: -1}


@given(st.lists(pt, min_size=2, max_size=6))
def test_normalization_preserves_boundary_and_cancels(points):
    c = polyline(points)
    assert pl_boundary(c.normalized()) == pl_boundary(c)
    assert (c - c).is_zero()
    assert (c + c) == 2 * c


def test_collinear_runs_merge():
    a = PLCurrent.from_polyline([(0, 0), (1, 0), (2, 0)])
    assert a.normalized().segments == (((0, 0), (2, 0), 1),)
    assert a.mass() == 2.0


def test_zero_length_and_bad_multiplicity_rejected():
    with pytest.raises(GeometryError):
        PLCurrent((((0, 0), (0, 0), 1),))
    with pytest.raises(GeometryError):
        PLCurrent((((0, 0), (1, 0), F(1, 2)),))


def test_region_orientation_and_area():
    cw = PLRegion(((((0, 0), (0, 1), (1, 1), (1, 0)), 1),))
    (verts, m), = cw.polygons
    assert m == -1 and signed_area(verts) == 1
    assert cw.signed_area() == -1 and cw.mass() == 1.0


def test_self_intersecting_polygon_rejected():
    with pytest.raises(GeometryError):
        PLRegion(((((0, 0), (1, 1), (1, 0), (0, 1)), 1),))


def test_predicates():
    assert orient((0, 0), (1, 0), (0, 1)) == 1
    assert on_segment((F(1, 2), F(1, 2)), (0, 0), (1, 1))
    assert segment_intersection((0, 0), (1, 1), (0, 1), (1, 0)) == (F(1, 2), F(1, 2))
    assert segment_intersection((0, 0), (1, 0), (0, 1), (1, 1)) is None
    assert dyadic(0.1, 4) == F(2, 16)


def test_dilation_scales_mass():
    c = PLCurrent.from_polyline([(0, 0), (3, 4)])
    assert dilate(c, 2).mass() == 10.0
    r = PLRegion(((((0, 0), (1, 0), (0, 1)), 1),))
    assert dilate(r, 3).exact_mass() == F(9, 2)
    with pytest.raises(GeometryError):
        dilate(c, -1)


def test_octagon_filler_matches_segment_area():
    def ngon(n):
        return [(dyadic(math.cos(2 * math.pi * k / n)), dyadic(math.sin(2 * math.pi * k / n))) for k in range(n)]
    oc = PLCurrent.from_polyline(ngon(8), closed=True)
    ci = PLCurrent.from_polyline(ngon(1024), closed=True)
    a = float(filler_area_bound(ci, oc))
    # area between the 1024-gon and the octagon
    want = 512 * math.sin(2 * math.pi / 1024) - 4 * math.sin(math.pi / 4)
    assert a == pytest.approx(want, rel=1e-9)
    assert region_boundary(filler_region(ci, oc)) == ci - oc


def test_filler_requires_matching_boundaries():
    with pytest.raises(GeometryError):
        filler_region(PLCurrent.from_polyline([(0, 0), (1, 0)]), PLCurrent.from_polyline([(0, 0), (2, 0)]))


@given(st.lists(pt, min_size=3, max_size=5, unique=True))
def test_filler_of_open_paths_bounds_difference(points):
    a = polyline(points)
    b = PLCurrent.from_polyline([points[0], points[-1]])
    if a.is_zero() and b.is_zero():
        return
    R = filler_region(a, b)
    assert region_boundary(R) == a - b
