import math

import pytest

from flatnorm.approx import CurveSpec, approximate_curve, circle, inscribed_polygon, segment_area
from flatnorm.geom import pl_boundary


def test_quarter_circle_chords():
    arc = CurveSpec("arc", radius=1, start=0, end=math.pi / 2)
    P, cert = approximate_curve(arc, 0.01, reference_chords=1024)
    assert cert.chords == 8 and cert.ok
    assert cert.boundary_preserved and pl_boundary(P) == pl_boundary(arc.polyline(1))
    assert cert.mass_P < arc.mass()


def test_octagon_from_segment_area():
    rho = math.pi - 2 * math.sqrt(2)
    P, cert = approximate_curve(circle(), rho, reference_chords=1024)
    assert cert.chords == 8
    assert cert.gap_bound == pytest.approx(rho)
    assert P.mass() == pytest.approx(16 * math.sin(math.pi / 8))


def test_polyline_unchanged():
    c = CurveSpec("polyline", [(0, 0), (1, 0), (1, 1)])
    P, cert = approximate_curve(c, 0.01)
    assert P == c.polyline(0) and cert.chords == 0 and cert.ok


def test_segment_area_and_validation():
    assert segment_area(1, math.pi) == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        CurveSpec("arc", radius=-1)
    with pytest.raises(ValueError):
        approximate_curve(circle(), 0)
    assert CurveSpec.from_json(circle().to_json()).full_circle


def test_inscribed_polygon_mass():
    assert inscribed_polygon(8).mass() == pytest.approx(16 * math.sin(math.pi / 8), rel=1e-9)
