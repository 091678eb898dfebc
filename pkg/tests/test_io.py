from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from flatnorm import io as fio
from flatnorm.complex import Chain
from flatnorm.geom import PLCurrent, PLRegion
from flatnorm.triangulate import PSLG

coord = st.fractions(min_value=-5, max_value=5, max_denominator=64)


def test_complex_round_trip(square_two, tmp_path):
    p = tmp_path / "k.cx"
    fio.save_complex(square_two, p)
    K = fio.load_complex(p)
    assert K.vertices == square_two.vertices and K.triangles == square_two.triangles


def test_chain_round_trip(square_two, tmp_path):
    c = Chain(square_two, 1, {0: 2, 3: -1})
    p = tmp_path / "c.csv"
    fio.save_chain(c, p)
    assert fio.load_chain(p, square_two) == c
    assert p.read_text().splitlines()[0] == "simplex_id,coefficient"


def test_pslg_round_trip():
    p = PSLG([(0, 0), (F(1, 3), 0), (0, 1)], [(0, 1), (1, 2)], [{0: 1}, {0: -2}])
    q = fio.loads_pslg(fio.dumps_pslg(p))
    assert q.vertices == p.vertices and q.segments == p.segments and q.tags == p.tags


@given(st.lists(st.tuples(coord, coord), min_size=2, max_size=6, unique=True), st.integers(1, 3))
def test_plc_round_trip(points, m):
    c = PLCurrent.from_polyline(points, m)
    assert fio.loads_plc(fio.dumps_plc(c)) == c


def test_plr_round_trip():
    r = PLRegion(((((0, 0), (1, 0), (F(1, 2), 1)), 2),))
    assert fio.loads_plr(fio.dumps_plr(r)).polygons == r.polygons


def test_format_errors():
    with pytest.raises(fio.FormatError):
        fio.loads_complex("1 0 0\nv 0 a 1\n")
    with pytest.raises(fio.FormatError):
        fio.loads_complex("3 3 1\nv 0 0 0\nv 1 1 0\nv 2 0 1\ne 0 0 1\ne 1 1 2\ne 2 0 1\nt 0 0 1 2\n")
    with pytest.raises(fio.FormatError):
        fio.loads_plc("0 0 1\n")
    with pytest.raises(fio.FormatError):
        fio.loads_plr("polygon 1\n0 0\n1 0\n")
    assert fio.loads_plc("# comment\n0 0 1/2 0.25 3\n").segments == (((0, 0), (F(1, 2), F(1, 4)), 3),)
