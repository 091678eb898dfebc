import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatnorm.complex import (BETA, Chain, Complex2, ComplexError, angle_regularity_bound, apply_boundary,
                              boundary_matrix, chain_from_current, regularity, small_angle_locations,
                              tu_verify)
from flatnorm.geom import PLCurrent

from conftest import random_chain, small_complex


def test_counts_and_boundary_squared(square_two):
    K = square_two
    assert (K.n_vertices, K.n_edges, K.n_triangles) == (4, 5, 2)
    d1 = boundary_matrix(K, 1).dense()
    d2 = boundary_matrix(K, 2).dense()
    assert not np.any(d1 @ d2)


@given(st.integers(0, 10_000))
def test_boundary_of_boundary_vanishes(seed):
    rng = random.Random(seed)
    K = small_complex(rng)
    s = Chain(K, 2, {t: rng.randint(-2, 2) for t in range(K.n_triangles)})
    assert apply_boundary(apply_boundary(s)).is_zero()


def test_overlapping_triangles_rejected():
    with pytest.raises(ComplexError):
        Complex2([(0, 0), (2, 0), (0, 2), (1, -1)], [(0, 1, 2), (0, 3, 2)])


def test_chain_mass_and_current_round_trip(square_two):
    K = square_two
    c = chain_from_current(K, PLCurrent.from_polyline([(0, 0), (1, 0), (1, 1)]))
    assert c.mass() == 2.0
    assert c.to_current() == PLCurrent.from_polyline([(0, 0), (1, 0), (1, 1)])
    s = Chain(K, 2, {0: 1, 1: 1})
    assert s.mass() == 1.0
    assert apply_boundary(s).to_current() == PLCurrent.from_polyline([(0, 0), (1, 0), (1, 1), (0, 1)], closed=True)


def test_boundary_matrix_totally_unimodular():
    K = small_complex(random.Random(4))
    assert tu_verify(boundary_matrix(K, 2), max_order=4)
    assert not tu_verify(np.array([[1, 1], [-1, 1]]), max_order=2)


def test_regularity_of_equilateral_triangle():
    s3 = F(math.sqrt(3)).limit_denominator(10 ** 12)
    K = Complex2([(0, 0), (2, 0), (1, s3)], [(0, 1, 2)])
    rep = regularity(K)
    r = 1 / math.sqrt(3)
    want = 2 * 6 / (math.pi * (r / 2) ** 2) + 2 * 2 / r
    assert rep.theta_K == pytest.approx(want, rel=1e-9)
    assert rep.min_angle == pytest.approx(60, abs=1e-6)


def test_angle_bound_constants():
    # C_theta = (48/pi) cot^2(theta/2) + 4 cot(theta/2), at 30 degrees
    cot = 1 / math.tan(math.radians(15))
    assert angle_regularity_bound(30) == pytest.approx(48 / math.pi * cot ** 2 + 4 * cot)
    assert BETA == pytest.approx(angle_regularity_bound(30))
    assert 227.73 < BETA < 227.75


@given(st.integers(0, 10_000))
def test_regularity_below_angle_bound(seed):
    K = small_complex(random.Random(seed))
    rep = regularity(K)
    assert rep.theta_K <= angle_regularity_bound(rep.min_angle) * (1 + 1e-12)


def test_small_angle_audit():
    K = Complex2([(0, 0), (10, 0), (10, 1), (0, 5)], [(0, 1, 2), (0, 2, 3)])
    skel = PLCurrent.from_polyline([(0, 0), (10, 0), (10, 1)])
    audit = small_angle_locations(K, skel, 2.0)
    # the sliver along the skeleton is inside; the 27.5 degree triangle is not
    assert [(t, inside) for t, _, inside in audit.small_angles] == [(0, True), (1, False)]
    assert not audit.all_inside and audit.complement == [1]
