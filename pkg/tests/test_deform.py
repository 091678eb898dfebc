import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from flatnorm.complex import Chain, apply_boundary, regularity
from flatnorm.deform import (DeformError, deform_currents, homotopy_residual, incenter, overlay_coefficients,
                             project_in_triangle, select_center, triangle_theta)
from flatnorm.geom import PLCurrent, PLRegion
from flatnorm.triangulate import refine

from conftest import random_mesh, unit_square_pslg


def rp(rng):
    return (F(rng.randint(1, 999), 1000), F(rng.randint(1, 999), 1000))


def test_projection_example():
    seg = PLCurrent((((1, F(1, 2)), (F(1, 2), 1), 1),))
    img, fill = project_in_triangle(seg, [(0, 0), (2, 0), (0, 2)], (F(1, 2), F(1, 2)))
    assert img == PLCurrent((((F(3, 2), F(1, 2)), (F(1, 2), F(3, 2)), 1),))
    assert img.mass() / seg.mass() == pytest.approx(2)
    assert fill.exact_mass() == F(3, 8)


def test_projection_on_boundary_and_multiplicity():
    tri = [(0, 0), (2, 0), (0, 2)]
    on = PLCurrent((((0, 0), (1, 0), 1),))
    img, fill = project_in_triangle(on, tri, (F(1, 2), F(1, 2)))
    assert img == on and not fill.polygons
    seg = PLCurrent((((1, F(1, 2)), (F(1, 2), 1), 3),))
    img, fill = project_in_triangle(seg, tri, (F(1, 2), F(1, 2)))
    assert {m for _, _, m in img.segments} == {3} and {abs(m) for _, m in fill.polygons} == {3}
    with pytest.raises(DeformError):
        project_in_triangle(PLCurrent((((F(1, 4), F(1, 4)), (1, F(1, 2)), 1),)), tri, (F(1, 2), F(1, 3)))


def test_select_center_trivial_and_bounded():
    tri = [(0, 0), (2, 0), (0, 2)]
    a, ex, bound = select_center(tri, [[]], 1.0)
    (cx, cy), r = incenter(tri)
    assert ex == [0.0] and (float(a[0]) - cx) ** 2 + (float(a[1]) - cy) ** 2 <= (r / 2) ** 2
    piece = [((F(1, 10), F(1, 10)), (F(3, 2), F(1, 5)), 1)]
    a, ex, bound = select_center(tri, [piece], 1.0)
    assert bound == pytest.approx(3 * triangle_theta([tuple(map(F, v)) for v in tri]))
    assert ex[0] <= bound


def test_diagonal_across_square(square_two):
    K = square_two
    T = PLCurrent((((0, 1), (1, 0), 1),))
    (P,), _, cert = deform_currents([T], [], K, 1.0, verify_forms=20)
    paths = [PLCurrent.from_polyline([(0, 1), (0, 0), (1, 0)]), PLCurrent.from_polyline([(0, 1), (1, 1), (1, 0)])]
    assert P.to_current() in paths
    assert cert.curves[0]["stokes_residual"] == 0
    assert cert.ok


def test_chain_is_fixed(square_two):
    K = square_two
    T = PLCurrent.from_polyline([(0, 0), (1, 0), (1, 1)], mult=2)
    (P,), _, cert = deform_currents([T], [], K)
    assert P.to_current() == T
    assert cert.Q[0].is_zero() and not cert.R[0].polygons


def test_conforming_region_matches_overlay():
    K = refine(unit_square_pslg(), 25, max_edge=0.3).complex
    S = PLRegion(((((0, 0), (1, 0), (1, 1), (0, 1)), 2),))
    _, (O,), cert = deform_currents([], [S], K)
    assert O == Chain(K, 2, {t: 2 for t in range(K.n_triangles)})
    assert cert.regions[0]["overlay_matches"] is True
    assert overlay_coefficients(S, K) == dict(O.coeffs)


@given(st.integers(0, 10_000))
def test_push_properties(seed):
    rng = random.Random(seed)
    K = random_mesh(rng, 2, 0.4)
    T1 = PLCurrent.from_polyline([rp(rng) for _ in range(3)], rng.randint(1, 2))
    T2 = PLCurrent.from_polyline([rp(rng) for _ in range(2)])
    S = PLRegion(((tuple(rp(rng) for _ in range(3)), 1),), check=False) if rng.random() < 0.5 else None
    regions = [S] if S is not None and S.polygons and S.signed_area() != 0 else []
    (P1, P2), Os, cert = deform_currents([T1, T2], regions, K, 1.0)
    assert cert.ok
    # linearity with shared centers
    (L,), _, _ = deform_currents([2 * T1 - T2], [], K, 1.0, centers=cert.centers, m=2, n=len(regions))
    assert L == 2 * P1 - P2
    assert homotopy_residual(T1, P1, cert.Q[0], cert.R[0], n_forms=3, seed=seed) == 0
    for r, O in zip(cert.regions, Os):
        assert r["boundary_commutes"]


def test_single_current_corollary():
    rng = random.Random(3)
    K = random_mesh(rng, 3, 0.3)
    T = PLCurrent.from_polyline([rp(rng) for _ in range(5)])
    _, _, cert = deform_currents([T], [], K, 1.0)
    theta = regularity(K).theta_sigma
    for t, (x, bound) in cert.triangle_expansion.items():
        assert bound == pytest.approx(3 * theta[t])
        assert x <= bound


def test_outside_current_rejected(square_two):
    with pytest.raises(DeformError):
        deform_currents([PLCurrent((((0, 0), (2, 0), 1),))], [], square_two)
