import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from flatnorm.complex import Chain, angle_regularity_bound, regularity
from flatnorm.mesher import DelaunayRefiner, RefinementError, delaunay_refine
from flatnorm.triangulate import (PSLG, GridSpec, choose_rotation, convex_hull, forbidden_angles, localize,
                                  node_segments, rational_rotation, refine, select_delta, superimpose_grid,
                                  tube_area_bound, with_hull)

from conftest import unit_square_pslg


def seg_lengths(p: PSLG):
    V = p.vertices
    return [math.dist(map(float, V[a]), map(float, V[b])) for a, b in p.segments]


def test_crossing_segments_noded():
    p = node_segments([((0, 0), (2, 2), {0: 1}), ((0, 2), (2, 0), {1: 3})])
    assert (1, 1) in p.vertices
    assert len(p.segments) == 4
    assert sorted(abs(sum(t.values())) for t in p.tags) == [1, 1, 3, 3]


def test_collinear_overlap_sums_tags():
    p = node_segments([((0, 0), (2, 0), {0: 1}), ((1, 0), (3, 0), {0: 1})])
    assert sorted(sum(t.values()) for t in p.tags) == [1, 1, 2]


def test_hull_and_rotation():
    assert convex_hull([(0, 0), (1, 0), (1, 1), (0, 1), (F(1, 2), F(1, 2))]) == [(0, 0), (1, 0), (1, 1), (0, 1)]
    sq = with_hull(unit_square_pslg())
    assert math.degrees(choose_rotation(forbidden_angles(sq))) == pytest.approx(45)
    c, s = rational_rotation(math.pi / 4)
    assert c * c + s * s == 1 and abs(float(c) - math.sqrt(0.5)) < 1e-4


def test_grid_on_degenerate_segment():
    seg = PSLG([(0, 0), (1, 0)], [(0, 1)], [{0: 2}])
    out, _ = superimpose_grid(seg, GridSpec(F(1, 5), math.pi / 4))
    L = seg_lengths(out)
    assert len(out.segments) == 11
    assert max(L) < 0.2 and sum(L) == pytest.approx(1)
    assert all(t == {0: 2} for t in out.tags)


def test_select_delta_bound():
    sq = with_hull(unit_square_pslg())
    d = select_delta(sq, 0.1)
    assert tube_area_bound(sq.length(), len(sq.segments), float(d)) < 0.1
    assert tube_area_bound(sq.length(), len(sq.segments), float(2 * d)) >= 0.1


def test_refine_square_quality():
    m = refine(with_hull(unit_square_pslg()), 30, max_edge=0.25)
    rep = regularity(m.complex)
    assert rep.min_angle >= 30 - 1e-9
    assert float(rep.diameter.max()) <= 0.25
    # the boundary chain survives refinement with total length 4
    from flatnorm.complex import Chain
    assert Chain(m.complex, 1, m.chain_coeffs(0)).mass() == pytest.approx(4)


def test_refine_rejects_targets_above_30():
    with pytest.raises(ValueError):
        refine(unit_square_pslg(), 31)


def test_size_cap():
    with pytest.raises(RefinementError):
        delaunay_refine([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1), (1, 2), (2, 3), (3, 0)], 25,
                        max_edge=0.01, size_cap=100)


@given(st.integers(0, 10_000))
def test_random_points_meet_target(seed):
    rng = random.Random(seed)
    pts = [(F(rng.randint(1, 63), 64), F(rng.randint(1, 63), 64)) for _ in range(rng.randint(0, 5))]
    m = refine(unit_square_pslg(sorted(set(pts))), 25)
    rep = regularity(m.complex)
    assert rep.min_angle >= 25 - 1e-9
    assert rep.theta_K <= angle_regularity_bound(rep.min_angle)
    # conforming: every input vertex is a mesh vertex
    assert set(m.pslg.vertices) <= set(m.complex.vertices)


def test_localize_without_grid():
    mesh, comp, rep = localize(unit_square_pslg(), None, max_edge=0.3)
    assert comp == list(range(mesh.complex.n_triangles))
    assert rep.min_angle >= 30 - 1e-9 and rep.small_angles_in_tube


def test_sliver_hull_keeps_every_subsegment():
    # the free point sits just outside the quad, so the hull meets a segment at 0.28 degrees
    pts = [(1.0, 0.0), (-0.19946670532226562, 0.9799041748046875), (-0.9471721649169922, 0.3207263946533203),
           (-0.7218465805053711, -0.6920528411865234), (0.10088634490966797, -0.3664207458496094)]
    pslg = PSLG([(F(x), F(y)) for x, y in pts], [(0, 1), (1, 2), (2, 3), (3, 0)], [{0: 1}] * 4)
    mesh, _, rep = localize(pslg, None, target_angle=26.0)
    res = delaunay_refine(with_hull(pslg).vertices, with_hull(pslg).segments, 26.0)
    edges = {frozenset((t[i], t[(i + 1) % 3])) for t in res.triangles for i in range(3)}
    assert all(frozenset(k) in edges for k in res.subsegments)
    assert Chain(mesh.complex, 1, mesh.chain_coeffs(0)).mass() == pytest.approx(float(pslg.length()), rel=1e-12)


def test_orient_filter_sees_rounded_inputs():
    # three exactly collinear points with huge denominators and a tiny spread
    base = (F(1, 3) * F(2 ** 210 + 1, 2 ** 210) / 4, F(2, 7) * F(2 ** 210 - 3, 2 ** 210) / 3)
    d = (F(5, 2 ** 27 * 3), F(7, 2 ** 27 * 11))
    pts = [(base[0] + k * d[0], base[1] + k * d[1]) for k in (0, 1, F(3, 2), F(5, 2))]
    r = DelaunayRefiner([(0, 0), (1, 0), (0, 1)], [])
    idx = [r._add_point(p, False) for p in pts]
    assert r.orient(*idx[:3]) == 0 and r.orient(idx[0], idx[1], idx[3]) == 0
    assert r.incircle(*idx) == 0
