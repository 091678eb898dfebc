import json
import math
from fractions import Fraction as F

import pytest

from flatnorm.complex import apply_boundary
from flatnorm.flatlp import flat_norm_decompose
from flatnorm.geom import PLCurrent, PLRegion
from flatnorm.pipeline import (ExperimentConfig, convergence_constant, converge_experiment, dilation_check, embed,
                               embed_chains, gen_ngon_disk, gen_strip, ngon_curve, reference_value,
                               spanning_experiment, unit_segment, unit_square_boundary)
from flatnorm.approx import circle


def test_embed_segment_preserves_mass():
    K, (t,) = embed_chains([PLCurrent((((0, 0), (1, 0), 1),))], None, margin=F(1, 4))
    assert t.mass() == pytest.approx(1.0, abs=1e-15)
    assert apply_boundary(t).to_current() == {(1, 0): 1, (0, 0): -1}


def test_embed_region_area_and_crossings():
    T = PLCurrent.from_polyline([(0, 0), (2, 2)]) + PLCurrent.from_polyline([(0, 2), (2, 0)], 3)
    S = PLRegion(((((0, 0), (2, 0), (1, 1)), 1),))
    e = embed([T, S], None, max_edge=1)
    t, s = e.chains
    assert (1, 1) in e.complex.vertices
    assert s.mass() == pytest.approx(1.0)
    assert sum(abs(c) * e.complex.edge_length(i) for i, c in t.coeffs.items()) == pytest.approx(8 * math.sqrt(2))
    assert e.report.small_angles_in_tube


def test_strip_counts_and_ratio():
    K, P, T = gen_strip(2, 2)
    assert (K.n_vertices, K.n_edges, K.n_triangles) == (7, 10, 4)
    assert P.mass() == pytest.approx(8) and T.mass() == pytest.approx(4 * math.sqrt(3))
    r = flat_norm_decompose(P, K, 1)
    assert r.value / T.mass() == pytest.approx(2 / math.sqrt(3), abs=1e-9)
    assert r.x == P and r.s.is_zero()


def test_strip_distance_to_segment_shrinks():
    # filler between P_n and T has area n * (equilateral area) with side 4/n
    areas = []
    for n in (2, 4, 8):
        K, P, T = gen_strip(n, F(4, n))
        from flatnorm.geom import filler_area_bound
        areas.append(float(filler_area_bound(P.to_current(), T)))
    assert areas[0] > areas[1] > areas[2]
    assert areas[2] == pytest.approx(8 * math.sqrt(3) / 4 * (F(4, 8) ** 2), rel=1e-9)


def test_ngon_masses():
    K, t = gen_ngon_disk(8)
    assert t.mass() == pytest.approx(16 * math.sin(math.pi / 8), rel=1e-9)
    r = flat_norm_decompose(t, K, 1)
    assert r.integral and r.value == pytest.approx(min(t.mass(), 2 * math.sqrt(2)), rel=1e-9)


def test_spanning_and_dilation():
    K, (t,) = unit_square_boundary()
    res = spanning_experiment(t, K, [F(1, 10), 1, 100], (1, 10))
    v = res["verdict"]
    assert v["threshold_exact"] == "4" and v["spans_below"] and v["keeps_t_at_top"]
    assert res["rows"][0]["x_zero"] and res["rows"][-1]["x_is_t"]
    for lam in (F(1, 2), 2):
        a, b = dilation_check(t, K, lam)
        assert a == pytest.approx(b, abs=1e-9)


def test_reference_values():
    assert reference_value(circle(), 1) == pytest.approx(math.pi)
    assert reference_value(circle(), F(1, 10)) == pytest.approx(0.1 * math.pi)
    assert reference_value(unit_segment(), 1) == 1
    assert convergence_constant() > 1e7


def test_converge_small(tmp_path):
    cfg = ExperimentConfig(unit_segment(), deltas=[0.2, 0.1], margin=F(1, 4), out=str(tmp_path), name="seg")
    res = converge_experiment(cfg)
    assert [r.value for r in res.rows] == [1.0, 1.0]
    assert res.verdict["ok"]
    data = json.loads((tmp_path / "seg.json").read_text())
    assert data["verdict"]["integral"]
    header = (tmp_path / "seg.csv").read_text().splitlines()[0]
    assert header == "delta,mass_P,value,gap,integral,triangles,min_angle,theta_K,seconds"


def test_converge_rejects_bad_deltas():
    with pytest.raises(ValueError):
        ExperimentConfig(unit_segment(), deltas=[0.1, 0.2])
