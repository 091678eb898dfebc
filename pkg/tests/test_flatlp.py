import itertools
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatnorm.complex import Chain, Complex2, apply_boundary, boundary_matrix
from flatnorm.flatlp import (FlatLPError, breakpoints, find_threshold, flat_norm_decompose, formulate,
                             simplicial_flat_distance, solve, sweep)
from flatnorm.pipeline import gen_strip

from conftest import random_chain, random_mesh, small_complex


def brute_force(t: Chain, K: Complex2, lam, span=2):
    """Minimum over s in {-span..span}^T of M(t - ds) + lam*M(s), by enumeration."""
    D = boundary_matrix(K, 2).dense().astype(np.int64)
    w = np.array(K.edge_lengths())
    a = np.array([float(x) for x in K.triangle_areas()])
    tv = np.zeros(K.n_edges, dtype=np.int64)
    for e, c in t.coeffs.items():
        tv[e] = c
    best = math.inf
    vals = np.arange(-span, span + 1)
    n = K.n_triangles
    grid = np.array(list(itertools.product(vals, repeat=n)), dtype=np.int64).reshape(-1, n)
    for chunk in np.array_split(grid, max(1, len(grid) // 200_000)):
        x = tv[None, :] - chunk @ D.T
        v = np.abs(x) @ w + float(lam) * (np.abs(chunk) @ a)
        best = min(best, float(v.min()))
    return best


def test_formulation_shape_strip():
    K, P, T = gen_strip(2, 2)
    prob = formulate(P, K, 1)
    assert prob.n_constraints == 10 and prob.n_variables == 28


def test_diagonal_square(square_two):
    K = square_two
    e = K.edge_index[(0, 2)]
    # the diagonal alone: keep it (length sqrt2) or fill a triangle (1 + 1 + 1/2)
    r = flat_norm_decompose(Chain(K, 1, {e: 1}), K, 1)
    assert r.value == pytest.approx(math.sqrt(2))
    assert r.integral and r.residual_ok


def test_unit_square_threshold_exact(square_two):
    K = square_two
    t = apply_boundary(Chain(K, 2, {0: 1, 1: 1}))
    assert flat_norm_decompose(t, K, F(1, 10)).x.is_zero()
    assert flat_norm_decompose(t, K, 100).x == t
    assert find_threshold(t, K, 1, 10) == 4


@given(st.integers(0, 10_000))
def test_matches_brute_force(seed):
    rng = random.Random(seed)
    K = small_complex(rng, n_points=5, size=6)
    t = random_chain(K, rng, 0.4)
    lam = rng.choice([F(1, 2), 1, 3])
    r = flat_norm_decompose(t, K, lam)
    assert r.integral and r.residual_ok
    assert r.value == pytest.approx(brute_force(t, K, lam), abs=1e-9)


@given(st.integers(0, 10_000))
def test_decomposition_properties(seed):
    rng = random.Random(seed)
    K = small_complex(rng, n_points=7, size=10)
    t = random_chain(K, rng, 0.4, values=(-2, -1, 1, 2))
    r = flat_norm_decompose(t, K, 1)
    # x + ds = t, and the value never exceeds M(t)
    assert r.x + apply_boundary(r.s) == t
    assert r.value <= t.mass() + 1e-9
    assert r.mass_x + r.mass_s <= t.mass() + 1e-9


def test_boundary_commutes_with_distance():
    rng = random.Random(2)
    K = random_mesh(rng, 3, 0.4)
    for _ in range(3):
        a, b = random_chain(K, rng, 0.1), random_chain(K, rng, 0.1)
        d1 = simplicial_flat_distance(a, b, K, 1).value
        # the 0-dimensional flat distance of the boundaries is at most d1
        d0 = flat_norm_decompose(apply_boundary(a - b), K, 1).value
        assert d0 <= d1 + 1e-9


def test_highs_and_bland_agree():
    rng = random.Random(8)
    K = random_mesh(rng, 6, 0.2)
    t = random_chain(K, rng, 0.05)
    p = formulate(t, K, 1)
    a, b = solve(p, start="crash"), solve(p, start="highs")
    assert a.value_exact == b.value_exact
    assert a.integral and b.integral


def test_sweep_monotone_and_concave(square_two):
    K = square_two
    t = apply_boundary(Chain(K, 2, {0: 1, 1: 1}))
    rep = sweep(t, K, [F(1, 2), 1, 2, 4, 8])
    assert rep.monotone_value and rep.concave and rep.monotone_mass_s
    assert breakpoints(t, K, 1, 10) == [4]


def test_rejects_fractional_or_foreign_chain(square_two):
    K = square_two
    with pytest.raises(FlatLPError):
        formulate(Chain(K, 1, {0: F(1, 2)}), K)
    other = Complex2([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    with pytest.raises(FlatLPError):
        formulate(Chain(other, 1, {0: 1}), K)
