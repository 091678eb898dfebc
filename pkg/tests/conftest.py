import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.spatial import Delaunay

from flatnorm.complex import Chain, Complex2
from flatnorm.triangulate import PSLG, refine

settings.register_profile("ci", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def unit_square_pslg(extra=()):
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)] + list(extra)
    return PSLG(pts, [(0, 1), (1, 2), (2, 3), (3, 0)], [{0: 1}] * 4)


def random_mesh(rng: random.Random, n_points=4, max_edge=0.3, angle=25.0):
    extra = [(Fraction(rng.randint(1, 99), 100), Fraction(rng.randint(1, 99), 100)) for _ in range(n_points)]
    return refine(unit_square_pslg(sorted(set(extra))), angle, max_edge=max_edge).complex


def small_complex(rng: random.Random, n_points=6, size=8):
    """Delaunay triangulation of a few random integer points (nondegenerate triangles only)."""
    while True:
        pts = {(rng.randint(0, size), rng.randint(0, size)) for _ in range(n_points)}
        pts = sorted(pts)
        if len(pts) < 3:
            continue
        arr = np.array(pts, dtype=float)
        if np.linalg.matrix_rank(arr[1:] - arr[0]) < 2:
            continue
        tri = Delaunay(arr)
        tris = []
        for a, b, c in tri.simplices.tolist():
            (x0, y0), (x1, y1), (x2, y2) = pts[a], pts[b], pts[c]
            if (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0) != 0:
                tris.append((a, b, c))
        used = sorted({v for t in tris for v in t})
        remap = {v: i for i, v in enumerate(used)}
        return Complex2([pts[v] for v in used], [tuple(remap[v] for v in t) for t in tris])


def random_chain(K: Complex2, rng: random.Random, density=0.3, values=(-1, 1)):
    coeffs = {e: rng.choice(values) for e in range(K.n_edges) if rng.random() < density}
    if not coeffs:
        coeffs = {0: 1}
    return Chain(K, 1, coeffs)


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def square_two():
    """Unit square split along the diagonal (0,0)-(1,1)."""
    return Complex2([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
