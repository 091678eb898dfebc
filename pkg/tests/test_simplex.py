from fractions import Fraction as F

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from flatnorm.simplex import Infeasible, StandardLP, Unbounded, bland_simplex, certify_basis, two_phase


def test_two_phase_small():
    # min x1 + 2 x2  s.t.  -x1 - x2 = -3,  x1 - x2 + x3 = 1
    lp = StandardLP(sp.csc_matrix([[-1, -1, 0], [1, -1, 1]]), [-3, 1], [1, 2, 0])
    r = two_phase(lp)
    assert r.x == [2, 1, 0] and r.value == 4
    # strong duality with the duals of the original rows
    assert sum(b * y for b, y in zip(lp.b, r.y)) == r.value
    A = lp.A.toarray()
    assert all(sum(A[i, j] * r.y[i] for i in range(2)) <= lp.c[j] for j in range(3))


def test_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        two_phase(StandardLP(sp.csc_matrix([[1, 1]]), [-1], [1, 1]))
    with pytest.raises(Unbounded):
        two_phase(StandardLP(sp.csc_matrix([[1, -1]]), [1], [-1, 0]))


@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.lists(st.integers(0, 4), min_size=3, max_size=3),
       st.lists(st.integers(-2, 5), min_size=5, max_size=5))
def test_two_phase_matches_scipy(entries, b, c):
    A = np.hstack([np.array(entries).reshape(3, 2), np.eye(3, dtype=int)])
    lp = StandardLP(sp.csc_matrix(A), b, c)
    from scipy.optimize import linprog
    ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * 5, method="highs")
    try:
        r = two_phase(lp)
    except Unbounded:
        assert ref.status == 3
        return
    assert ref.status == 0
    assert float(r.value) == pytest.approx(ref.fun, abs=1e-9)
    assert all(v >= 0 for v in r.x)
    assert [sum(A[i, j] * r.x[j] for j in range(5)) for i in range(3)] == b


def test_certify_rejects_non_optimal_basis():
    # min -x1 s.t. x1 + x2 = 1; basis {x2} is feasible but not optimal
    lp = StandardLP(sp.csc_matrix([[1, 1]]), [1], [-1, 0])
    assert certify_basis(lp, [1], []) is None
    ok = certify_basis(lp, [0], [])
    assert ok is not None and ok.value == -1
    r = bland_simplex(lp, [1])
    assert r.value == -1 and r.x == [1, 0]
