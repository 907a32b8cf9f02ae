import numpy as np
import pytest
from scipy.optimize import linprog

from qswitch.errors import SolverError
from qswitch.simplex import Infeasible, Unbounded, linprog_max


def test_textbook_problem():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
    sol = linprog_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
    np.testing.assert_allclose(sol.x, [2, 6], atol=1e-12)
    assert sol.objective == pytest.approx(36)


def test_beale_cycling_example_terminates():
    # cycles under the largest-coefficient rule; Bland's rule must finish
    c = -np.array([-0.75, 20, -0.5, 6])
    A = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    sol = linprog_max(c, A, [0, 0, 1])
    assert sol.objective == pytest.approx(1.25)


def test_equalities_and_negative_rhs():
    # max x + y, x + y == 3, -x <= -1 (x >= 1), y <= 1
    sol = linprog_max([1, 1], [[-1, 0], [0, 1]], [-1, 1], [[1, 1]], [3])
    assert sol.objective == pytest.approx(3)
    assert sol.x[0] >= 1 - 1e-12


def test_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        linprog_max([1], [[1]], [-1])
    with pytest.raises(Unbounded):
        linprog_max([1, 0], [[-1, 1]], [1])
    assert issubclass(Unbounded, SolverError)


def test_iteration_cap():
    with pytest.raises(SolverError, match="pivots"):
        linprog_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18], max_iter=1)


def test_matches_highs_on_random_lps():
    rng = np.random.default_rng(11)
    for _ in range(200):
        n, m, me = rng.integers(1, 8), rng.integers(1, 8), rng.integers(0, 3)
        A = rng.normal(size=(m, n))
        b = rng.normal(size=m) + 0.5
        Ae = rng.normal(size=(me, n)) if me else None
        be = rng.normal(size=me) if me else None
        c = rng.normal(size=n)
        ref = linprog(-c, A_ub=A, b_ub=b, A_eq=Ae, b_eq=be, bounds=[(0, None)] * n, method="highs")
        if ref.status == 0:
            sol = linprog_max(c, A, b, Ae, be)
            assert sol.objective == pytest.approx(-ref.fun, abs=1e-7)
            assert (A @ sol.x <= b + 1e-7).all()
        elif ref.status == 2:
            with pytest.raises(Infeasible):
                linprog_max(c, A, b, Ae, be)
        elif ref.status == 3:
            with pytest.raises(Unbounded):
                linprog_max(c, A, b, Ae, be)
