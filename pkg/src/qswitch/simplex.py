"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Solves ``max c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0``.
Small and exact enough for the capacity LPs this package builds; nothing
here is tuned for large sparse problems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qswitch.errors import SolverError


@dataclass(frozen=True)
class LPSolution:
    x: np.ndarray
    objective: float
    iterations: int


class Unbounded(SolverError):
    pass


class Infeasible(SolverError):
    pass


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0


def _iterate(T, basis, ncols, tol, max_iter, count) -> int:
    """Run Bland's-rule pivots on T (objective in the last row) until optimal.

    Only the first ``ncols`` columns may enter. Returns the updated pivot count.
    """
    m = T.shape[0] - 1
    while True:
        reduced = T[-1, :ncols]
        candidates = np.nonzero(reduced < -tol)[0]
        if candidates.size == 0:
            return count
        col = int(candidates[0])
        column = T[:m, col]
        rows = np.nonzero(column > tol)[0]
        if rows.size == 0:
            raise Unbounded("objective is unbounded")
        ratios = T[rows, -1] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(tied, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        count += 1
        if count > max_iter:
            raise SolverError(
                f"simplex exceeded {max_iter} pivots on a {m} x {ncols} tableau"
            )


def linprog_max(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    tol: float = 1e-9,
    max_iter: int | None = None,
) -> LPSolution:
    """Maximize ``c @ x`` over the polyhedron; raises SolverError subclasses."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    # columns: originals | slacks (one per ub row) | artificials (as needed)
    flip_ub = b_ub < 0
    flip_eq = b_eq < 0
    needs_art = np.concatenate([flip_ub, np.ones(m_eq, dtype=bool)])
    n_art = int(needs_art.sum())
    width = n + m_ub + n_art
    T = np.zeros((m + 1, width + 1))
    T[:m_ub, :n] = A_ub
    T[:m_ub, n : n + m_ub] = np.eye(m_ub)
    T[:m_ub, -1] = b_ub
    T[m_ub:m, :n] = A_eq
    T[m_ub:m, -1] = b_eq
    signs = np.where(np.concatenate([flip_ub, flip_eq]), -1.0, 1.0)
    T[:m] *= signs[:, None]

    basis = np.empty(m, dtype=int)
    art_cols = []
    k = n + m_ub
    for i in range(m):
        if needs_art[i]:
            T[i, k] = 1.0
            basis[i] = k
            art_cols.append(k)
            k += 1
        else:
            basis[i] = n + i

    count = 0
    if n_art:
        # phase 1: minimize the sum of artificials
        T[-1, :] = 0.0
        art_rows = np.nonzero(needs_art)[0]
        T[-1, :] = -T[art_rows].sum(axis=0)
        T[-1, art_cols] = 0.0
        count = _iterate(T, basis, width, tol, max_iter, count)
        if -T[-1, -1] > tol * max(1.0, np.abs(b_ub).sum() + np.abs(b_eq).sum()):
            raise Infeasible("linear program has no feasible point")
        # drive zero-level artificials out of the basis
        keep = np.ones(m, dtype=bool)
        first_art = n + m_ub
        for i in range(m):
            if basis[i] >= first_art:
                nz = np.nonzero(np.abs(T[i, :first_art]) > tol)[0]
                if nz.size:
                    _pivot(T, i, int(nz[0]))
                    basis[i] = int(nz[0])
                else:
                    keep[i] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        basis = basis[keep]
        T = np.hstack([T[:, :first_art], T[:, -1:]])
        width = first_art
        m = T.shape[0] - 1

    # phase 2: minimize -c
    cost = np.zeros(width)
    cost[:n] = -c
    T[-1, :] = 0.0
    T[-1, :width] = cost
    for i in range(m):
        if cost[basis[i]] != 0.0:
            T[-1] -= cost[basis[i]] * T[i]
    count = _iterate(T, basis, width, tol, max_iter, count)

    x_full = np.zeros(width)
    x_full[basis] = T[:m, -1]
    x = x_full[:n]
    x[np.abs(x) < tol * 1e-3] = 0.0
    return LPSolution(x=x, objective=float(c @ x), iterations=count)
