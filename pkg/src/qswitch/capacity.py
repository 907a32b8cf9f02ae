"""Capacity-region membership through a scaling LP.

For a rate vector lam we solve

    max rho
    s.t. sum_{a != 0} P(a) sum_pi b[a, pi] r_i(a, pi) >= rho * lam_i   for each type i
         sum_pi b[a, pi] <= 1                                        for each state a != 0
         b >= 0, 0 <= rho <= RHO_CAP

where a ranges over link states and pi over maximal matchings. The region
itself is open, so lam is certified interior only when rho* exceeds 1 by
more than the verdict band.
"""

from __future__ import annotations

import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from qswitch.errors import CapacityExceededError, SolverError
from qswitch.matching import Matching, enumerate_maximal
from qswitch.model import Topology
from qswitch.scheduler import mask_to_state, success_vector
from qswitch.simplex import linprog_max

# rho is capped so that zero demand yields a finite optimum
RHO_CAP = 1e6
MAX_LINKS = 12
MAX_TABLEAU_ENTRIES = 20_000_000

PIVOT_TOL = 1e-9
VERDICT_TOL = 1e-6


class Verdict(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    EXTERIOR = "Exterior"


def state_probabilities(link_success: Sequence[float]) -> np.ndarray:
    """P(T = a) for every link-state bitmask a in [0, 2^K)."""
    probs = np.ones(1)
    for p in link_success:
        # new bit is the most significant so far
        probs = np.concatenate([probs * (1.0 - p), probs * p])
    return probs


@dataclass(frozen=True)
class CapacityLP:
    topology: Topology
    rates: tuple[float, ...]
    matchings: tuple[Matching, ...]
    state_probs: np.ndarray
    # (state mask, matching index) for every b variable kept after pruning
    columns: tuple[tuple[int, int], ...]
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray

    @property
    def num_variables(self) -> int:
        return len(self.columns) + 1

    def service_matrix(self) -> np.ndarray:
        """r_i(a, pi) for every kept column, shape (M, columns)."""
        K = self.topology.num_links
        out = np.zeros((self.topology.num_types, len(self.columns)))
        for k, (a, m) in enumerate(self.columns):
            out[:, k] = success_vector(mask_to_state(a, K), self.matchings[m], self.topology)
        return out


@dataclass(frozen=True)
class CapacityResult:
    rho_star: float
    verdict: Verdict
    # {(state mask, matching): b} for nonzero entries only
    witness: dict[tuple[int, Matching], float] = field(default_factory=dict)
    iterations: int = 0


def build_lp(
    topology: Topology,
    rates: Sequence[float],
    matchings: Sequence[Matching] | None = None,
) -> CapacityLP:
    rates = tuple(float(r) for r in rates)
    M, K = topology.num_types, topology.num_links
    if len(rates) != M:
        raise ValueError(f"expected {M} rates, got {len(rates)}")
    if K > MAX_LINKS:
        raise CapacityExceededError(f"capacity LP supports at most {MAX_LINKS} links, got {K}")
    if matchings is None:
        matchings = enumerate_maximal(topology)
    matchings = tuple(tuple(m) for m in matchings)
    probs = state_probabilities(topology.link_success)

    masks = topology.link_masks()
    q = topology.swap_success
    columns = []
    col_service = []
    for a in range(1, 1 << K):
        if probs[a] == 0.0:
            continue
        for k, pi in enumerate(matchings):
            served = [i for i in range(M) if pi[i] and (masks[i] & a) == masks[i] and q[i] > 0]
            if served:
                columns.append((a, k))
                col_service.append(served)

    states = sorted({a for a, _ in columns})
    n = len(columns) + 1
    rows = M + len(states) + 1
    if rows * (n + rows) > MAX_TABLEAU_ENTRIES:
        raise CapacityExceededError(
            f"capacity LP with {rows} rows and {n} variables exceeds the tableau cap"
        )
    A = np.zeros((rows, n))
    b = np.zeros(rows)
    state_row = {a: M + s for s, a in enumerate(states)}
    for k, ((a, _), served) in enumerate(zip(columns, col_service)):
        for i in served:
            A[i, k] = -probs[a] * q[i]
        A[state_row[a], k] = 1.0
    A[:M, -1] = rates
    b[M : M + len(states)] = 1.0
    A[-1, -1] = 1.0
    b[-1] = RHO_CAP
    c = np.zeros(n)
    c[-1] = 1.0
    return CapacityLP(topology, rates, matchings, probs, tuple(columns), c, A, b)


def classify(rho_star: float, band: float = VERDICT_TOL) -> Verdict:
    if rho_star > 1.0 + band:
        return Verdict.INTERIOR
    if rho_star < 1.0 - band:
        return Verdict.EXTERIOR
    return Verdict.BOUNDARY


def solve(lp: CapacityLP, tolerance: float = PIVOT_TOL, band: float = VERDICT_TOL) -> CapacityResult:
    if tolerance <= 0 or band <= 0:
        raise ValueError("tolerances must be positive")
    sol = linprog_max(lp.c, lp.A_ub, lp.b_ub, tol=tolerance)
    rho = float(sol.x[-1])
    residual = lp.A_ub @ sol.x - lp.b_ub
    if residual.max(initial=0.0) > 1e-6:
        raise SolverError(
            f"solution violates constraints by {residual.max():.3g} "
            f"({lp.A_ub.shape[0]} rows, {lp.num_variables} variables)"
        )
    witness = {
        (a, lp.matchings[m]): float(v)
        for (a, m), v in zip(lp.columns, sol.x[:-1])
        if v > 0.0
    }
    return CapacityResult(rho, classify(rho, band), witness, sol.iterations)


def capacity(topology: Topology, rates: Sequence[float], **kwargs) -> CapacityResult:
    return solve(build_lp(topology, rates), **kwargs)


def service_rates(topology: Topology, witness: dict[tuple[int, Matching], float]) -> np.ndarray:
    """Long-run service rate per type achieved by a mixture, recomputed from scratch."""
    K = topology.num_links
    out = np.zeros(topology.num_types)
    for (a, pi), weight in witness.items():
        state = mask_to_state(a, K)
        p_a = 1.0
        for t, p in zip(state, topology.link_success):
            p_a *= p if t else 1.0 - p
        out += p_a * weight * np.asarray(success_vector(state, pi, topology))
    return out


def witness_violation(topology: Topology, rates: Sequence[float], result: CapacityResult) -> float:
    """Largest violation of any LP constraint by the result's witness."""
    worst = 0.0
    totals: dict[int, float] = {}
    for (a, _), weight in result.witness.items():
        worst = max(worst, -weight)
        totals[a] = totals.get(a, 0.0) + weight
    worst = max([worst, *(t - 1.0 for t in totals.values())])
    shortfall = result.rho_star * np.asarray(rates, dtype=float) - service_rates(topology, result.witness)
    return max(worst, float(shortfall.max(initial=0.0)))


SWEEP_FAMILIES = ("p_all", "q_all", "p", "q", "rate_scale")


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter family of instances.

    ``family`` is one of ``p_all`` (every link probability set to the value),
    ``q_all``, ``p`` / ``q`` (a single entry picked by ``index``), or
    ``rate_scale`` (rates multiplied by the value).
    """

    family: str
    grid: tuple[float, ...]
    index: int | None = None
    resolution: float = 1e-4

    def __post_init__(self) -> None:
        if self.family not in SWEEP_FAMILIES:
            raise ValueError(f"unknown sweep family {self.family!r}")
        if self.family in ("p", "q") and self.index is None:
            raise ValueError(f"sweep family {self.family!r} needs an index")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))

    def instance(self, topology: Topology, rates: Sequence[float], value: float):
        if self.family == "p_all":
            return topology.with_link_success([value] * topology.num_links), tuple(rates)
        if self.family == "q_all":
            return topology.with_swap_success([value] * topology.num_types), tuple(rates)
        if self.family == "p":
            p = list(topology.link_success)
            p[self.index] = value
            return topology.with_link_success(p), tuple(rates)
        if self.family == "q":
            q = list(topology.swap_success)
            q[self.index] = value
            return topology.with_swap_success(q), tuple(rates)
        return topology, tuple(value * r for r in rates)


@dataclass(frozen=True)
class SweepRow:
    value: float
    rho_star: float | None
    verdict: Verdict | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    crossing: float | None


def sweep_scalar(
    topology: Topology,
    rates: Sequence[float],
    spec: SweepSpec,
    tolerance: float = PIVOT_TOL,
    band: float = VERDICT_TOL,
    map_fn: Callable = map,
) -> SweepResult:
    """Solve the LP along a parameter grid and locate where rho* crosses 1.

    The crossing is refined by bisection between the first pair of grid
    neighbours whose rho* straddle 1. Per-point solver failures are kept in
    the table and do not stop the sweep.
    """
    matchings = enumerate_maximal(topology)

    def rho_at(value: float) -> float:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            topo, lam = spec.instance(topology, rates, value)
        return solve(build_lp(topo, lam, matchings), tolerance, band).rho_star

    def point(value: float) -> SweepRow:
        try:
            rho = rho_at(value)
        except (SolverError, CapacityExceededError, ValueError) as exc:
            return SweepRow(value, None, None, str(exc))
        return SweepRow(value, rho, classify(rho, band))

    rows = tuple(map_fn(point, spec.grid))
    crossing = None
    for lo, hi in zip(rows, rows[1:]):
        if lo.rho_star is None or hi.rho_star is None:
            continue
        f_lo, f_hi = lo.rho_star - 1.0, hi.rho_star - 1.0
        if f_lo == 0.0:
            crossing = lo.value
            break
        if f_lo * f_hi < 0:
            a, b = lo.value, hi.value
            while abs(b - a) > spec.resolution:
                mid = 0.5 * (a + b)
                f_mid = rho_at(mid) - 1.0
                if f_mid == 0.0:
                    a = b = mid
                elif (f_mid < 0) == (f_lo < 0):
                    a = mid
                else:
                    b = mid
            crossing = 0.5 * (a + b)
            break
    return SweepResult(rows, crossing)
