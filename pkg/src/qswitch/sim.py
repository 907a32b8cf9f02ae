"""Discrete-time switch simulation.

Each slot: link states T(n) and swap outcomes Z(n) are drawn, the policy
picks a maximal matching W(n) from T(n) and Q(n), departures follow

    D_i(n) = Z_i(n) 1{W_i(n) = 1} 1{Q_i(n) > 0} 1{T_j(n) = 1 for all j in L_i}

and Q(n+1) = Q(n) - D(n) + A(n). Arrivals of slot n only count from slot n+1.

Randomness comes from one master seed split with ``numpy.random.SeedSequence``
into four child streams, spawned in this order: arrivals, link generation,
swap outcomes, policy. Z(n) is drawn for every type every slot so that the
environment streams stay aligned whichever policy runs.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from qswitch.errors import QueueOverflowError
from qswitch.matching import Matching, enumerate_maximal, is_feasible
from qswitch.model import ArrivalSpec, Topology, validate
from qswitch.scheduler import Policy, PolicyDecision, make_policy, mask_to_state, state_mask

INT64_MAX = 2**63 - 1
CHUNK = 1 << 16


@dataclass(frozen=True)
class SwitchState:
    queues: tuple[int, ...]
    slot: int = 0

    def __post_init__(self) -> None:
        if any(q < 0 for q in self.queues):
            raise ValueError("queue lengths must be nonnegative")


@dataclass(frozen=True)
class SlotSample:
    link_state: tuple[int, ...]
    swap_outcomes: tuple[int, ...]
    arrivals: tuple[int, ...]


def step(
    state: SwitchState, sample: SlotSample, decision: PolicyDecision | Matching, topology: Topology
) -> tuple[SwitchState, tuple[int, ...]]:
    """Advance one slot. Returns the new state and the departure vector."""
    chosen = decision.chosen if isinstance(decision, PolicyDecision) else tuple(decision)
    M = topology.num_types
    if not (len(state.queues) == len(chosen) == len(sample.swap_outcomes) == len(sample.arrivals) == M):
        raise ValueError(f"per-type vectors must have length {M}")
    if len(sample.link_state) != topology.num_links:
        raise ValueError(f"link state must have length {topology.num_links}")
    departures = tuple(
        int(
            bool(z)
            and w > 0
            and q > 0
            and all(sample.link_state[j] > 0 for j in links)
        )
        for z, w, q, links in zip(sample.swap_outcomes, chosen, state.queues, topology.type_links)
    )
    queues = tuple(q - d + a for q, d, a in zip(state.queues, departures, sample.arrivals))
    return SwitchState(queues, state.slot + 1), departures


@dataclass(frozen=True)
class SimOptions:
    """Knobs for ``run``.

    queue_stride: record Q(n) and cumulative departures every this many
        slots (0 disables the series).
    drift_capacity: cap on stored drift samples; when reached, every other
        sample is dropped and the recording stride doubles.
    """

    initial_queues: tuple[int, ...] | None = None
    queue_stride: int = 0
    drift_capacity: int = 1_000_000
    record_drift: bool = True
    record_departures: bool = False
    check_invariants: bool = False


@dataclass
class SimTrace:
    horizon: int
    seed: int
    policy: str
    arrival_law: str
    # qbar_series[n] is the mean queue at the start of slot n + 1
    qbar_series: np.ndarray
    cumulative_departures: np.ndarray
    cumulative_arrivals: np.ndarray
    initial_queues: np.ndarray
    final_queues: np.ndarray
    queue_slots: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    queue_series: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    cumdep_series: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.int64))
    drift_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    drift_deltas: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    drift_stride: int = 1
    departures: np.ndarray | None = None

    @property
    def mean_qbar(self) -> float:
        return float(self.qbar_series.mean())

    @property
    def mean_qbar_first_half(self) -> float:
        return float(self.qbar_series[: self.horizon // 2].mean())

    @property
    def mean_qbar_second_half(self) -> float:
        return float(self.qbar_series[self.horizon // 2 :].mean())

    @property
    def departure_rates(self) -> np.ndarray:
        return self.cumulative_departures / self.horizon

    def qbar_at(self, n: int) -> float:
        """Mean queue at the start of slot n, for 1 <= n <= horizon."""
        return float(self.qbar_series[n - 1])


def spawn_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Arrival, link, swap and policy generators derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(4)
    return tuple(np.random.default_rng(s) for s in children)


def draw_chunk(
    topology: Topology, arrivals: ArrivalSpec, streams, slots: int
) -> tuple[list[int], list[int], list[list[int]]]:
    """Draw ``slots`` slots of environment randomness.

    Returns link-state bitmasks, swap-outcome bitmasks and arrival counts.
    """
    rng_arr, rng_link, rng_swap = streams[:3]
    K, M = topology.num_links, topology.num_types
    link_bits = rng_link.random((slots, K)) < np.asarray(topology.link_success)
    swap_bits = rng_swap.random((slots, M)) < np.asarray(topology.swap_success)
    a = arrivals.sample(rng_arr, slots)
    states = (link_bits.astype(np.int64) @ (1 << np.arange(K, dtype=np.int64))).tolist()
    swaps = (swap_bits.astype(np.int64) @ (1 << np.arange(M, dtype=np.int64))).tolist()
    return states, swaps, a.tolist()


def iter_samples(topology: Topology, arrivals: ArrivalSpec, seed: int, horizon: int):
    """Yield the same SlotSample sequence that ``run`` consumes for this seed."""
    streams = spawn_streams(seed)
    K, M = topology.num_links, topology.num_types
    done = 0
    while done < horizon:
        n = min(CHUNK, horizon - done)
        states, swaps, arr = draw_chunk(topology, arrivals, streams, n)
        for s, z, a in zip(states, swaps, arr):
            yield SlotSample(mask_to_state(s, K), mask_to_state(z, M), tuple(a))
        done += n


def run(
    topology: Topology,
    arrivals: ArrivalSpec,
    policy: str = "maxweight",
    horizon: int = 1_000_000,
    seed: int = 0,
    options: SimOptions | None = None,
    matchings: Sequence[Matching] | None = None,
) -> SimTrace:
    """Simulate ``horizon`` slots and return the trace.

    Identical inputs and seed give bit-identical traces.
    """
    options = options or SimOptions()
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    report = validate(topology, arrivals)
    if not report.passed:
        raise ValueError(f"configuration fails the service check: {report.describe()}")
    M = topology.num_types
    if matchings is None:
        matchings = enumerate_maximal(topology)
    streams = spawn_streams(seed)
    pol: Policy = make_policy(policy, topology, matchings, rng=streams[3])
    select = pol.select

    # serve[state][k]: types selected by matching k whose links are all up
    masks = topology.link_masks()
    serve = [
        [
            [i for i in range(M) if pi[i] and (masks[i] & s) == masks[i]]
            for pi in pol.matchings
        ]
        for s in range(1 << topology.num_links)
    ]

    Q = list(options.initial_queues) if options.initial_queues is not None else [0] * M
    if len(Q) != M or any(q < 0 for q in Q):
        raise ValueError(f"initial queues must be {M} nonnegative integers")
    Q0 = np.array(Q, dtype=np.int64)
    cumdep = [0] * M
    cumarr = [0] * M
    qsum = np.empty(horizon, dtype=np.int64)

    stride_q = options.queue_stride
    q_slots: list[int] = []
    q_rows: list[list[int]] = []
    d_rows: list[list[int]] = []

    record_drift = options.record_drift
    cap = max(2, options.drift_capacity)
    d_norm: list[float] = []
    d_delta: list[int] = []
    d_stride = 1
    dep_log = np.zeros((horizon, M), dtype=np.int8) if options.record_departures else None
    check = options.check_invariants
    types = range(M)

    V = sum(x * x for x in Q)
    n = 0
    while n < horizon:
        size = min(CHUNK, horizon - n)
        states, swaps, arr = draw_chunk(topology, arrivals, streams, size)
        for t in range(size):
            s = states[t]
            k = select(s, Q)
            z = swaps[t]
            for i in serve[s][k]:
                if Q[i] > 0 and (z >> i) & 1:
                    Q[i] -= 1
                    cumdep[i] += 1
                    if dep_log is not None:
                        dep_log[n, i] = 1
            a = arr[t]
            for i in types:
                if a[i]:
                    Q[i] += a[i]
                    cumarr[i] += a[i]
            total = sum(Q)
            qsum[n] = total
            if record_drift:
                V_next = sum(x * x for x in Q)
                if n % d_stride == 0:
                    d_norm.append(math.sqrt(V))
                    d_delta.append(V_next - V)
                    if len(d_norm) >= cap:
                        d_norm = d_norm[::2]
                        d_delta = d_delta[::2]
                        d_stride *= 2
                V = V_next
            if check:
                chosen = pol.matchings[k]
                assert is_feasible(chosen, topology)
                assert all(q >= 0 for q in Q)
                assert all(cumdep[i] <= cumarr[i] + Q0[i] for i in types)
            n += 1
            if stride_q and n % stride_q == 0:
                q_slots.append(n)
                q_rows.append(list(Q))
                d_rows.append(list(cumdep))
        if max(Q) > INT64_MAX:
            raise QueueOverflowError(
                f"queue counter exceeded 2^63-1 by slot {n}; the configuration is wildly unstable"
            )

    return SimTrace(
        horizon=horizon,
        seed=seed,
        policy=pol.name,
        arrival_law=arrivals.distribution.value,
        qbar_series=qsum / M,
        cumulative_departures=np.array(cumdep, dtype=np.int64),
        cumulative_arrivals=np.array(cumarr, dtype=np.int64),
        initial_queues=Q0,
        final_queues=np.array(Q, dtype=np.int64),
        queue_slots=np.array(q_slots, dtype=np.int64),
        queue_series=np.array(q_rows, dtype=np.int64).reshape(-1, M),
        cumdep_series=np.array(d_rows, dtype=np.int64).reshape(-1, M),
        drift_norms=np.array(d_norm, dtype=float),
        drift_deltas=np.array(d_delta, dtype=np.int64),
        drift_stride=d_stride,
        departures=dep_log,
    )


def run_reference(
    topology: Topology,
    arrivals: ArrivalSpec,
    policy: str,
    horizon: int,
    seed: int,
    initial_queues: Sequence[int] | None = None,
) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """Slow slot-by-slot replay through ``step`` and ``Policy.decide``.

    Returns the queue vectors Q(1..horizon) and departure vectors D(0..horizon-1).
    Shares the random streams with ``run`` so the two can be compared.
    """
    matchings = enumerate_maximal(topology)
    streams = spawn_streams(seed)
    pol = make_policy(policy, topology, matchings, rng=streams[3])
    state = SwitchState(tuple(initial_queues) if initial_queues else (0,) * topology.num_types)
    queues, deps = [], []
    # environment streams are consumed through iter_samples' own copy
    for sample in iter_samples(topology, arrivals, seed, horizon):
        decision = pol.decide(sample.link_state, state.queues)
        state, d = step(state, sample, decision, topology)
        queues.append(state.queues)
        deps.append(d)
    return queues, deps


@dataclass(frozen=True)
class DriftBin:
    norm_lo: float
    norm_hi: float
    count: int
    mean_drift: float


def drift_summary(
    trace: SimTrace, bins: int = 10, lower: float | None = None, method: str = "quantile"
) -> list[DriftBin]:
    """Conditional mean of V(Q(n+1)) - V(Q(n)) binned by ||Q(n)||.

    ``method="quantile"`` uses equal-count bins, ``"width"`` equal-width
    ones. Only samples with norm >= ``lower`` are binned when it is given.
    Empty bins are left out rather than reported as zero.
    """
    if trace.drift_norms.size == 0:
        raise ValueError("trace carries no drift samples")
    if bins < 1:
        raise ValueError("bins must be positive")
    norms = trace.drift_norms
    deltas = trace.drift_deltas.astype(float)
    if lower is not None:
        keep = norms >= lower
        norms, deltas = norms[keep], deltas[keep]
        if norms.size == 0:
            return []
    lo, hi = float(norms.min()), float(norms.max())
    if lo == hi:
        return [DriftBin(lo, hi, int(norms.size), float(deltas.mean()))]
    if method == "quantile":
        edges = np.unique(np.quantile(norms, np.linspace(0.0, 1.0, bins + 1)))
    elif method == "width":
        edges = np.linspace(lo, hi, bins + 1)
    else:
        raise ValueError(f"unknown binning method {method!r}")
    idx = np.clip(np.searchsorted(edges, norms, side="right") - 1, 0, edges.size - 2)
    out = []
    for b in range(edges.size - 1):
        sel = idx == b
        count = int(sel.sum())
        if count:
            out.append(DriftBin(float(edges[b]), float(edges[b + 1]), count, float(deltas[sel].mean())))
    return out
