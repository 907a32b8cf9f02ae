"""Per-slot service probabilities and scheduling policies.

Link states are handled in two encodings: a 0/1 tuple over links for the
public functions, and an integer bitmask (bit j set iff link j holds a Bell
pair) inside the simulator's hot loop.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from qswitch.matching import Matching, canonical_key, greedy_complete, is_feasible
from qswitch.model import Topology

POLICIES = ("maxweight", "random", "lqf")


@dataclass(frozen=True)
class PolicyDecision:
    chosen: Matching
    # objective value of every candidate, in the order the candidates were given
    weights: tuple[float, ...]


def state_mask(link_state: Sequence[int]) -> int:
    return sum(1 << j for j, t in enumerate(link_state) if t)


def mask_to_state(mask: int, num_links: int) -> tuple[int, ...]:
    return tuple((mask >> j) & 1 for j in range(num_links))


def success_vector(
    link_state: Sequence[int], matching: Sequence[int], topology: Topology
) -> tuple[float, ...]:
    """Probability that each type is served given the link state and selection.

    r_i is q_i when type i is selected and every link it needs holds a Bell
    pair, and 0 otherwise.
    """
    if len(link_state) != topology.num_links:
        raise ValueError(f"expected {topology.num_links} link flags, got {len(link_state)}")
    if len(matching) != topology.num_types:
        raise ValueError(f"expected {topology.num_types} matching flags, got {len(matching)}")
    return tuple(
        q if pi and all(link_state[j] for j in links) else 0.0
        for pi, q, links in zip(matching, topology.swap_success, topology.type_links)
    )


def _weight(r: Sequence[float], queues: Sequence[int]) -> float:
    w = 0.0
    for ri, qi in zip(r, queues):
        if ri:
            w += ri * qi
    return w


def max_weight(
    link_state: Sequence[int],
    queues: Sequence[int],
    matchings: Sequence[Matching],
    topology: Topology,
) -> PolicyDecision:
    """Pick the matching maximizing sum_i r_i * Q_i.

    Ties go to the canonically smallest maximizer, whatever order
    ``matchings`` comes in.
    """
    if not matchings:
        raise ValueError("max_weight needs at least one candidate matching")
    weights = tuple(
        _weight(success_vector(link_state, pi, topology), queues) for pi in matchings
    )
    best = max(weights)
    chosen = min(
        (pi for pi, w in zip(matchings, weights) if w == best), key=canonical_key
    )
    return PolicyDecision(chosen=tuple(chosen), weights=weights)


def _servable(link_state, queues, matchings, topology) -> list[int]:
    out = []
    for k, pi in enumerate(matchings):
        r = success_vector(link_state, pi, topology)
        if any(ri > 0 and qi > 0 for ri, qi in zip(r, queues)):
            out.append(k)
    return out


def baseline_random(
    link_state: Sequence[int],
    queues: Sequence[int],
    matchings: Sequence[Matching],
    rng: np.random.Generator,
    topology: Topology,
) -> PolicyDecision:
    """Uniform choice among matchings that can serve some waiting request.

    Falls back to a uniform choice over all matchings when none can.
    """
    weights = tuple(
        _weight(success_vector(link_state, pi, topology), queues) for pi in matchings
    )
    support = _servable(link_state, queues, matchings, topology) or list(range(len(matchings)))
    k = support[int(rng.integers(len(support)))]
    return PolicyDecision(chosen=tuple(matchings[k]), weights=weights)


def longest_queue_first(
    link_state: Sequence[int],
    queues: Sequence[int],
    matchings: Sequence[Matching],
    topology: Topology,
) -> PolicyDecision:
    """Greedy by decreasing queue length, then completed to a maximal matching."""
    weights = tuple(
        _weight(success_vector(link_state, pi, topology), queues) for pi in matchings
    )
    masks = topology.link_masks()
    used = 0
    flags = [0] * topology.num_types
    order = sorted(range(topology.num_types), key=lambda i: (-queues[i], i))
    for i in order:
        links_up = all(link_state[j] for j in topology.type_links[i])
        if queues[i] > 0 and links_up and topology.swap_success[i] > 0 and not used & masks[i]:
            flags[i] = 1
            used |= masks[i]
    chosen = greedy_complete(flags, topology)
    assert is_feasible(chosen, topology)
    return PolicyDecision(chosen=chosen, weights=weights)


class Policy:
    """Fast per-slot selector used by the simulator.

    ``select`` takes the link-state bitmask and the current queues and
    returns an index into ``matchings``. Every subclass agrees exactly with
    its public function counterpart above.
    """

    name = ""

    def __init__(self, topology: Topology, matchings: Sequence[Matching]):
        if not matchings:
            raise ValueError("policy needs at least one matching")
        self.topology = topology
        self.matchings = sorted((tuple(m) for m in matchings), key=canonical_key)
        self.index = {m: k for k, m in enumerate(self.matchings)}
        masks = topology.link_masks()
        q = topology.swap_success
        # served[state][k] = [(type, q_type), ...] with nonzero service probability
        self.served: list[list[tuple[int, list[tuple[int, float]]]]] = []
        for state in range(1 << topology.num_links):
            per_state = []
            for k, pi in enumerate(self.matchings):
                s = [
                    (i, q[i])
                    for i in range(topology.num_types)
                    if pi[i] and (masks[i] & state) == masks[i] and q[i] > 0
                ]
                if s:
                    per_state.append((k, s))
            self.served.append(per_state)

    def select(self, state: int, queues: list[int]) -> int:
        raise NotImplementedError

    def decide(self, link_state: Sequence[int], queues: Sequence[int]) -> PolicyDecision:
        k = self.select(state_mask(link_state), list(queues))
        weights = tuple(
            _weight(success_vector(link_state, pi, self.topology), queues)
            for pi in self.matchings
        )
        return PolicyDecision(chosen=self.matchings[k], weights=weights)


class MaxWeightPolicy(Policy):
    name = "maxweight"

    def select(self, state: int, queues: list[int]) -> int:
        best_k, best_w = 0, 0.0
        for k, served in self.served[state]:
            w = 0.0
            for i, qi in served:
                w += qi * queues[i]
            if w > best_w:
                best_k, best_w = k, w
        return best_k


class RandomPolicy(Policy):
    name = "random"

    def __init__(self, topology, matchings, rng: np.random.Generator):
        super().__init__(topology, matchings)
        self.rng = rng

    def select(self, state: int, queues: list[int]) -> int:
        support = [
            k for k, served in self.served[state] if any(queues[i] > 0 for i, _ in served)
        ]
        if support:
            return support[int(self.rng.integers(len(support)))]
        return int(self.rng.integers(len(self.matchings)))


class LongestQueueFirstPolicy(Policy):
    name = "lqf"

    def select(self, state: int, queues: list[int]) -> int:
        link_state = mask_to_state(state, self.topology.num_links)
        chosen = longest_queue_first(link_state, queues, self.matchings, self.topology).chosen
        return self.index[chosen]


def make_policy(
    name: str,
    topology: Topology,
    matchings: Sequence[Matching],
    rng: np.random.Generator | None = None,
) -> Policy:
    if name == "maxweight":
        return MaxWeightPolicy(topology, matchings)
    if name == "random":
        if rng is None:
            raise ValueError("random policy needs an RNG stream")
        return RandomPolicy(topology, matchings, rng)
    if name == "lqf":
        return LongestQueueFirstPolicy(topology, matchings)
    raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICIES)}")
