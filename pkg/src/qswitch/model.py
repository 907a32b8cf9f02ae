"""Switch topology, arrival processes and the irreducibility check.

Indices are 0-based everywhere in code. Reports that mirror the usual
1-based numbering of links and request types do the shift themselves.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from qswitch.errors import ConfigError


class ArrivalLaw(str, Enum):
    BERNOULLI = "bernoulli"
    POISSON = "poisson"


@dataclass(frozen=True)
class Topology:
    """A star switch with K links and M request types.

    Attributes:
        link_success: per-slot Bell-pair generation probability of each link.
        swap_success: swap success probability of each request type.
        type_links: for each type, the sorted tuple of links it needs.
        user_labels: optional display name per user (one user per link).
    """

    link_success: tuple[float, ...]
    swap_success: tuple[float, ...]
    type_links: tuple[tuple[int, ...], ...]
    user_labels: tuple[str, ...] | None = None
    allow_duplicate_types: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "link_success", tuple(float(x) for x in self.link_success))
        object.__setattr__(self, "swap_success", tuple(float(x) for x in self.swap_success))
        object.__setattr__(
            self, "type_links", tuple(tuple(sorted(set(int(j) for j in ls))) for ls in self.type_links)
        )
        K, M = self.num_links, self.num_types
        if K < 1:
            raise ConfigError("topology needs at least one link", key="links.p")
        if M < 1:
            raise ConfigError("topology needs at least one request type", key="types")
        if len(self.swap_success) != M:
            raise ConfigError(
                f"expected {M} swap probabilities, got {len(self.swap_success)}", key="types[].q"
            )
        for j, p in enumerate(self.link_success):
            if not (0.0 <= p <= 1.0):
                raise ConfigError(f"link {j} probability {p} outside [0, 1]", key="links.p")
        for i, q in enumerate(self.swap_success):
            if not (0.0 <= q <= 1.0):
                raise ConfigError(f"type {i} swap probability {q} outside [0, 1]", key=f"types[{i}].q")
        for i, links in enumerate(self.type_links):
            if not links:
                raise ConfigError(f"type {i} has an empty link set", key=f"types[{i}].links")
            bad = [j for j in links if not 0 <= j < K]
            if bad:
                raise ConfigError(
                    f"type {i} references links {bad} outside [0, {K})", key=f"types[{i}].links"
                )
        if self.user_labels is not None:
            object.__setattr__(self, "user_labels", tuple(str(u) for u in self.user_labels))
            if len(self.user_labels) != K:
                raise ConfigError(
                    f"expected {K} user labels, got {len(self.user_labels)}", key="links.labels"
                )
        dups = self.duplicate_types()
        if dups:
            if not self.allow_duplicate_types:
                raise ConfigError(f"duplicate request types {dups}", key="types")
            warnings.warn(
                f"request types {dups} share link sets and swap probability; "
                "they are kept as distinct queues",
                stacklevel=2,
            )

    @property
    def num_links(self) -> int:
        return len(self.link_success)

    @property
    def num_types(self) -> int:
        return len(self.type_links)

    @property
    def link_types(self) -> tuple[tuple[int, ...], ...]:
        """For each link j, the types that need it (the X_j sets)."""
        users: list[list[int]] = [[] for _ in range(self.num_links)]
        for i, links in enumerate(self.type_links):
            for j in links:
                users[j].append(i)
        return tuple(tuple(u) for u in users)

    @property
    def type_users(self) -> tuple[tuple[str, ...], ...]:
        """User group served by each type, for reporting."""
        labels = self.user_labels or tuple(f"u{j + 1}" for j in range(self.num_links))
        return tuple(tuple(labels[j] for j in links) for links in self.type_links)

    def link_masks(self) -> tuple[int, ...]:
        """Bitmask of each type's link set, bit j set iff link j is needed."""
        return tuple(sum(1 << j for j in links) for links in self.type_links)

    def duplicate_types(self) -> list[tuple[int, int]]:
        seen: dict[tuple, int] = {}
        dups = []
        for i, key in enumerate(zip(self.type_links, self.swap_success)):
            if key in seen:
                dups.append((seen[key], i))
            else:
                seen[key] = i
        return dups

    def with_link_success(self, p) -> Topology:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return Topology(tuple(p), self.swap_success, self.type_links, self.user_labels,
                            self.allow_duplicate_types)

    def with_swap_success(self, q) -> Topology:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return Topology(self.link_success, tuple(q), self.type_links, self.user_labels,
                            self.allow_duplicate_types)

    def to_dict(self) -> dict:
        d: dict = {"links": {"p": list(self.link_success)}}
        if self.user_labels is not None:
            d["links"]["labels"] = list(self.user_labels)
        d["types"] = [{"links": list(ls), "q": q} for ls, q in zip(self.type_links, self.swap_success)]
        return d


@dataclass(frozen=True)
class ArrivalSpec:
    rates: tuple[float, ...]
    distribution: ArrivalLaw = ArrivalLaw.BERNOULLI

    def __post_init__(self) -> None:
        object.__setattr__(self, "rates", tuple(float(x) for x in self.rates))
        object.__setattr__(self, "distribution", ArrivalLaw(self.distribution))
        for i, lam in enumerate(self.rates):
            if not math.isfinite(lam) or lam < 0:
                raise ConfigError(f"arrival rate {lam} of type {i} must be finite and >= 0",
                                  key="arrivals.rates")
            if self.distribution is ArrivalLaw.BERNOULLI and lam > 1:
                raise ConfigError(f"Bernoulli arrival rate {lam} of type {i} exceeds 1",
                                  key="arrivals.rates")

    def scaled(self, factor: float) -> ArrivalSpec:
        return ArrivalSpec(tuple(factor * r for r in self.rates), self.distribution)

    def sample(self, rng: np.random.Generator, slots: int) -> np.ndarray:
        """Draw a (slots, M) integer array of per-slot arrival counts."""
        lam = np.asarray(self.rates)
        if self.distribution is ArrivalLaw.BERNOULLI:
            return (rng.random((slots, lam.size)) < lam).astype(np.int64)
        return rng.poisson(lam, size=(slots, lam.size)).astype(np.int64)

    def to_dict(self) -> dict:
        return {"rates": list(self.rates), "distribution": self.distribution.value}


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    offending_types: tuple[int, ...] = field(default=())

    def describe(self) -> str:
        if self.passed:
            return "ok"
        shown = ", ".join(str(i + 1) for i in self.offending_types)
        return f"types {shown} have positive rate but can never be served"


def validate(topology: Topology, arrivals: ArrivalSpec) -> ValidationReport:
    """Check that every type with positive rate can be served at all.

    A type i with rate > 0 needs q_i > 0 and p_j > 0 on all of its links.
    Any singleton selection extends to a maximal matching, so this is the
    whole condition for some matching and link state to serve it.
    """
    if len(arrivals.rates) != topology.num_types:
        raise ConfigError(
            f"expected {topology.num_types} arrival rates, got {len(arrivals.rates)}",
            key="arrivals.rates",
        )
    offending = []
    for i, lam in enumerate(arrivals.rates):
        if lam <= 0:
            continue
        if topology.swap_success[i] <= 0 or any(
            topology.link_success[j] <= 0 for j in topology.type_links[i]
        ):
            offending.append(i)
    return ValidationReport(passed=not offending, offending_types=tuple(offending))


def figure1_topology(p=(0.7, 0.8, 0.6), q=(0.9, 0.8, 0.7)) -> Topology:
    """Three users; types need {l1,l2}, {l2,l3} and {l1,l2,l3}."""
    return Topology(tuple(p), tuple(q), ((0, 1), (1, 2), (0, 1, 2)), user_labels=("u1", "u2", "u3"))
