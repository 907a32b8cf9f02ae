"""Maximal matchings of request types onto links.

A matching is a 0/1 tuple over request types in which every link is used by
at most one selected type, and no unselected type can be added without
breaking that. Matchings are kept in a fixed canonical order: lexicographic
with a selected flag ranking ahead of an unselected one, so ``(1, 0, 0)``
precedes ``(0, 1, 0)``. Schedulers break ties by this order.
"""

from __future__ import annotations

import warnings
from collections.abc import Sequence

from qswitch.errors import CapacityExceededError
from qswitch.model import Topology

Matching = tuple[int, ...]

DEFAULT_BUDGET = 2**20
HARD_CAP = 2**26


def canonical_key(flags: Sequence[int]) -> tuple[int, ...]:
    return tuple(1 - f for f in flags)


def is_feasible(flags: Sequence[int], topology: Topology) -> bool:
    """True iff no link is claimed by more than one selected type."""
    if len(flags) != topology.num_types:
        raise ValueError(f"expected {topology.num_types} flags, got {len(flags)}")
    used = 0
    for f, mask in zip(flags, topology.link_masks()):
        if f:
            if used & mask:
                return False
            used |= mask
    return True


def is_maximal(flags: Sequence[int], topology: Topology) -> bool:
    """True iff ``flags`` is feasible and no unselected type can be switched on."""
    if not is_feasible(flags, topology):
        return False
    for r, f in enumerate(flags):
        if not f:
            trial = list(flags)
            trial[r] = 1
            if is_feasible(trial, topology):
                return False
    return True


def enumerate_maximal(
    topology: Topology, budget: int = DEFAULT_BUDGET, hard_cap: int = HARD_CAP
) -> list[Matching]:
    """All maximal matchings in canonical order.

    Branch over types with a running bitmask of used links; a type can only
    be switched on when its links are free. Leaves are then filtered for
    maximality.
    """
    M = topology.num_types
    if 2**M > hard_cap:
        raise CapacityExceededError(
            f"2^{M} candidate selections exceed the enumeration cap of {hard_cap}"
        )
    if 2**M > budget:
        warnings.warn(f"enumerating maximal matchings over 2^{M} selections", stacklevel=2)

    masks = topology.link_masks()
    out: list[Matching] = []
    flags = [0] * M

    def visit(i: int, used: int) -> None:
        if i == M:
            # maximal iff every unselected type collides with a used link
            if all(flags[r] or (masks[r] & used) for r in range(M)):
                out.append(tuple(flags))
            return
        if not masks[i] & used:
            flags[i] = 1
            visit(i + 1, used | masks[i])
            flags[i] = 0
        visit(i + 1, used)

    visit(0, 0)
    return out


def greedy_complete(flags: Sequence[int], topology: Topology) -> Matching:
    """Extend a feasible selection to a maximal one, adding types in index order."""
    masks = topology.link_masks()
    used = 0
    out = list(flags)
    for i, f in enumerate(out):
        if f:
            used |= masks[i]
    for i, mask in enumerate(masks):
        if not out[i] and not used & mask:
            out[i] = 1
            used |= mask
    return tuple(out)
