"""Reduction tree geometry and the latency model that picks its degree.

Slots are numbered by in-order position, which equals arrival rank: the k-th
source to become ready takes slot k, so every slot's first-child subtree is
already streaming when the slot joins. The canonical shape for ``n`` slots
with degree ``d`` puts ``q = (n-1) // d`` slots in each child subtree, with
the remainder ``r = (n-1) % d`` distributed one each to the leftmost
subtrees; in-order numbering then visits the first subtree, the root, and
the remaining subtrees.

The degree is chosen by the transfer-time estimate

    T(1) = n*L + S/B
    T(d) = L*log_d(n) + d*S/B    for d >= 2

evaluated at d in {1, 2, n}; ties go to the smaller degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import NetworkProfile

__all__ = [
    "ReducePlan",
    "estimate_latency",
    "choose_degree",
    "invalidation_bound",
]


def _build(
    start: int,
    size: int,
    degree: int,
    parent: list[int | None],
    children: list[list[int]],
    up: int | None,
) -> int:
    """Lay out a canonical subtree over slots [start, start+size); returns
    the subtree root slot."""
    rest = size - 1
    q, r = divmod(rest, degree)
    sizes = [q + 1] * r + [q] * (degree - r)
    root = start + sizes[0]
    parent[root] = up
    pos = start
    for i, sz in enumerate(sizes):
        if sz:
            sub_root = _build(pos, sz, degree, parent, children, root)
            children[root].append(sub_root)
            pos += sz
        if i == 0:
            pos += 1  # the root slot sits right after its first subtree
    return root


@dataclass(frozen=True, slots=True)
class ReducePlan:
    """Fixed tree over ``num_slots`` in-order slots with downlink ``degree``."""

    num_slots: int
    degree: int
    root: int
    parents: tuple[int | None, ...]
    children: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, num_slots: int, degree: int) -> "ReducePlan":
        if num_slots < 1:
            raise ValueError("num_slots must be >= 1")
        if degree < 1:
            raise ValueError("degree must be >= 1")
        degree = min(degree, max(num_slots - 1, 1))
        parent: list[int | None] = [None] * num_slots
        children: list[list[int]] = [[] for _ in range(num_slots)]
        root = _build(0, num_slots, degree, parent, children, None)
        return cls(
            num_slots=num_slots,
            degree=degree,
            root=root,
            parents=tuple(parent),
            children=tuple(tuple(c) for c in children),
        )

    def ancestors(self, slot: int) -> list[int]:
        """Slots strictly above ``slot``, bottom-up, ending at the root."""
        out: list[int] = []
        cur = self.parents[slot]
        while cur is not None:
            out.append(cur)
            cur = self.parents[cur]
        return out

    def depth(self, slot: int) -> int:
        return len(self.ancestors(slot))

    def height(self) -> int:
        return max(self.depth(s) for s in range(self.num_slots))


def estimate_latency(
    object_bytes: int, num_participants: int, degree: int, profile: NetworkProfile
) -> float:
    """Predicted completion time of a degree-``degree`` collective over
    ``num_participants`` objects of ``object_bytes`` each."""
    n = num_participants
    latency = profile.latency_s
    transfer = object_bytes / profile.bandwidth_Bps
    if n <= 1:
        return latency + transfer
    if degree == 1:
        return n * latency + transfer
    return latency * math.log(n, degree) + degree * transfer


def choose_degree(
    object_bytes: int, num_participants: int, profile: NetworkProfile
) -> int:
    """Smallest degree among {1, 2, n} minimizing the latency estimate."""
    n = num_participants
    if n <= 1:
        return 1
    candidates = sorted({1, 2, n})
    best = candidates[0]
    best_t = estimate_latency(object_bytes, n, best, profile)
    for d in candidates[1:]:
        t = estimate_latency(object_bytes, n, d, profile)
        if t < best_t:
            best, best_t = d, t
    return best


def invalidation_bound(num_slots: int, degree: int) -> int:
    """Maximum slots a single repair may invalidate: the failed slot plus
    its ancestors."""
    if degree == 1:
        return num_slots
    if num_slots <= 1:
        return 1
    return math.ceil(math.log(num_slots, degree)) + 1
