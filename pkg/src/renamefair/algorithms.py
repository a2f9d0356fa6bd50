"""The two picking procedures, with full pick-by-pick traces.

Round Robin: agents take turns, in cyclic index order, taking their best
remaining item; works for any m (the last round may be partial).

Give-Away Round Robin: first every agent i hands each other agent j (in
ascending j) the *worst* item remaining by i's order, consuming n(n-1)
items; then standard Round Robin distributes the rest.  The give order is
fixed because the two-agent exactness results depend on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Allocation, ItemOrdering, ItemSet, SizeError

ROUND_ROBIN = "RoundRobin"
GIVE_AWAY = "GiveAway"


@dataclass(frozen=True, slots=True)
class Pick:
    """One allocated item: at timestep t, `item` entered `agent`'s bundle.

    For give-away steps, phase is GIVE_AWAY and giver is the agent whose
    order selected the item; for round-robin steps, phase is ROUND_ROBIN and
    giver equals agent.
    """

    t: int
    agent: int
    item: int
    phase: str
    giver: int


@dataclass(frozen=True)
class PickTrace:
    picks: tuple[Pick, ...]
    final: Allocation
    pool_sizes: tuple[int, ...]

    def __post_init__(self):
        m = self.final.m
        assert [p.t for p in self.picks] == list(range(1, m + 1))
        assert len({p.item for p in self.picks}) == m
        assert self.pool_sizes == tuple(range(m, -1, -1))

    @property
    def m(self) -> int:
        return self.final.m

    @property
    def n(self) -> int:
        return self.final.n

    def allocation_after(self, t: int) -> tuple[ItemSet, ...]:
        """Per-agent bundles holding only the first t picks (not a full partition)."""
        masks = [0] * self.n
        for p in self.picks[:t]:
            masks[p.agent] |= 1 << p.item
        return tuple(ItemSet(mask, self.m) for mask in masks)


def _best_remaining(pool_mask: int, order: ItemOrdering) -> int:
    for g in order.inverse:
        if (pool_mask >> g) & 1:
            return g
    raise AssertionError("empty pool")


def _worst_remaining(pool_mask: int, order: ItemOrdering) -> int:
    for g in reversed(order.inverse):
        if (pool_mask >> g) & 1:
            return g
    raise AssertionError("empty pool")


def _finish(picks: list[Pick], bundle_masks: list[int], m: int) -> PickTrace:
    alloc = Allocation(tuple(ItemSet(mask, m) for mask in bundle_masks))
    return PickTrace(tuple(picks), alloc, tuple(range(m, -1, -1)))


def round_robin(orders: Sequence[ItemOrdering], m: int) -> PickTrace:
    """Run Round Robin; agent (t-1) % n + 1 picks at timestep t."""
    n = len(orders)
    if n < 1:
        raise ValueError("need at least one agent")
    pool = (1 << m) - 1
    bundle_masks = [0] * n
    picks: list[Pick] = []
    for t in range(1, m + 1):
        agent = (t - 1) % n
        g = _best_remaining(pool, orders[agent])
        pool &= ~(1 << g)
        bundle_masks[agent] |= 1 << g
        picks.append(Pick(t, agent, g, ROUND_ROBIN, agent))
    return _finish(picks, bundle_masks, m)


def give_away_round_robin(orders: Sequence[ItemOrdering], m: int) -> PickTrace:
    """Run Give-Away Round Robin; requires m >= n(n-1) so Phase 1 completes."""
    n = len(orders)
    if n < 1:
        raise ValueError("need at least one agent")
    if m < n * (n - 1):
        raise SizeError(f"give-away phase needs m >= n(n-1) = {n * (n - 1)}, got {m}")
    pool = (1 << m) - 1
    bundle_masks = [0] * n
    picks: list[Pick] = []
    t = 0
    for giver in range(n):
        for receiver in range(n):
            if receiver == giver:
                continue
            t += 1
            g = _worst_remaining(pool, orders[giver])
            pool &= ~(1 << g)
            bundle_masks[receiver] |= 1 << g
            picks.append(Pick(t, receiver, g, GIVE_AWAY, giver))
    while pool:
        agent = (t - n * (n - 1)) % n
        t += 1
        g = _best_remaining(pool, orders[agent])
        pool &= ~(1 << g)
        bundle_masks[agent] |= 1 << g
        picks.append(Pick(t, agent, g, ROUND_ROBIN, agent))
    return _finish(picks, bundle_masks, m)


def trace_kth_pick(trace: PickTrace, agent: int, k: int) -> int:
    """The k'th chronological round-robin-phase pick of `agent` (1-based k).

    Give-away receipts enter the bundle but do not count as picks here.
    """
    if k < 1:
        raise IndexError(f"k={k} must be positive")
    seen = 0
    for p in trace.picks:
        if p.phase == ROUND_ROBIN and p.agent == agent:
            seen += 1
            if seen == k:
                return p.item
    raise IndexError(f"agent {agent} made only {seen} round-robin picks, k={k}")
