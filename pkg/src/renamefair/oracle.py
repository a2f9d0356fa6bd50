"""Brute-force ground truth: exhaustive existence checks and exact probabilities.

The probability oracle enumerates the pick-sequence tree of a picking
procedure from one designated agent's perspective: that agent's order is
fixed to the identity and her steps are deterministic (best remaining on a
pick, worst remaining on a give-away), while every other agent's step
branches uniformly over the remaining pool.  Path weights are exact
rationals, so an event probability is an exact rational, and the total
weight over all leaves must be exactly 1.

This conditioning is the whole story under random renaming: from the
designated agent's viewpoint the other agents' selections are uniformly
random among the remaining items.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

from .core import Allocation, ItemOrdering, ItemSet, SizeError
from .fairness import check_ef, check_efx, check_sdef, check_sdefx, FairnessReport
from .algorithms import (
    GIVE_AWAY,
    ROUND_ROBIN,
    Pick,
    PickTrace,
)
from .valuations import Valuation

DEFAULT_NODE_BUDGET = 10**7
DEFAULT_WITNESS_CAP = 10_000


# ---------------------------------------------------------------------------
# Exhaustive existence checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExistenceResult:
    exists: bool
    witnesses: tuple[Allocation, ...]
    searched: int
    truncated: bool = False

    def __post_init__(self):
        if not self.truncated:
            assert self.exists == bool(self.witnesses)


_CHECKERS: dict[str, Callable] = {
    "ef": check_ef,
    "efx": check_efx,
    "sdef": check_sdef,
    "sdefx": check_sdefx,
}


def exists_allocation(
    n: int,
    m: int,
    fairness: str,
    valuations: Sequence[Valuation] | None = None,
    orders: Sequence[ItemOrdering] | None = None,
    witness_cap: int = DEFAULT_WITNESS_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ExistenceResult:
    """Search every assignment of the m items to the n agents (empty bundles included)."""
    kind = fairness.lower()
    if kind not in _CHECKERS:
        raise ValueError(f"unknown fairness criterion {fairness!r}")
    if kind in ("ef", "efx"):
        if valuations is None or len(valuations) != n:
            raise ValueError("EF/EFX existence needs one valuation per agent")
        profile = valuations
    else:
        if orders is None or len(orders) != n:
            raise ValueError("SD-EF/SD-EFX existence needs one ordering per agent")
        profile = orders
    if n**m > node_budget:
        raise SizeError(f"{n}^{m} assignments exceed the node budget {node_budget}")
    checker = _CHECKERS[kind]
    witnesses: list[Allocation] = []
    truncated = False
    searched = 0
    exists = False
    for code in range(n**m):
        masks = [0] * n
        rest = code
        for g in range(m):
            masks[rest % n] |= 1 << g
            rest //= n
        alloc = Allocation(tuple(ItemSet(mask, m) for mask in masks))
        searched += 1
        if checker(alloc, profile).verdict:
            exists = True
            if len(witnesses) < witness_cap:
                witnesses.append(alloc)
            else:
                truncated = True
    return ExistenceResult(exists, tuple(witnesses), searched, truncated)


# ---------------------------------------------------------------------------
# Exact event probabilities by weighted pick-sequence enumeration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactProbability:
    value: Fraction
    event_description: str
    enumeration_nodes: int

    def __post_init__(self):
        assert 0 <= self.value <= 1


@dataclass(frozen=True)
class EventSpec:
    """A predicate over complete pick traces, evaluated under one agent's view.

    `agent` is the designated agent (0-based) whose order is the identity and
    whose steps are deterministic; every other step branches uniformly.
    `algorithm` is "rr" or "garr".
    """

    algorithm: str
    agent: int
    predicate: Callable[[PickTrace], bool]
    description: str = ""


def _step_plan(algorithm: str, n: int, m: int) -> list[tuple[str, int, int]]:
    """(phase, actor, receiver) per timestep; actor's order chooses the item."""
    plan: list[tuple[str, int, int]] = []
    if algorithm == "garr":
        if m < n * (n - 1):
            raise SizeError(f"give-away phase needs m >= n(n-1) = {n * (n - 1)}, got {m}")
        for giver in range(n):
            for receiver in range(n):
                if receiver != giver:
                    plan.append((GIVE_AWAY, giver, receiver))
    elif algorithm != "rr":
        raise ValueError(f"unknown algorithm {algorithm!r}")
    t = 0
    while len(plan) < m:
        agent = t % n
        plan.append((ROUND_ROBIN, agent, agent))
        t += 1
    return plan


def exact_event_probability(
    n: int,
    m: int,
    event: EventSpec,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ExactProbability:
    """Exact probability of `event` over the designated-agent pick tree.

    One depth-first traversal accumulates both the event weight and the total
    weight; the total must come out exactly 1, which doubles as a
    total-probability self-check on every query.
    """
    plan = _step_plan(event.algorithm, n, m)
    designated = event.agent
    if not 0 <= designated < n:
        raise ValueError(f"designated agent {designated} outside 0..{n - 1}")
    full = (1 << m) - 1

    nodes = 0
    event_weight = Fraction(0)
    total_weight = Fraction(0)
    items_buf = [0] * m

    def best(pool: int) -> int:
        return (pool & -pool).bit_length() - 1

    def worst(pool: int) -> int:
        return pool.bit_length() - 1

    def descend(depth: int, pool: int, weight: Fraction):
        nonlocal nodes, event_weight, total_weight
        nodes += 1
        if nodes > node_budget:
            raise SizeError(f"enumeration exceeded node budget {node_budget}")
        if depth == m:
            total_weight += weight
            if _evaluate(event, plan, items_buf, n, m):
                event_weight += weight
            return
        phase, actor, _receiver = plan[depth]
        if actor == designated:
            g = worst(pool) if phase == GIVE_AWAY else best(pool)
            items_buf[depth] = g
            descend(depth + 1, pool & ~(1 << g), weight)
        else:
            share = weight / bin(pool).count("1")
            rest = pool
            while rest:
                low = rest & -rest
                g = low.bit_length() - 1
                items_buf[depth] = g
                descend(depth + 1, pool & ~low, share)
                rest ^= low

    descend(0, full, Fraction(1))
    assert total_weight == 1, "path weights must sum to exactly 1"
    return ExactProbability(event_weight, event.description, nodes)


def _evaluate(event: EventSpec, plan, items: list[int], n: int, m: int) -> bool:
    picks = tuple(
        Pick(t + 1, receiver, items[t], phase, actor)
        for t, (phase, actor, receiver) in enumerate(plan)
    )
    masks = [0] * n
    for p in picks:
        masks[p.agent] |= 1 << p.item
    alloc = Allocation(tuple(ItemSet(mask, m) for mask in masks))
    trace = PickTrace(picks, alloc, tuple(range(m, -1, -1)))
    return event.predicate(trace)


# Event constructors.  Items are compared under the designated agent's
# identity order, i.e., a smaller item index is a better item.


def envy_event(algorithm: str, i: int, j: int, k: int) -> EventSpec:
    """Event: agent i prefers the k'th best item of A_j to the k'th best of A_i."""

    def predicate(trace: PickTrace) -> bool:
        bi = sorted(trace.final.bundles[i].items())
        bj = sorted(trace.final.bundles[j].items())
        if len(bi) < k or len(bj) < k:
            return False
        return bj[k - 1] < bi[k - 1]

    return EventSpec(algorithm, i, predicate, f"envy of agent {j + 1} by agent {i + 1} at position {k}")


def not_sdef_for(algorithm: str, i: int) -> EventSpec:
    """Event: some other bundle is not stochastically dominated by agent i's bundle."""

    def predicate(trace: PickTrace) -> bool:
        bi = sorted(trace.final.bundles[i].items())
        for j in range(trace.n):
            if j == i:
                continue
            bj = sorted(trace.final.bundles[j].items())
            if len(bi) < len(bj):
                return True
            if any(bj[k] < bi[k] for k in range(len(bj))):
                return True
        return False

    return EventSpec(algorithm, i, predicate, f"agent {i + 1} fails SD-EF")


def picks_within_top(algorithm: str, observer: int, picker: int, count: int, top: int) -> EventSpec:
    """Event: the picker's first `count` round-robin picks all land in the
    observer's top `top` items (items 0..top-1 under the identity order)."""

    def predicate(trace: PickTrace) -> bool:
        seen = 0
        for p in trace.picks:
            if p.phase == ROUND_ROBIN and p.agent == picker:
                seen += 1
                if p.item >= top:
                    return False
                if seen == count:
                    return True
        return count == 0

    return EventSpec(
        algorithm,
        observer,
        predicate,
        f"first {count} picks of agent {picker + 1} within top {top}",
    )


def last_pick_is(algorithm: str, observer: int, picker: int, item: int) -> EventSpec:
    def predicate(trace: PickTrace) -> bool:
        last = None
        for p in trace.picks:
            if p.phase == ROUND_ROBIN and p.agent == picker:
                last = p.item
        return last == item

    return EventSpec(algorithm, observer, predicate, f"last pick of agent {picker + 1} is item {item + 1}")


def give_event(observer: int, giver: int, receiver: int, item: int) -> EventSpec:
    def predicate(trace: PickTrace) -> bool:
        for p in trace.picks:
            if p.phase == GIVE_AWAY and p.giver == giver and p.agent == receiver:
                if p.item == item:
                    return True
        return False

    return EventSpec(
        "garr",
        observer,
        predicate,
        f"agent {giver + 1} gives item {item + 1} to agent {receiver + 1}",
    )


def threshold_conjunction_event(n: int, i: int, j: int, k: int) -> EventSpec:
    """Event: each of agent j's first k picks is, at pick time, among the top
    (k-l)n+1 items still in the pool (l = 1..k), under agent i's identity order."""

    def predicate(trace: PickTrace) -> bool:
        pool = set(range(trace.m))
        ell = 0
        for p in trace.picks:
            if p.agent == j and p.phase == ROUND_ROBIN:
                ell += 1
                if ell > k:
                    break
                threshold = (k - ell) * n + 1
                better = sum(1 for g in pool if g < p.item)
                if better + 1 > threshold:
                    return False
            pool.discard(p.item)
        return ell >= k

    return EventSpec(
        "rr",
        i,
        predicate,
        f"each of agent {j + 1}'s first {k} picks lands in the shrinking top threshold",
    )


# ---------------------------------------------------------------------------
# Closed forms under test
# ---------------------------------------------------------------------------


def rr_envy_probability_formula(m: int, k: int) -> Fraction:
    """Two agents, m even: exact probability the second picker envies at position k.

    Equals C(2k, k) / 2^(2k) / C(m/2, k); at k = m/2 this is C(m, m/2) / 2^m.
    """
    if m % 2 or not 1 <= k <= m // 2:
        raise ValueError("need even m and 1 <= k <= m/2")
    return Fraction(comb(2 * k, k), 2 ** (2 * k)) / comb(m // 2, k)


def garr_envy_probability_formula(m: int, k: int) -> Fraction:
    """Two agents, m even: exact probability the second picker envies at position k
    under Give-Away Round Robin.

    At k = m/2 the event is exactly "agent 1's give-away hits the observer's
    worst item", with probability 1/m; below that it is
    (1 - (2k-1)/m) * C(2k, k)/2^(2k) / C(m/2 - 1, k).
    """
    if m % 2 or not 1 <= k <= m // 2:
        raise ValueError("need even m and 1 <= k <= m/2")
    if k == m // 2:
        return Fraction(1, m)
    return (1 - Fraction(2 * k - 1, m)) * Fraction(comb(2 * k, k), 2 ** (2 * k)) / comb(m // 2 - 1, k)


def joint_threshold_probability(n: int, q: int, k: int, i: int, j: int) -> ExactProbability:
    """Closed-form probability that each of agent j's first k picks lands in
    the top (k-l)n+1 of the pool, for the adjacent pair j = i-1 (1-based
    agents, m = qn):   prod_{l=1..k} ((k-l)n + 1) / ((q-l)n + n - j + 1).
    """
    if j != i - 1:
        raise ValueError("closed form applies to the adjacent-predecessor pair j = i-1")
    if not (1 <= j < i <= n and 0 <= k <= q):
        raise ValueError("need 1 <= j < i <= n and 0 <= k <= q")
    value = Fraction(1)
    for ell in range(1, k + 1):
        value *= Fraction((k - ell) * n + 1, (q - ell) * n + n - j + 1)
    return ExactProbability(value, f"threshold conjunction n={n} q={q} k={k} i={i} j={j}", 0)


def favorite_collision_probability(n: int, m: int) -> ExactProbability:
    """Exact birthday probability that two of n independent uniform favorites collide."""
    if n < 1 or m < 1:
        raise ValueError("need n, m >= 1")
    miss = Fraction(1)
    for i in range(1, min(n, m + 1)):
        miss *= 1 - Fraction(i, m)
    return ExactProbability(1 - miss, f"favorite-item collision n={n} m={m}", 0)
