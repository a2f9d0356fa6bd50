"""Fairness predicates: EF, EFX, SD-EF, SD-EFX, and per-position envy events.

Value comparisons are exact rationals; dominance comparisons are pure rank
arithmetic.  The per-position event for a pair (i, j) at position k is "agent
i prefers the k'th best item of j's bundle to the k'th best item of her own"
— the atomic unit the probability experiments count.

Convention: bundle-size mismatches in the SD-EF check are reported as a
violation with the sentinel position k=0 rather than raised, so experiments
where the item count is not divisible by the agent count still get a verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from fractions import Fraction

from .core import Allocation, ItemOrdering, ItemSet, sorted_ranks
from .valuations import Additive, Valuation
from .rng import Stream

EF = "EF"
EFX = "EFX"
SDEF = "SDEF"
SDEFX = "SDEFX"


@dataclass(frozen=True, slots=True)
class Violation:
    """One envy witness: agent i envies agent j under the named criterion.

    For SDEF, k is the failing position (k=0 is the bundle-size sentinel).
    For SDEFX, k is the first failing position for the recorded item g, and g
    is the removal that came closest to rescuing the pair (diagnostic only).
    """

    i: int
    j: int
    kind: str
    k: int | None = None
    item: int | None = None


@dataclass(frozen=True)
class FairnessReport:
    verdict: bool
    violations: tuple[Violation, ...]
    per_k_flags: frozenset[tuple[int, int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        assert self.verdict == (not self.violations)


def _pairs(n: int):
    return ((i, j) for i in range(n) for j in range(n) if i != j)


def check_ef(alloc: Allocation, valuations: Sequence[Valuation]) -> FairnessReport:
    """Envy-freeness: every agent values her bundle at least as much as every other bundle."""
    if len(valuations) != alloc.n:
        raise ValueError("one valuation per agent required")
    violations = []
    own = [valuations[i].evaluate(alloc.bundles[i]) for i in range(alloc.n)]
    for i, j in _pairs(alloc.n):
        if own[i] < valuations[i].evaluate(alloc.bundles[j]):
            violations.append(Violation(i, j, EF))
    return FairnessReport(not violations, tuple(violations))


def check_efx(alloc: Allocation, valuations: Sequence[Valuation]) -> FairnessReport:
    """EFX: removing any single item from j's bundle leaves i envy-free of it."""
    if len(valuations) != alloc.n:
        raise ValueError("one valuation per agent required")
    violations = []
    own = [valuations[i].evaluate(alloc.bundles[i]) for i in range(alloc.n)]
    for i, j in _pairs(alloc.n):
        bj = alloc.bundles[j]
        if len(bj) == 0:
            continue
        for g in bj:
            if own[i] < valuations[i].evaluate(bj.remove(g)):
                violations.append(Violation(i, j, EFX, item=g))
                break
    return FairnessReport(not violations, tuple(violations))


def check_sdef(alloc: Allocation, orders: Sequence[ItemOrdering]) -> FairnessReport:
    """SD-envy-freeness: every agent's bundle stochastically dominates every other bundle.

    Records a violation (i, j, k) for every position k where the envy event
    occurs; unequal bundle sizes yield the k=0 sentinel for that pair.
    """
    if len(orders) != alloc.n:
        raise ValueError("one ordering per agent required")
    violations = []
    flags = set()
    for i, j in _pairs(alloc.n):
        bi, bj = alloc.bundles[i], alloc.bundles[j]
        if len(bi) != len(bj):
            violations.append(Violation(i, j, SDEF, k=0))
            flags.add((i, j, 0))
            continue
        ri = sorted_ranks(bi, orders[i])
        rj = sorted_ranks(bj, orders[i])
        for k in range(len(bi)):
            if rj[k] < ri[k]:
                violations.append(Violation(i, j, SDEF, k=k + 1))
                flags.add((i, j, k + 1))
    return FairnessReport(not violations, tuple(violations), frozenset(flags))


def _sdefx_pair_ok(bi_ranks, bj_ranks_all, order, bj: ItemSet):
    """Check A_i >=sd A_j minus g for *every* g in A_j.

    Returns (ok, g, k, fails) where, on failure, g is the failing removal
    that came closest to being dominated (fewest failing positions) and k is
    its first failing position (0 when the sizes alone decide).
    """
    best = None  # (fail_count, first_fail_k, g) over failing removals
    for g in bj:
        reduced = sorted(r for r in bj_ranks_all if r != order.rank[g])
        if len(bi_ranks) < len(reduced):
            fails = len(reduced) + 1
            first_k = 0
        else:
            failing = [k + 1 for k in range(len(reduced)) if bi_ranks[k] > reduced[k]]
            fails = len(failing)
            first_k = failing[0] if failing else 0
        if fails and (best is None or fails < best[0]):
            best = (fails, first_k, g)
    if best is None:
        return True, None, None, 0
    return False, best[2], best[1], best[0]


def check_sdefx(alloc: Allocation, orders: Sequence[ItemOrdering]) -> FairnessReport:
    """SD-EFX: for every pair (i, j) with A_j nonempty and every item g of
    A_j, A_i must stochastically dominate A_j minus g.

    The verdict follows that universal quantification exactly; the recorded
    (k, g) of a violation is the removal that failed at the fewest positions,
    kept for diagnostics only.
    """
    if len(orders) != alloc.n:
        raise ValueError("one ordering per agent required")
    violations = []
    for i, j in _pairs(alloc.n):
        bj = alloc.bundles[j]
        if len(bj) == 0:
            continue
        bi_ranks = sorted_ranks(alloc.bundles[i], orders[i])
        bj_ranks = sorted_ranks(bj, orders[i])
        ok, g, k, _ = _sdefx_pair_ok(bi_ranks, bj_ranks, orders[i], bj)
        if not ok:
            violations.append(Violation(i, j, SDEFX, k=k, item=g))
    return FairnessReport(not violations, tuple(violations))


def sdef_implies_ef_witness(
    orders: Sequence[ItemOrdering],
    alloc: Allocation,
    stream: Stream,
    samples: int = 100,
    value_bound: int = 10**6,
) -> bool:
    """Sample order-consistent additive valuations and check each one is EF.

    Precondition: `alloc` passes the SD-EF check under `orders`.  Each sample
    draws positive values, sorts them in decreasing order, and assigns them
    down each agent's preference list, which is order-consistent by
    construction.  Returns True when every sampled profile is envy-free.
    """
    report = check_sdef(alloc, orders)
    if not report.verdict:
        raise ValueError("allocation must be SD-EF under the given orders")
    m = alloc.m
    for _ in range(samples):
        profile = []
        for order in orders:
            draws = sorted((stream.next_below(value_bound) + 1 for _ in range(m)), reverse=True)
            values = [Fraction(0)] * m
            for r, val in enumerate(draws):
                values[order.inverse[r]] = Fraction(val)
            profile.append(Additive(values))
        if not check_ef(alloc, profile).verdict:
            return False
    return True


def report_to_dict(report: FairnessReport) -> dict:
    """JSON-ready dict; agents and items converted to 1-indexed names."""
    out = {
        "verdict": report.verdict,
        "violations": [
            {
                "envious": v.i + 1,
                "envied": v.j + 1,
                "kind": v.kind,
                **({"k": v.k} if v.k is not None else {}),
                **({"item": v.item + 1} if v.item is not None else {}),
            }
            for v in report.violations
        ],
    }
    if report.per_k_flags:
        out["per_k_flags"] = sorted([i + 1, j + 1, k] for i, j, k in report.per_k_flags)
    return out
