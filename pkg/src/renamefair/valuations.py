"""Valuation families, order-consistency checks, and the random-renaming action.

All values are exact rationals (``fractions.Fraction``), so equality of
bundle values — which several constructions hinge on — is decidable.

Renaming a valuation by a bijection sigma produces the valuation whose value
on a bundle S is the base value of the preimage sigma^{-1}(S).  For every
family, :func:`rename` materializes the result in the same family (permuted
value array / permuted target / permuted table), so induced orderings keep
working after renaming; the preimage identity is covered by property tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    ItemSet,
    ItemOrdering,
    Permutation,
    SizeError,
    UnsupportedError,
    InvariantError,
    sd_dominates,
)
from .rng import Stream


class Valuation:
    """Base class: a set function over bundles of m items."""

    m: int

    def evaluate(self, bundle: ItemSet) -> Fraction:
        raise NotImplementedError

    def value_of_mask(self, mask: int) -> Fraction:
        """Evaluate a raw bitmask (hot path used by enumeration loops)."""
        return self.evaluate(ItemSet(mask, self.m))

    def rename(self, perm: Permutation) -> "Valuation":
        raise NotImplementedError


def _as_fractions(values: Sequence) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in values)


def _check_nonnegative(values: Sequence[Fraction], family: str) -> None:
    if any(v < 0 for v in values):
        raise InvariantError(f"{family} item values must be non-negative")


@dataclass(frozen=True)
class Additive(Valuation):
    values: tuple[Fraction, ...]

    def __init__(self, values: Sequence):
        object.__setattr__(self, "values", _as_fractions(values))
        _check_nonnegative(self.values, "additive")

    @property
    def m(self) -> int:
        return len(self.values)

    def evaluate(self, bundle: ItemSet) -> Fraction:
        return sum((self.values[g] for g in bundle), Fraction(0))

    def value_of_mask(self, mask: int) -> Fraction:
        total = Fraction(0)
        values = self.values
        g = 0
        while mask:
            if mask & 1:
                total += values[g]
            mask >>= 1
            g += 1
        return total

    def rename(self, perm: Permutation) -> "Additive":
        return Additive(_permute_values(self.values, perm))


@dataclass(frozen=True)
class UnitDemand(Valuation):
    values: tuple[Fraction, ...]

    def __init__(self, values: Sequence):
        object.__setattr__(self, "values", _as_fractions(values))
        _check_nonnegative(self.values, "unit-demand")

    @property
    def m(self) -> int:
        return len(self.values)

    def evaluate(self, bundle: ItemSet) -> Fraction:
        return max((self.values[g] for g in bundle), default=Fraction(0))

    def rename(self, perm: Permutation) -> "UnitDemand":
        return UnitDemand(_permute_values(self.values, perm))


@dataclass(frozen=True)
class BudgetAdditive(Valuation):
    values: tuple[Fraction, ...]
    budget: Fraction

    def __init__(self, values: Sequence, budget):
        object.__setattr__(self, "values", _as_fractions(values))
        object.__setattr__(self, "budget", Fraction(budget))
        _check_nonnegative(self.values, "budget-additive")
        if self.budget < 0:
            raise InvariantError("budget must be non-negative")

    @property
    def m(self) -> int:
        return len(self.values)

    def evaluate(self, bundle: ItemSet) -> Fraction:
        return min(self.budget, sum((self.values[g] for g in bundle), Fraction(0)))

    def rename(self, perm: Permutation) -> "BudgetAdditive":
        return BudgetAdditive(_permute_values(self.values, perm), self.budget)


@dataclass(frozen=True)
class SingleMinded(Valuation):
    target: ItemSet
    worth: Fraction

    def __init__(self, target: ItemSet, worth):
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "worth", Fraction(worth))
        if len(target) == 0:
            raise InvariantError("single-minded target must be nonempty")
        if self.worth <= 0:
            raise InvariantError("single-minded worth must be positive")

    @property
    def m(self) -> int:
        return self.target.m

    def evaluate(self, bundle: ItemSet) -> Fraction:
        return self.worth if (bundle.mask & self.target.mask) == self.target.mask else Fraction(0)

    def value_of_mask(self, mask: int) -> Fraction:
        return self.worth if (mask & self.target.mask) == self.target.mask else Fraction(0)

    def rename(self, perm: Permutation) -> "SingleMinded":
        from .core import apply_permutation

        return SingleMinded(apply_permutation(self.target, perm), self.worth)


@dataclass(frozen=True)
class TableValuation(Valuation):
    """An explicit set function: values[mask] for every one of the 2^m bundles.

    Entries may be negative or non-monotone; nothing is promised beyond what
    the table says.
    """

    values: tuple[Fraction, ...]

    def __init__(self, values: Sequence):
        vals = _as_fractions(values)
        size = len(vals)
        if size == 0 or size & (size - 1):
            raise InvariantError("table length must be a power of two")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.values).bit_length() - 1

    def evaluate(self, bundle: ItemSet) -> Fraction:
        return self.values[bundle.mask]

    def value_of_mask(self, mask: int) -> Fraction:
        return self.values[mask]

    def rename(self, perm: Permutation) -> "TableValuation":
        inv = perm.inverse()
        m = self.m
        new_values = [Fraction(0)] * (1 << m)
        for mask in range(1 << m):
            pre = 0
            rest = mask
            g = 0
            while rest:
                if rest & 1:
                    pre |= 1 << inv.images[g]
                rest >>= 1
                g += 1
            new_values[mask] = self.values[pre]
        return TableValuation(new_values)


def _permute_values(values: tuple[Fraction, ...], perm: Permutation) -> list[Fraction]:
    """Value array after renaming: new item perm(g) inherits the value of g."""
    out = [Fraction(0)] * len(values)
    for g, v in enumerate(values):
        out[perm.images[g]] = v
    return out


STRUCTURED_FAMILIES = (Additive, UnitDemand, BudgetAdditive, SingleMinded)


def evaluate(v: Valuation, bundle: ItemSet) -> Fraction:
    return v.evaluate(bundle)


def rename(v: Valuation, perm: Permutation) -> Valuation:
    """The valuation after renaming items by `perm`: value(S) = v(preimage of S)."""
    if perm.m != v.m:
        raise InvariantError("permutation size disagrees with valuation")
    return v.rename(perm)


def induced_ordering(v: Valuation) -> ItemOrdering:
    """A strict item order the valuation is consistent with.

    Additive / unit-demand / budget-additive: decreasing singleton value,
    ties broken by ascending item index.  Single-minded: target items first
    (ascending index), then the rest (ascending index).  Table valuations
    have no canonical order.
    """
    if isinstance(v, SingleMinded):
        inside = [g for g in range(v.m) if g in v.target]
        outside = [g for g in range(v.m) if g not in v.target]
        return ItemOrdering.from_preference_list(inside + outside)
    if isinstance(v, (Additive, UnitDemand, BudgetAdditive)):
        singles = [v.evaluate(ItemSet(1 << g, v.m)) for g in range(v.m)]
        order = sorted(range(v.m), key=lambda g: (-singles[g], g))
        return ItemOrdering.from_preference_list(order)
    raise UnsupportedError(f"no canonical ordering for {type(v).__name__}")


_ORDER_CONSISTENCY_CAP = 12


def is_order_consistent(v: Valuation, order: ItemOrdering, max_m: int = _ORDER_CONSISTENCY_CAP) -> bool:
    """Exhaustively test: every dominance A >=sd B implies value(A) >= value(B).

    Runs over all pairs of the 2^m bundles, so m is capped (default 12).
    """
    m = v.m
    if m > max_m or m > _ORDER_CONSISTENCY_CAP:
        raise SizeError(f"order-consistency check capped at m={_ORDER_CONSISTENCY_CAP}, got {m}")
    by_size: dict[int, list[tuple[tuple[int, ...], Fraction]]] = {s: [] for s in range(m + 1)}
    for mask in range(1 << m):
        ranks = tuple(sorted(order.rank[g] for g in range(m) if (mask >> g) & 1))
        by_size[len(ranks)].append((ranks, v.value_of_mask(mask)))
    for size_a in range(m + 1):
        for size_b in range(size_a + 1):
            for ranks_a, val_a in by_size[size_a]:
                for ranks_b, val_b in by_size[size_b]:
                    if val_a >= val_b:
                        continue
                    if all(ranks_a[k] <= ranks_b[k] for k in range(size_b)):
                        return False
    return True


def sample_uniform_permutation(m: int, stream: Stream) -> Permutation:
    """Uniform bijection on 0..m-1 via the descending Fisher-Yates shuffle."""
    images = list(range(m))
    for j in range(m - 1, 0, -1):
        r = stream.next_below(j + 1)
        images[j], images[r] = images[r], images[j]
    return Permutation(tuple(images))
