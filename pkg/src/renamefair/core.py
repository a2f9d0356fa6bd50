"""Item universe, orderings, bundles, allocations, and permutations.

Items are 0-indexed internally (``0 .. m-1``).  All file formats and the CLI
use 1-indexed item names and convert at the boundary.  Bundles are bitmasks,
so the global item cap is MAX_ITEMS = 24: subset tables stay desk-scale and a
mask always fits in 32 bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

MAX_ITEMS = 24

# Orderings and permutations are flat arrays with no 2^m structures behind
# them, so the trial engine may use them far beyond the bitmask cap.
MAX_ORDERING_ITEMS = 4096


class SizeError(ValueError):
    """An instance exceeds the supported size for the requested computation."""


class InvariantError(ValueError):
    """A structural invariant of a domain object is violated."""


class UnsupportedError(TypeError):
    """The operation is undefined for this kind of input."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""


def _check_m(m: int) -> None:
    if not 0 <= m <= MAX_ITEMS:
        raise SizeError(f"item count {m} outside supported range 0..{MAX_ITEMS}")


def _check_ordering_m(m: int) -> None:
    if not 0 <= m <= MAX_ORDERING_ITEMS:
        raise SizeError(f"item count {m} outside supported range 0..{MAX_ORDERING_ITEMS}")


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, slots=True)
class ItemSet:
    """An immutable bundle of items, stored as a bitmask over ``0 .. m-1``."""

    mask: int
    m: int

    def __post_init__(self):
        _check_m(self.m)
        if self.mask < 0 or self.mask >> self.m:
            raise InvariantError(f"mask {self.mask:#x} has bits outside 0..{self.m - 1}")

    @classmethod
    def from_items(cls, items: Iterable[int], m: int) -> "ItemSet":
        mask = 0
        for g in items:
            if not 0 <= g < m:
                raise InvariantError(f"item {g} outside 0..{m - 1}")
            mask |= 1 << g
        return cls(mask, m)

    @classmethod
    def full(cls, m: int) -> "ItemSet":
        _check_m(m)
        return cls((1 << m) - 1, m)

    @classmethod
    def empty(cls, m: int) -> "ItemSet":
        return cls(0, m)

    def items(self) -> tuple[int, ...]:
        return tuple(g for g in range(self.m) if (self.mask >> g) & 1)

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(self.items())

    def __contains__(self, g: int) -> bool:
        return 0 <= g < self.m and bool((self.mask >> g) & 1)

    def complement(self) -> "ItemSet":
        return ItemSet(self.mask ^ ((1 << self.m) - 1), self.m)

    def union(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.mask | other.mask, self.m)

    def intersection(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.mask & other.mask, self.m)

    def remove(self, g: int) -> "ItemSet":
        if g not in self:
            raise InvariantError(f"item {g} not in bundle")
        return ItemSet(self.mask & ~(1 << g), self.m)

    def add(self, g: int) -> "ItemSet":
        if not 0 <= g < self.m:
            raise InvariantError(f"item {g} outside 0..{self.m - 1}")
        return ItemSet(self.mask | (1 << g), self.m)


@dataclass(frozen=True, slots=True)
class ItemOrdering:
    """A strict total preference order over m items.

    ``rank[g]`` is the position of item g (0 = most preferred) and
    ``inverse[r]`` is the item at position r; the two arrays are mutually
    inverse bijections.
    """

    rank: tuple[int, ...]
    inverse: tuple[int, ...]

    def __post_init__(self):
        m = len(self.rank)
        _check_ordering_m(m)
        if len(self.inverse) != m:
            raise InvariantError("rank and inverse must have equal length")
        if sorted(self.rank) != list(range(m)):
            raise InvariantError("rank is not a bijection on 0..m-1")
        for g, r in enumerate(self.rank):
            if self.inverse[r] != g:
                raise InvariantError("rank and inverse are not mutually inverse")

    @property
    def m(self) -> int:
        return len(self.rank)

    @classmethod
    def from_preference_list(cls, items: Iterable[int]) -> "ItemOrdering":
        """Build from the items listed best-first."""
        inverse = tuple(items)
        rank = [0] * len(inverse)
        seen = set()
        for r, g in enumerate(inverse):
            if g in seen:
                raise InvariantError(f"item {g} repeated in preference list")
            seen.add(g)
            rank[g] = r
        return cls(tuple(rank), inverse)

    @classmethod
    def identity(cls, m: int) -> "ItemOrdering":
        ids = tuple(range(m))
        return cls(ids, ids)

    def preference_list(self) -> tuple[int, ...]:
        return self.inverse

    def best_of(self, bundle: ItemSet) -> int:
        return kth_best(bundle, self, 1)


@dataclass(frozen=True, slots=True)
class Permutation:
    """A bijection on items; ``images[g]`` is the new name of item g."""

    images: tuple[int, ...]

    def __post_init__(self):
        m = len(self.images)
        _check_ordering_m(m)
        if sorted(self.images) != list(range(m)):
            raise InvariantError("images is not a bijection on 0..m-1")

    @property
    def m(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(m)))

    def __call__(self, g: int) -> int:
        return self.images[g]

    def inverse(self) -> "Permutation":
        inv = [0] * self.m
        for g, h in enumerate(self.images):
            inv[h] = g
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: (self.compose(other))(g) = self(other(g))."""
        return Permutation(tuple(self.images[other.images[g]] for g in range(self.m)))


@dataclass(frozen=True, slots=True)
class Allocation:
    """An ordered n-partition of all m items into per-agent bundles."""

    bundles: tuple[ItemSet, ...]

    def __post_init__(self):
        if not self.bundles:
            raise InvariantError("allocation needs at least one bundle")
        m = self.bundles[0].m
        union = 0
        total = 0
        for b in self.bundles:
            if b.m != m:
                raise InvariantError("bundles disagree on item count")
            union |= b.mask
            total += len(b)
        if union != (1 << m) - 1 or total != m:
            raise InvariantError("bundles must partition all items")

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def m(self) -> int:
        return self.bundles[0].m

    @classmethod
    def from_item_lists(cls, lists: Iterable[Iterable[int]], m: int) -> "Allocation":
        return cls(tuple(ItemSet.from_items(items, m) for items in lists))


def kth_best(bundle: ItemSet, order: ItemOrdering, k: int) -> int:
    """The item of `bundle` with the k'th smallest rank under `order` (k is 1-based)."""
    if k < 1 or k > len(bundle):
        raise IndexError(f"k={k} out of range for bundle of size {len(bundle)}")
    seen = 0
    for r in range(order.m):
        g = order.inverse[r]
        if g in bundle:
            seen += 1
            if seen == k:
                return g
    raise AssertionError("unreachable: bundle smaller than advertised")


def sorted_ranks(bundle: ItemSet, order: ItemOrdering) -> tuple[int, ...]:
    """Ranks of the bundle's items under `order`, ascending (best first)."""
    return tuple(sorted(order.rank[g] for g in bundle))


def sd_dominates(a: ItemSet, b: ItemSet, order: ItemOrdering) -> bool:
    """Whether a weakly stochastically dominates b under `order`.

    True iff |a| >= |b| and, for every k up to |b|, a's k'th best item ranks
    at least as high as b's k'th best item.
    """
    if a.m != b.m:
        raise InvariantError("bundles live over different item universes")
    if len(a) < len(b):
        return False
    ra = sorted_ranks(a, order)
    rb = sorted_ranks(b, order)
    return all(ra[k] <= rb[k] for k in range(len(rb)))


def apply_permutation(bundle: ItemSet, perm: Permutation) -> ItemSet:
    """Image of every item of the bundle under the bijection."""
    mask = 0
    for g in bundle:
        mask |= 1 << perm.images[g]
    return ItemSet(mask, bundle.m)


def permute_ordering(order: ItemOrdering, perm: Permutation) -> ItemOrdering:
    """The ordering after renaming items by `perm` (position r holds perm(old item at r))."""
    return ItemOrdering.from_preference_list(perm.images[g] for g in order.inverse)
