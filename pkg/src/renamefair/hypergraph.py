"""Preference hypergraphs for two-agent arbitrary valuations.

A valuation with no tie between complementary balanced bundles is captured,
as far as balanced envy-freeness goes, by the (m/2)-uniform hypergraph whose
edges are the balanced bundles strictly preferred to their complements.
Renaming items acts on the hypergraph by permuting vertices; whenever the two
agents' (renamed) hypergraphs differ, splitting along a differing edge is
envy-free, and the failure probability of that construction is governed by
automorphism counts via the orbit-stabilizer identity.

Everything here is deliberately brute force: these functions are the
verification oracles, and the supported sizes make full enumeration cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, factorial

from .core import (
    Allocation,
    InvariantError,
    ItemSet,
    Permutation,
    SizeError,
)
from .valuations import TableValuation, Valuation

AUTOMORPHISM_CAP = 8
ORBIT_CAP = 7
PREFERENCE_BUILD_CAP = 16
BALANCED_EF_CAP = 14
SUBMODULAR_CAP = 12


@dataclass(frozen=True)
class UniformHypergraph:
    """A k-uniform edge set over m vertices; edges are strictly sorted bitmasks."""

    m: int
    k: int
    edges: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.k <= self.m:
            raise InvariantError(f"edge size {self.k} outside 0..{self.m}")
        prev = -1
        for e in self.edges:
            if e <= prev:
                raise InvariantError("edges must be strictly sorted (no duplicates)")
            if e >> self.m or bin(e).count("1") != self.k:
                raise InvariantError(f"edge {e:#x} is not a {self.k}-subset of 0..{self.m - 1}")
            prev = e

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def is_nonempty_noncomplete(self) -> bool:
        return 0 < len(self.edges) < comb(self.m, self.k)

    def edge_sets(self) -> tuple[ItemSet, ...]:
        return tuple(ItemSet(e, self.m) for e in self.edges)


class PreferenceHypergraph(UniformHypergraph):
    """The balanced-preference hypergraph: k = m/2 and exactly one of each
    complementary pair of balanced bundles is an edge."""

    def __post_init__(self):
        super().__post_init__()
        if self.m % 2 or self.k != self.m // 2:
            raise InvariantError("preference hypergraph needs k = m/2 with m even")
        full = (1 << self.m) - 1
        edge_set = set(self.edges)
        if len(edge_set) != comb(self.m, self.k) // 2:
            raise InvariantError("preference hypergraph must orient every complement pair")
        for e in self.edges:
            if (full ^ e) in edge_set:
                raise InvariantError("an edge and its complement cannot both be present")


@dataclass(frozen=True)
class TieWitness:
    """A balanced bundle the valuation values exactly as much as its complement."""

    bundle: ItemSet


@dataclass(frozen=True)
class NoBalancedEF:
    """The two renamed hypergraphs coincide: the balanced edge-difference
    construction yields nothing (other envy-free allocations may still exist)."""


@dataclass(frozen=True)
class TieShortcut:
    """An envy-free allocation obtained directly from a valuation tie."""

    allocation: Allocation


@lru_cache(maxsize=None)
def _balanced_masks(m: int) -> tuple[int, ...]:
    return tuple(
        sum(1 << g for g in items) for items in combinations(range(m), m // 2)
    )


def build_preference_hypergraph(
    v: Valuation, tie_scan: bool = True
) -> PreferenceHypergraph | TieWitness:
    """Orient every complementary pair of balanced bundles by exact comparison.

    Returns the hypergraph, or a TieWitness holding the lexicographically
    smallest tied bundle if any pair ties (the caller can then split along
    the tie).
    """
    m = v.m
    if m % 2:
        raise SizeError(f"balanced bundles need an even item count, got {m}")
    if m > PREFERENCE_BUILD_CAP:
        raise SizeError(f"preference hypergraph build capped at m={PREFERENCE_BUILD_CAP}")
    full = (1 << m) - 1
    values = {mask: v.value_of_mask(mask) for mask in _balanced_masks(m)}
    if tie_scan:
        for mask in _balanced_masks(m):
            if values[mask] == values[full ^ mask]:
                return TieWitness(ItemSet(mask, m))
    edges = sorted(mask for mask, val in values.items() if val > values[full ^ mask])
    return PreferenceHypergraph(m, m // 2, tuple(edges))


def act(h: UniformHypergraph, perm: Permutation) -> UniformHypergraph:
    """The image hypergraph under the vertex permutation."""
    if perm.m != h.m:
        raise InvariantError("permutation size disagrees with hypergraph")
    images = perm.images
    mapped = []
    for e in h.edges:
        out = 0
        g = 0
        while e:
            if e & 1:
                out |= 1 << images[g]
            e >>= 1
            g += 1
        mapped.append(out)
    cls = PreferenceHypergraph if isinstance(h, PreferenceHypergraph) else UniformHypergraph
    return cls(h.m, h.k, tuple(sorted(mapped)))


def _map_edge(e: int, images) -> int:
    out = 0
    g = 0
    while e:
        if e & 1:
            out |= 1 << images[g]
        e >>= 1
        g += 1
    return out


def count_automorphisms(h: UniformHypergraph, cap: int = AUTOMORPHISM_CAP) -> int:
    """|{vertex permutations fixing the edge set}| by full enumeration."""
    if h.m > cap or h.m > AUTOMORPHISM_CAP:
        raise SizeError(f"automorphism enumeration capped at m={AUTOMORPHISM_CAP}, got {h.m}")
    edge_set = frozenset(h.edges)
    count = 0
    for images in permutations(range(h.m)):
        for e in h.edges:
            if _map_edge(e, images) not in edge_set:
                break
        else:
            count += 1
    return count


def orbit_size(h: UniformHypergraph, cap: int = ORBIT_CAP) -> int:
    """Number of distinct images of the edge set under all m! permutations."""
    if h.m > cap or h.m > ORBIT_CAP:
        raise SizeError(f"orbit enumeration capped at m={ORBIT_CAP}, got {h.m}")
    seen = set()
    for images in permutations(range(h.m)):
        seen.add(tuple(sorted(_map_edge(e, images) for e in h.edges)))
    return len(seen)


def automorphism_bound(m: int, k: int) -> Fraction:
    """The proven ceiling m!/(m-k+1) for non-empty, non-complete k-uniform edge sets."""
    return Fraction(factorial(m), m - k + 1)


def enumerate_uniform_hypergraphs(m: int, k: int, proper_only: bool = True):
    """Yield every k-uniform hypergraph on m vertices (optionally skipping the
    empty and complete edge sets, which the automorphism bound excludes)."""
    all_edges = _k_subsets(m, k)
    total = len(all_edges)
    sorted_edges = tuple(sorted(all_edges))
    for code in range(1 << total):
        count = bin(code).count("1")
        if proper_only and (count == 0 or count == total):
            continue
        edges = tuple(e for idx, e in enumerate(sorted_edges) if (code >> idx) & 1)
        yield UniformHypergraph(m, k, edges)


@lru_cache(maxsize=None)
def _k_subsets(m: int, k: int) -> tuple[int, ...]:
    return tuple(sum(1 << g for g in items) for items in combinations(range(m), k))


def balanced_ef_allocation(
    v1: Valuation,
    v2: Valuation,
    perm1: Permutation,
    perm2: Permutation,
) -> Allocation | TieShortcut | NoBalancedEF:
    """The two-agent balanced construction after renaming.

    If either renamed valuation ties some balanced bundle with its complement,
    the tie is split directly: the indifferent agent takes either side and
    the other agent takes the side she weakly prefers (TieShortcut).
    Otherwise, if the two preference hypergraphs differ, a bundle preferred
    by exactly one agent is given to that agent and its complement to the
    other (an envy-free split).   If the hypergraphs coincide, NoBalancedEF.
    """
    m = v1.m
    if v2.m != m:
        raise InvariantError("valuations disagree on item count")
    if m % 2:
        raise SizeError(f"balanced construction needs even m, got {m}")
    if m > BALANCED_EF_CAP:
        raise SizeError(f"balanced construction capped at m={BALANCED_EF_CAP}, got {m}")
    w1 = v1.rename(perm1)
    w2 = v2.rename(perm2)
    masks = _balanced_masks(m)
    full = (1 << m) - 1
    vals1 = {mask: w1.value_of_mask(mask) for mask in masks}
    vals2 = {mask: w2.value_of_mask(mask) for mask in masks}

    for mask in masks:
        if vals1[mask] == vals1[full ^ mask]:
            side, other = ItemSet(mask, m), ItemSet(full ^ mask, m)
            if vals2[mask] >= vals2[full ^ mask]:
                return TieShortcut(Allocation((other, side)))
            return TieShortcut(Allocation((side, other)))
    for mask in masks:
        if vals2[mask] == vals2[full ^ mask]:
            side, other = ItemSet(mask, m), ItemSet(full ^ mask, m)
            if vals1[mask] >= vals1[full ^ mask]:
                return TieShortcut(Allocation((side, other)))
            return TieShortcut(Allocation((other, side)))

    for mask in masks:
        first = vals1[mask] > vals1[full ^ mask]
        second = vals2[mask] > vals2[full ^ mask]
        if first and not second:
            return Allocation((ItemSet(mask, m), ItemSet(full ^ mask, m)))
        if second and not first:
            return Allocation((ItemSet(full ^ mask, m), ItemSet(mask, m)))
    return NoBalancedEF()


def submodular_from_hypergraph(h: PreferenceHypergraph) -> TableValuation:
    """A monotone, submodular table valuation whose preference hypergraph is h.

    v(S) = |S| below the balanced size, m/2 above it, and at the balanced
    size m/2 - 1/4 on edges versus m/2 - 1/2 on non-edges, so every
    complement pair keeps its orientation.
    """
    if not isinstance(h, PreferenceHypergraph):
        raise InvariantError("a complete preference hypergraph is required")
    m = h.m
    if m > SUBMODULAR_CAP:
        raise SizeError(f"table construction capped at m={SUBMODULAR_CAP}, got {m}")
    half = m // 2
    edge_set = frozenset(h.edges)
    values = []
    for mask in range(1 << m):
        size = bin(mask).count("1")
        if size < half:
            values.append(Fraction(size))
        elif size > half:
            values.append(Fraction(half))
        elif mask in edge_set:
            values.append(Fraction(half) - Fraction(1, 4))
        else:
            values.append(Fraction(half) - Fraction(1, 2))
    return TableValuation(values)
