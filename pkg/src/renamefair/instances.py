"""Bundled reference instances used by the verification commands and tests."""

from fractions import Fraction

from .core import ItemSet
from .hypergraph import UniformHypergraph
from .valuations import Additive, SingleMinded


def efx_without_sdefx_instance() -> tuple[Additive, Additive]:
    """Four items, two identical additive agents, singleton values
    (4, 1+e, 1, 1-e) with e = 1/8.

    Exactly two EFX allocations exist ({1} vs the rest, in either
    orientation), and no allocation is SD-EFX under the agents' shared item
    order.  Any 0 < e < 1 gives the same structure; a dyadic e keeps the
    arithmetic exact.
    """
    eps = Fraction(1, 8)
    v = Additive((Fraction(4), 1 + eps, Fraction(1), 1 - eps))
    return (v, v)


def star_hypergraph(m: int, center: int = 0) -> UniformHypergraph:
    """All 2-element bundles containing `center` (the two-agent worst case's shape)."""
    edges = sorted((1 << center) | (1 << g) for g in range(m) if g != center)
    return UniformHypergraph(m, 2, tuple(edges))


def single_favorite_valuation(m: int, favorite: int = 0, worth=1) -> SingleMinded:
    """Positive value only for bundles containing one special item.

    With two agents holding this valuation, the balanced edge-difference
    construction fails exactly when the two renamed favorites coincide, which
    happens with probability 1/m.
    """
    return SingleMinded(ItemSet(1 << favorite, m), worth)
