"""Exhaustive existence and exact enumeration probabilities.

Expected values here come from three independent sources that must agree:
closed-form expressions (big-integer binomials), the weighted enumeration of
pick trees, and — for the smallest cases — hand unrollings.
"""

from fractions import Fraction
from math import comb

import pytest

from renamefair.core import ItemOrdering
from renamefair.instances import efx_without_sdefx_instance
from renamefair.oracle import (
    EventSpec,
    envy_event,
    exact_event_probability,
    exists_allocation,
    favorite_collision_probability,
    garr_envy_probability_formula,
    give_event,
    joint_threshold_probability,
    last_pick_is,
    not_sdef_for,
    picks_within_top,
    rr_envy_probability_formula,
    threshold_conjunction_event,
)
from renamefair.valuations import Additive, UnitDemand, induced_ordering

F = Fraction


class TestExistence:
    def test_hard_instance_exactly_two_efx(self):
        vs = list(efx_without_sdefx_instance())
        result = exists_allocation(2, 4, "efx", valuations=vs)
        assert result.exists and len(result.witnesses) == 2
        found = {tuple(tuple(sorted(b.items())) for b in w.bundles) for w in result.witnesses}
        assert found == {((0,), (1, 2, 3)), ((1, 2, 3), (0,))}

    def test_hard_instance_no_sdefx(self):
        vs = list(efx_without_sdefx_instance())
        orders = [induced_ordering(v) for v in vs]
        result = exists_allocation(2, 4, "sdefx", orders=orders)
        assert not result.exists and result.searched == 2**4

    @pytest.mark.parametrize("m", [4, 5, 6])
    def test_favorite_collision_kills_sdefx(self, m):
        # shared favorite item with m >= 2n: no allocation can be SD-EFX
        orders = [
            ItemOrdering.identity(m),
            ItemOrdering.from_preference_list([0] + list(range(m - 1, 0, -1))),
        ]
        assert not exists_allocation(2, m, "sdefx", orders=orders).exists

    def test_unit_demand_shared_favorite_kills_ef(self):
        values = [5, 2, 1, 1]
        v = UnitDemand(values)
        assert not exists_allocation(2, 4, "ef", valuations=[v, v]).exists

    def test_ef_witnesses_superset_of_sdef(self):
        orders = [ItemOrdering.identity(4), ItemOrdering.from_preference_list([1, 0, 3, 2])]
        vals = [Additive((8, 4, 2, 1)), Additive((4, 8, 1, 2))]
        ef = exists_allocation(2, 4, "ef", valuations=vals)
        sdef = exists_allocation(2, 4, "sdef", orders=orders)
        ef_set = {tuple(b.mask for b in w.bundles) for w in ef.witnesses}
        sdef_set = {tuple(b.mask for b in w.bundles) for w in sdef.witnesses}
        assert sdef_set <= ef_set


class TestEnumerationEngine:
    def test_total_probability_is_checked_internally(self):
        spec = EventSpec("rr", 1, lambda trace: True, "always")
        assert exact_event_probability(2, 6, spec).value == 1

    def test_envy_k1_m4(self):
        got = exact_event_probability(2, 4, envy_event("rr", 1, 0, 1))
        assert got.value == F(1, 4)

    def test_envy_k2_m4(self):
        got = exact_event_probability(2, 4, envy_event("rr", 1, 0, 2))
        assert got.value == F(3, 8)

    @pytest.mark.parametrize("m", [4, 6, 8])
    def test_rr_formula_matches_enumeration(self, m):
        for k in range(1, m // 2 + 1):
            enum = exact_event_probability(2, m, envy_event("rr", 1, 0, k)).value
            assert enum == rr_envy_probability_formula(m, k)
            pick_level = exact_event_probability(
                2, m, picks_within_top("rr", 1, 0, k, 2 * k - 1)
            ).value
            assert pick_level == enum

    @pytest.mark.parametrize("m", [4, 6, 8])
    def test_garr_formula_matches_enumeration(self, m):
        for k in range(1, m // 2 + 1):
            enum = exact_event_probability(2, m, envy_event("garr", 1, 0, k)).value
            assert enum == garr_envy_probability_formula(m, k)

    def test_garr_give_probability(self):
        got = exact_event_probability(2, 4, give_event(1, 0, 1, 3))
        assert got.value == F(1, 4)

    def test_complement_rule(self):
        event = envy_event("rr", 1, 0, 2)
        p = exact_event_probability(2, 6, event).value
        flipped = EventSpec("rr", 1, lambda tr: not event.predicate(tr), "complement")
        assert exact_event_probability(2, 6, flipped).value == 1 - p

    def test_overall_sdef_failure_m4(self):
        # hand union: 1/4 + 3/8 - 1/8 = 1/2
        got = exact_event_probability(2, 4, not_sdef_for("rr", 1))
        assert got.value == F(1, 2)

    def test_last_pick_distribution_sums_to_one(self):
        total = sum(
            exact_event_probability(2, 4, last_pick_is("rr", 1, 0, item)).value
            for item in range(4)
        )
        assert total == 1


class TestJointThreshold:
    def test_spec_cell(self):
        assert joint_threshold_probability(2, 2, 1, 2, 1).value == F(1, 4)

    def test_empty_product(self):
        assert joint_threshold_probability(3, 3, 0, 2, 1).value == 1

    def test_requires_adjacent_pair(self):
        with pytest.raises(ValueError):
            joint_threshold_probability(3, 3, 1, 3, 1)

    @pytest.mark.parametrize("n", [2, 3])
    def test_matches_enumeration_all_small_cells(self, n):
        for q in (1, 2, 3):
            for k in range(q + 1):
                for i in range(2, n + 1):
                    j = i - 1
                    closed = joint_threshold_probability(n, q, k, i, j).value
                    enum = exact_event_probability(
                        n, q * n, threshold_conjunction_event(n, i - 1, j - 1, k)
                    ).value
                    assert closed == enum, (n, q, k, i)

    def test_envy_probability_same_for_all_lower_j(self):
        # exchangeability: the envy event at position k has the same exact
        # probability no matter which earlier-picking agent is envied
        n, q = 3, 2
        for k in (1, 2):
            probs = {
                exact_event_probability(n, q * n, envy_event("rr", 2, j, k)).value
                for j in (0, 1)
            }
            assert len(probs) == 1


class TestFavoriteCollision:
    def test_two_agents(self):
        for m in (2, 5, 100):
            assert favorite_collision_probability(2, m).value == F(1, m)

    def test_three_agents_four_items(self):
        assert favorite_collision_probability(3, 4).value == F(5, 8)

    def test_pigeonhole(self):
        assert favorite_collision_probability(5, 4).value == 1

    def test_birthday_lower_bound_sweep(self):
        for n in range(2, 11):
            for m in range(2 * n, 201):
                if n * n > 2 * m:
                    continue
                assert favorite_collision_probability(n, m).value >= F(n * (n - 1), 4 * m)
