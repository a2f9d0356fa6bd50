"""EF / EFX / SD-EF / SD-EFX checks and the implication structure between them."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from renamefair.core import (
    Allocation,
    ItemOrdering,
    ItemSet,
    Permutation,
    apply_permutation,
    permute_ordering,
    sd_dominates,
)
from renamefair.algorithms import round_robin
from renamefair.fairness import (
    EF,
    EFX,
    SDEF,
    check_ef,
    check_efx,
    check_sdef,
    check_sdefx,
    report_to_dict,
    sdef_implies_ef_witness,
)
from renamefair.instances import efx_without_sdefx_instance
from renamefair.rng import Stream
from renamefair.valuations import Additive, TableValuation, sample_uniform_permutation

F = Fraction


def alloc(lists, m):
    return Allocation.from_item_lists(lists, m)


def balanced_table(m, edges):
    """Table valuation worth 1 on the given balanced bundles, 0 elsewhere."""
    values = [F(0)] * (1 << m)
    for e in edges:
        values[e] = F(1)
    return TableValuation(values)


# The two-agent worked example: agent 1 prefers {0,1},{0,2},{0,3} to their
# complements, agent 2 prefers {0,1},{1,3},{0,3}.
FIG_V1 = balanced_table(4, [0b0011, 0b0101, 0b1001])
FIG_V2 = balanced_table(4, [0b0011, 0b1010, 0b1001])


class TestCheckEF:
    def test_worked_example_split_is_ef(self):
        a = alloc([[0, 2], [1, 3]], 4)
        assert check_ef(a, [FIG_V1, FIG_V2]).verdict

    def test_identical_all_ones_unbalanced(self):
        v = Additive((1, 1, 1, 1))
        report = check_ef(alloc([[0, 1, 2], [3]], 4), [v, v])
        assert not report.verdict
        assert report.violations == tuple([type(report.violations[0])(1, 0, EF)])

    def test_single_agent_vacuous(self):
        v = Additive((1, 2))
        assert check_ef(alloc([[0, 1]], 2), [v]).verdict


class TestCheckEFX:
    def test_hard_instance_efx_allocations(self):
        vs = list(efx_without_sdefx_instance())
        assert check_efx(alloc([[0], [1, 2, 3]], 4), vs).verdict
        assert check_efx(alloc([[1, 2, 3], [0]], 4), vs).verdict

    def test_hard_instance_balanced_split_fails(self):
        vs = list(efx_without_sdefx_instance())
        report = check_efx(alloc([[0, 1], [2, 3]], 4), vs)
        assert not report.verdict
        assert any(v.i == 1 and v.j == 0 for v in report.violations)

    def test_empty_envied_bundle_never_violates(self):
        v = Additive((1, 1))
        assert check_efx(alloc([[0, 1], []], 2), [v, v]).verdict is False  # sizes 2 vs 0: EF fails...
        # ... but the EFX criterion itself never blames the empty bundle:
        report = check_efx(alloc([[0, 1], []], 2), [v, v])
        assert all(violation.j == 0 for violation in report.violations)


class TestCheckSDEF:
    def test_identity_orders_round_robin_output(self):
        orders = [ItemOrdering.identity(4)] * 2
        report = check_sdef(alloc([[0, 2], [1, 3]], 4), orders)
        assert not report.verdict
        assert (1, 0, 1) in report.per_k_flags and (1, 0, 2) in report.per_k_flags
        assert all(v.i == 1 and v.j == 0 for v in report.violations)

    def test_two_orders_violation_at_second_position(self):
        # agent 2's order 2 > 1 > 3 > 4: the round-robin output ({1,3},{2,4})
        # leaves agent 2 holding their 1st and 4th choices against agent 1's
        # 2nd and 3rd, so position 2 fails even though position 1 is fine.
        orders = [ItemOrdering.identity(4), ItemOrdering.from_preference_list([1, 0, 2, 3])]
        report = check_sdef(alloc([[0, 2], [1, 3]], 4), orders)
        assert report.per_k_flags == frozenset({(1, 0, 2)})

    def test_size_mismatch_sentinel(self):
        orders = [ItemOrdering.identity(3)] * 2
        report = check_sdef(alloc([[0, 1], [2]], 3), orders)
        assert (0, 1, 0) in report.per_k_flags and (1, 0, 0) in report.per_k_flags

    @given(st.data())
    @settings(max_examples=80, deadline=None)
    def test_pair_ok_iff_sd_dominates(self, case):
        m = case.draw(st.integers(2, 8).filter(lambda x: x % 2 == 0))
        perm = case.draw(st.permutations(list(range(m))))
        own = ItemSet.from_items(perm[: m // 2], m)
        other = own.complement()
        order = ItemOrdering.from_preference_list(case.draw(st.permutations(list(range(m)))))
        report = check_sdef(Allocation((own, other)), [order, order])
        pair_violations = {k for (i, j, k) in report.per_k_flags if (i, j) == (0, 1)}
        assert bool(pair_violations) == (not sd_dominates(own, other, order))

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_verdict_invariant_under_simultaneous_renaming(self, case):
        m = case.draw(st.integers(2, 6))
        n = case.draw(st.integers(2, 3))
        owners = case.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
        a = Allocation.from_item_lists([[g for g in range(m) if owners[g] == i] for i in range(n)], m)
        orders = [
            ItemOrdering.from_preference_list(case.draw(st.permutations(list(range(m)))))
            for _ in range(n)
        ]
        sigma = Permutation(tuple(case.draw(st.permutations(list(range(m))))))
        renamed_alloc = Allocation(tuple(apply_permutation(b, sigma) for b in a.bundles))
        renamed_orders = [permute_ordering(o, sigma) for o in orders]
        assert check_sdef(a, orders).per_k_flags == check_sdef(renamed_alloc, renamed_orders).per_k_flags


class TestCheckSDEFX:
    def test_size_gap_of_two_fails(self):
        orders = [ItemOrdering.identity(4)] * 2
        report = check_sdefx(alloc([[0, 1, 2], [3]], 4), orders)
        assert any(v.i == 1 and v.j == 0 for v in report.violations)

    def test_hard_instance_efx_witnesses_fail_sdefx(self):
        orders = [ItemOrdering.identity(4)] * 2
        assert not check_sdefx(alloc([[0], [1, 2, 3]], 4), orders).verdict
        assert not check_sdefx(alloc([[1, 2, 3], [0]], 4), orders).verdict

    def test_singleton_bundle_reduces_to_empty_dominance(self):
        orders = [ItemOrdering.identity(2)] * 2
        assert check_sdefx(alloc([[1], [0]], 2), orders).verdict

    def test_universal_quantifier_over_removed_item(self):
        # in ({1,2},{0,3}) under the identity order, removing item 0 from the
        # envied bundle rescues the pair but removing item 3 does not; the
        # universal quantifier makes the pair violated anyway
        orders = [ItemOrdering.identity(4)] * 2
        report = check_sdefx(alloc([[1, 2], [0, 3]], 4), orders)
        assert any(v.i == 0 and v.j == 1 for v in report.violations)

    def test_sdef_implies_sdefx_when_bundles_nonempty(self):
        stream = Stream(5)
        for trial in range(40):
            m, n = 8, 2
            orders = [
                permute_ordering(
                    ItemOrdering.identity(m), sample_uniform_permutation(m, stream.spawn(trial * 2 + a))
                )
                for a in range(n)
            ]
            trace = round_robin(orders, m)
            if check_sdef(trace.final, orders).verdict:
                assert check_sdefx(trace.final, orders).verdict


class TestSdefImpliesEF:
    def test_random_consistent_profiles_are_ef(self):
        orders = [ItemOrdering.identity(4), ItemOrdering.from_preference_list([1, 0, 3, 2])]
        trace = round_robin(orders, 4)
        report = check_sdef(trace.final, orders)
        if report.verdict:
            assert sdef_implies_ef_witness(orders, trace.final, Stream(17), samples=100)

    def test_many_random_sdef_allocations(self):
        stream = Stream(23)
        checked = 0
        for trial in range(60):
            m = 6
            orders = [
                permute_ordering(ItemOrdering.identity(m), sample_uniform_permutation(m, stream.spawn(trial * 2 + a)))
                for a in range(2)
            ]
            trace = round_robin(orders, m)
            if check_sdef(trace.final, orders).verdict:
                checked += 1
                assert sdef_implies_ef_witness(orders, trace.final, stream.spawn(1000 + trial), samples=25)
        assert checked > 10

    def test_adversarial_gap_breaks_ef_when_sdef_fails(self):
        # agent 2 envies at position 1 in ({1,3},{2,4}) under identical
        # orders; a huge value gap at rank 1 then breaks plain EF too
        a = alloc([[0, 2], [1, 3]], 4)
        gap = Additive((1000, 1, F(1, 2), F(1, 4)))
        assert not check_ef(a, [gap, gap]).verdict

    def test_requires_sdef_input(self):
        orders = [ItemOrdering.identity(4)] * 2
        with pytest.raises(ValueError):
            sdef_implies_ef_witness(orders, alloc([[0, 2], [1, 3]], 4), Stream(3))

    def test_single_agent_vacuous(self):
        orders = [ItemOrdering.identity(3)]
        assert sdef_implies_ef_witness(orders, alloc([[0, 1, 2]], 3), Stream(3), samples=5)


def test_report_serialization_is_one_indexed():
    orders = [ItemOrdering.identity(4)] * 2
    report = check_sdef(alloc([[0, 2], [1, 3]], 4), orders)
    data = report_to_dict(report)
    assert data["verdict"] is False
    assert {"envious": 2, "envied": 1, "kind": SDEF, "k": 1} in data["violations"]
    assert [2, 1, 1] in data["per_k_flags"]
