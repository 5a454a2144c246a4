import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augsp import axioms
from augsp.axioms import (
    DeviationWitness,
    check,
    check_all,
    check_anonymity,
    check_efficiency,
    check_group_sp,
    check_onto,
    check_pairwise_sp,
    check_sp,
    check_tops_only,
    check_weak_pairwise_sp,
    check_wgsp,
    implication_problems,
    verify_witness,
)
from augsp.domain import Grid, Preference, Profile
from augsp.rules import DefaultDictator, TableRule, TargetDefault, WgspExample, materialize_table

import oracles

G2, G3 = Grid.uniform(2), Grid.uniform(3)
R0 = Preference.indifferent()


def constant(grid, n, v=0):
    return TableRule(grid, n, (v,) * grid.size**n)


def worst_for_first(grid, n):
    """Every profile goes to agent 1's least preferred point (right end if indifferent)."""
    out = []
    for codes in itertools.product(range(grid.size), repeat=n):
        p = grid.preferences[codes[0]]
        out.append(p.ranking[-1] if p.ranking else grid.m - 1)
    return TableRule(grid, n, out)


def names(verdicts, passed):
    return {v.name for v in verdicts if v.passed == passed}


class TestStrategyProofness:
    def test_target_rule(self):
        assert check_sp(TargetDefault(G3, 3, 1, 0)).passed

    def test_fstar(self):
        assert check_sp(WgspExample(G3, 3)).passed

    def test_worst_alternative_rule(self):
        rule = worst_for_first(G3, 3)
        v = check_sp(rule)
        assert not v.passed
        assert v.witness.coalition == (0,)
        assert verify_witness(rule, v)

    @pytest.mark.parametrize("rule", [WgspExample(G3, 3), worst_for_first(G3, 3), TargetDefault(G3, 3, 2, 1)])
    def test_size_one_is_sp(self, rule):
        a, b = check_sp(rule), check_group_sp(rule, 1)
        assert a.passed == b.passed and a.witness == b.witness


class TestGroupStrategyProofness:
    def test_target_rule_full_coalitions(self):
        assert check_group_sp(TargetDefault(G3, 3, 1, 0), 3).passed

    def test_fstar_pair_witness(self):
        rule = WgspExample(G3, 3)
        v = check_group_sp(rule, 2)
        assert not v.passed
        w = v.witness
        assert w.coalition == (0, 1)
        assert w.profile.prefs[0] == R0
        assert w.outcome_deviant == 1  # 1/2
        assert verify_witness(rule, v)
        # frozen from the coalition-outer brute-force scan in oracles.deviations
        assert w.profile.codes == (0, 2, 0) and w.outcome_truthful == 0
        prof, coal, mis = oracles.first_deviation(rule, 2)
        assert (w.profile, w.coalition, tuple(G3.code_of[p] for p in w.misreport)) == (prof, coal, mis)

    def test_pair_deviation_named_in_example(self):
        # agent 2 ranks 1 above 0, agent 1 indifferent: agent 1 reporting peak 1/2 moves 1 -> 1/2
        rule = WgspExample(G3, 3)
        truth = Profile.from_prefs(G3, [R0, Preference((1, 2, 0)), R0])
        mid = Preference((1, 0, 2))
        dev = truth.replace([0], [G3.code_of[mid]])
        assert (rule.evaluate(truth), rule.evaluate(dev)) == (2, 1)

    @pytest.mark.parametrize("x,y", list(itertools.product(range(3), repeat=2)))
    def test_pairwise_for_every_target(self, x, y):
        assert check_pairwise_sp(TargetDefault(G3, 3, x, y)).passed

    def test_default_dictator(self):
        assert check_pairwise_sp(DefaultDictator(G2, 2)).passed

    def test_fstar_fails_pairwise(self):
        assert not check_pairwise_sp(WgspExample(G3, 3)).passed

    def test_bounds(self):
        with pytest.raises(ValueError):
            check_group_sp(WgspExample(G3, 3), 4)
        with pytest.raises(ValueError):
            check_wgsp(WgspExample(G3, 3), 0)


class TestWeakGroupStrategyProofness:
    def test_fstar(self):
        assert check_wgsp(WgspExample(G3, 3), 3).passed
        assert check_weak_pairwise_sp(WgspExample(G3, 3)).passed

    def test_target_and_constant(self):
        assert check_wgsp(TargetDefault(G3, 3, 1, 0)).passed
        assert check_wgsp(constant(G3, 3)).passed

    def test_default_dictator(self):
        assert check_weak_pairwise_sp(DefaultDictator(G2, 2)).passed

    def test_violation_is_found(self):
        # a table whose all-strict pair deviation the search turns up
        from augsp.search import SearchSpec, find_counterexample_rule

        rule = find_counterexample_rule(SearchSpec(G2, 2, frozenset({"onto"}), frozenset({"weak_pairwise_sp"})))
        v = check_weak_pairwise_sp(rule)
        assert not v.passed and verify_witness(rule, v)
        assert oracles.first_deviation(rule, 2, all_strict=True) is not None


class TestProfileAxioms:
    def test_efficiency(self):
        assert check_efficiency(TargetDefault(G3, 3, 2, 0)).passed
        v = check_efficiency(constant(G2, 3))
        assert not v.passed
        assert v.witness.outcome == 0 and 0 not in v.witness.efficient
        all_top = Profile(G2, (2, 2, 2))
        assert not check_efficiency(constant(G2, 3), profiles=[all_top]).passed

    def test_fstar_inefficient_at_named_profile(self):
        rule = WgspExample(G3, 3)
        named = Profile.from_prefs(G3, [R0, Preference((1, 2, 0)), R0])
        v = check_efficiency(rule, profiles=[named])
        assert not v.passed
        assert (v.witness.profile, v.witness.outcome, v.witness.efficient) == (named, 2, (1,))
        assert verify_witness(rule, v)

    def test_onto(self):
        assert check_onto(TargetDefault(G3, 3, 0, 0)).passed
        assert check_onto(WgspExample(G3, 3)).passed
        v = check_onto(constant(G3, 3))
        assert not v.passed and v.witness.alternative == 1
        assert verify_witness(constant(G3, 3), v)

    def test_tops_only(self):
        assert check_tops_only(TargetDefault(G3, 3, 1, 1)).passed
        rule = WgspExample(G3, 3)
        v = check_tops_only(rule)
        assert not v.passed
        w = v.witness
        assert w.profile == Profile.from_prefs(G3, [R0, Preference((1, 2, 0)), R0])
        assert w.reference == Profile.from_prefs(G3, [R0, Preference((1, 0, 2)), R0])
        assert (w.outcome, w.reference_outcome) == (2, 0)
        assert verify_witness(rule, v)

    def test_tops_only_on_peak_classes(self):
        grid, n = G3, 2
        reps = axioms.tops_classes(grid, n)
        # any table constant on classes passes, whatever the class values are
        values = {int(r): (int(r) * 7) % grid.m for r in set(reps.tolist())}
        t = TableRule(grid, n, [values[int(r)] for r in reps])
        assert check_tops_only(t).passed

    def test_anonymity(self):
        assert check_anonymity(TargetDefault(G3, 3, 1, 2)).passed
        rule = DefaultDictator(G2, 2)
        v = check_anonymity(rule)
        assert not v.passed
        lo_hi, hi_lo = Profile(G2, (1, 2)), Profile(G2, (2, 1))
        assert {(v.witness.profile, v.witness.outcome), (v.witness.reference, v.witness.reference_outcome)} == {
            (lo_hi, 0),
            (hi_lo, 1),
        }
        assert not check_anonymity(WgspExample(G3, 3)).passed


class TestCheckAll:
    def test_target(self):
        verdicts = check_all(TargetDefault(G3, 3, 1, 0))
        assert all(v.passed for v in verdicts)
        assert [v.axiom for v in verdicts] == list(axioms.AXIOMS)

    def test_fstar(self):
        verdicts = check_all(WgspExample(G3, 3))
        assert names(verdicts, True) == {"sp", "wgsp:3", "weak_pairwise_sp", "onto"}
        assert names(verdicts, False) == {"pairwise_sp", "gsp:3", "efficiency", "tops_only", "anonymity"}

    def test_default_dictator(self):
        verdicts = check_all(DefaultDictator(G2, 2))
        assert names(verdicts, False) == {"anonymity"}
        assert {"onto", "sp", "pairwise_sp", "efficiency", "tops_only"} <= names(verdicts, True)

    def test_dispatch(self):
        rule = WgspExample(G3, 3)
        assert check(rule, "gsp:2").name == "gsp:2"
        assert check(rule, "gsp", max_coalition=2).passed is False
        with pytest.raises(ValueError):
            check(rule, "bogus")
        with pytest.raises(ValueError):
            check(rule, "sp:2")

    def test_workers_do_not_change_verdicts(self):
        for rule in (WgspExample(G3, 3), TargetDefault(G3, 3, 1, 0), worst_for_first(G2, 3)):
            a = [v.to_json(timing=False) for v in check_all(rule)]
            b = [v.to_json(timing=False) for v in check_all(rule, workers=3)]
            assert a == b

    def test_json_schema(self):
        v = check_pairwise_sp(WgspExample(G3, 3)).to_json()
        assert set(v) == {"axiom", "pass", "witness", "elapsed_ms"}
        assert set(v["witness"]) == {"profile", "coalition", "misreport", "outcome_truthful", "outcome_deviant"}
        assert v["witness"]["profile"] == ["indiff", [0.5, 0, 1], "indiff"]
        assert v["witness"]["coalition"] == [1, 2]


def test_all_two_agent_tables_against_oracles():
    """Every checker against the definition-level oracle on all 512 tables."""
    for outcomes in itertools.product(range(2), repeat=9):
        t = TableRule(G2, 2, outcomes)
        verdicts = {v.name: v for v in check_all(t)}
        assert verdicts["onto"].passed == oracles.is_onto(t)
        assert verdicts["sp"].passed == oracles.is_gsp(t, 1)
        assert verdicts["pairwise_sp"].passed == verdicts["gsp:2"].passed == oracles.is_gsp(t, 2)
        assert verdicts["wgsp:2"].passed == verdicts["weak_pairwise_sp"].passed == oracles.is_wgsp(t, 2)
        assert verdicts["efficiency"].passed == oracles.is_efficient(t)
        assert verdicts["tops_only"].passed == oracles.is_tops_only(t)
        assert verdicts["anonymity"].passed == oracles.is_anonymous(t)
        assert implication_problems(list(verdicts.values()), 2) == []
        for v in verdicts.values():
            assert verify_witness(t, v)


table_m2n3 = st.lists(st.integers(0, 1), min_size=27, max_size=27)
table_m3n2 = st.lists(st.integers(0, 2), min_size=25, max_size=25)


@settings(max_examples=40, deadline=None)
@given(st.one_of(table_m2n3.map(lambda o: TableRule(G2, 3, o)), table_m3n2.map(lambda o: TableRule(G3, 2, o))))
def test_random_tables_against_oracles(t):
    n = t.n
    verdicts = {v.name: v for v in check_all(t)}
    for name, bound, strict in (("sp", 1, False), ("pairwise_sp", 2, False), (f"gsp:{n}", n, False),
                                (f"wgsp:{n}", n, True), ("weak_pairwise_sp", 2, True)):
        first = oracles.first_deviation(t, bound, all_strict=strict)
        v = verdicts[name]
        assert v.passed == (first is None)
        if first is not None:
            prof, coal, mis = first
            assert (v.witness.profile, v.witness.coalition) == (prof, coal)
            assert tuple(t.grid.code_of[p] for p in v.witness.misreport) == mis
        assert verify_witness(t, v)
    assert verdicts["tops_only"].passed == oracles.is_tops_only(t)
    assert verdicts["anonymity"].passed == oracles.is_anonymous(t)
    assert verdicts["efficiency"].passed == oracles.is_efficient(t)
    assert implication_problems(list(verdicts.values()), n) == []


def test_tampered_witness_is_rejected():
    rule = WgspExample(G3, 3)
    v = check_pairwise_sp(rule)
    w = v.witness
    v.witness = DeviationWitness(w.profile, w.coalition, w.misreport, w.outcome_truthful, 0)
    assert not verify_witness(rule, v)
