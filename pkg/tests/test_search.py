import itertools
import random

import pytest

from augsp.axioms import check, check_all
from augsp.domain import Grid
from augsp.rules import DefaultDictator, WgspExample, materialize_table, recognize_target_default
from augsp.search import (
    SearchGuardError,
    SearchSpec,
    _Problem,
    brute_force_rules,
    classify_rules,
    enumerate_rules,
    find_counterexample_rule,
    normalize_axiom,
    seed_from_rule,
)

G2, G3 = Grid.uniform(2), Grid.uniform(3)


def spec(grid, n, required=(), forbidden=(), **kw):
    return SearchSpec(grid, n, frozenset(required), frozenset(forbidden), **kw)


def outcomes(tables):
    return [t.outcomes for t in tables]


class TestSpecValidation:
    def test_normalize(self):
        assert normalize_axiom("gsp", 3) == "gsp:3"
        assert normalize_axiom(" wgsp:2 ", 3) == "wgsp:2"
        for bad in ("gsp:4", "sp:1", "nonsense"):
            with pytest.raises(ValueError):
                normalize_axiom(bad, 3)

    def test_required_and_forbidden_overlap(self):
        with pytest.raises(ValueError):
            spec(G2, 2, {"sp"}, {"sp"})
        with pytest.raises(ValueError):
            spec(G2, 3, {"gsp"}, {"gsp:3"})

    def test_guard(self):
        with pytest.raises(SearchGuardError):
            enumerate_rules(spec(Grid.uniform(4), 3, {"onto"}))
        with pytest.raises(SearchGuardError):
            enumerate_rules(spec(G3, 4, {"onto"}))
        # forcing lifts the guard; a limit keeps this one quick
        found = enumerate_rules(spec(Grid.uniform(4), 3, {"onto", "pairwise_sp"}, limit=1, force=True))
        assert len(found) == 1 and recognize_target_default(found[0])


class TestCharacterizationInstances:
    def test_two_agents_two_points(self):
        found = enumerate_rules(spec(G2, 2, {"onto", "pairwise_sp"}))
        assert len(found) == 8
        fd = materialize_table(DefaultDictator(G2, 2))
        assert fd in found
        summary = classify_rules(found)
        assert len(summary["target"]) == 4 and len(summary["other"]) == 4

    def test_three_agents_two_points(self):
        found = enumerate_rules(spec(G2, 3, {"onto", "pairwise_sp"}))
        assert len(found) == 4
        assert {next(iter(recognize_target_default(t))) for t in found} == set(itertools.product(range(2), repeat=2))

    def test_three_agents_three_points(self):
        found = enumerate_rules(spec(G3, 3, {"onto", "pairwise_sp"}))
        assert len(found) == 9
        assert all(len(recognize_target_default(t)) == 1 for t in found)

    def test_no_inefficient_pairwise_rule(self):
        assert find_counterexample_rule(spec(G2, 3, {"onto", "pairwise_sp"}, {"efficiency"})) is None

    def test_onto_but_manipulable(self):
        t = find_counterexample_rule(spec(G2, 2, {"onto"}, {"sp"}))
        assert t is not None
        assert check(t, "onto").passed and not check(t, "sp").passed


class TestEfficientStrategyProof:
    @pytest.mark.parametrize("n", [2, 3])
    def test_tops_only_and_wgsp(self, n):
        found = enumerate_rules(spec(G2, n, {"efficiency", "sp"}))
        assert found
        for t in found:
            assert check(t, "tops_only").passed
            assert check(t, f"wgsp:{n}").passed

    def test_counts(self):
        # frozen from filtering every table with the checkers (see test_matches_brute_force)
        assert len(enumerate_rules(spec(G2, 2, {"efficiency", "sp"}))) == 8


class TestSeeds:
    def test_seeded_fstar(self):
        s = spec(G3, 3, {"onto", "sp"}, {"pairwise_sp"}, seed=seed_from_rule(WgspExample(G3, 3)))
        assert find_counterexample_rule(s) == materialize_table(WgspExample(G3, 3))

    def test_seed_dict_and_conflict(self):
        s = spec(G2, 2, {"onto", "pairwise_sp"}, seed={0: 1})
        found = enumerate_rules(s)
        assert found and all(t.outcomes[0] == 1 for t in found)
        # fd pinned but anonymity required: nothing fits
        s = spec(G2, 2, {"anonymity"}, seed=seed_from_rule(DefaultDictator(G2, 2)))
        assert enumerate_rules(s) == []


COMBINATIONS = [
    ({"onto", "pairwise_sp"}, ()),
    ({"efficiency", "sp"}, ()),
    ({"sp"}, ()),
    ({"wgsp"}, ()),
    ({"weak_pairwise_sp", "onto"}, ()),
    ({"tops_only", "sp"}, ()),
    ({"anonymity", "onto", "sp"}, ()),
    ({"onto"}, {"sp"}),
    ({"sp"}, {"pairwise_sp"}),
    ({"sp", "onto"}, {"anonymity", "efficiency"}),
    ({"tops_only"}, {"onto"}),
]


@pytest.mark.parametrize("required,forbidden", COMBINATIONS)
def test_matches_brute_force(required, forbidden):
    found = enumerate_rules(spec(G2, 2, required, forbidden))
    brute = brute_force_rules(G2, 2, required, forbidden)
    assert sorted(outcomes(found)) == sorted(outcomes(brute))
    assert len(set(outcomes(found))) == len(found)
    for t in found:
        assert all(check(t, a).passed for a in required)
        assert not any(check(t, a).passed for a in forbidden)


def _all_passing(required):
    return [t.outcomes for t in brute_force_rules(G2, 2, required)]


@pytest.mark.parametrize("required", [{"pairwise_sp"}, {"sp", "tops_only"}, {"wgsp", "anonymity"}, {"efficiency", "sp"}])
def test_pruning_never_cuts_a_solution(required):
    """Whenever the local test rejects a value, no passing table extends that choice."""
    problem = _Problem(spec(G2, 2, required))
    solutions = _all_passing(required)
    rng = random.Random(7)
    rejected = 0
    for _ in range(400):
        base = list(rng.choice(solutions)) if rng.random() < 0.5 else [rng.randrange(2) for _ in range(9)]
        assign = [v if rng.random() < 0.6 else -1 for v in base]
        p = rng.randrange(9)
        assign[p] = -1
        for v in problem.values[p]:
            if problem.consistent(assign, p, v):
                continue
            rejected += 1
            assert not any(
                s[p] == v and all(a < 0 or a == b for a, b in zip(assign, s)) for s in solutions
            )
    assert rejected > 0


def test_workers_do_not_change_results():
    for s in (spec(G3, 3, {"onto", "pairwise_sp"}), spec(G2, 3, {"efficiency", "sp"}), spec(G2, 2, {"onto"}, limit=5)):
        assert outcomes(enumerate_rules(s, workers=1)) == outcomes(enumerate_rules(s, workers=3))


def test_limit_is_a_prefix():
    s_all = spec(G2, 2, {"sp"})
    everything = outcomes(enumerate_rules(s_all))
    assert outcomes(enumerate_rules(spec(G2, 2, {"sp"}, limit=3))) == everything[:3]


def test_brute_force_guard():
    with pytest.raises(SearchGuardError):
        brute_force_rules(G2, 3, {"sp"})


def test_classification_counts():
    found = enumerate_rules(spec(G2, 2, {"onto", "pairwise_sp"}))
    summary = classify_rules(found)
    assert summary["total"] == 8
    names = [v.name for v in check_all(found[0])]
    assert list(summary["axiom_pass_counts"]) == names
    assert summary["axiom_pass_counts"]["onto"] == 8
    assert summary["axiom_pass_counts"]["anonymity"] == 4  # only the target tables
    assert classify_rules([]) == {"total": 0, "target": [], "other": []}
