"""Scenario suite: each scenario reproduces one published result on a small
grid and records every check as an assertion with expected and observed
values.  Reports are deterministic; wall-clock time is kept separately and
only serialized on request."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from augsp import axioms
from augsp.domain import (
    Grid,
    Preference,
    Profile,
    efficiency_mask,
    efficient_set,
    enumerate_profiles,
    peak_summary,
)
from augsp.rules import (
    DefaultDictator,
    TableRule,
    TargetDefault,
    WgspExample,
    evaluate,
    materialize_table,
    recognize_target_default,
    table_array,
)
from augsp.search import (
    SearchSpec,
    brute_force_rules,
    classify_rules,
    enumerate_rules,
    find_counterexample_rule,
    seed_from_rule,
)

GRID2 = Grid.uniform(2)
GRID3 = Grid.uniform(3)


@dataclass
class Assertion:
    description: str
    expected: object
    observed: object

    @property
    def passed(self) -> bool:
        return self.expected == self.observed

    def to_json(self) -> dict:
        return {
            "description": self.description,
            "expected": self.expected,
            "observed": self.observed,
            "pass": self.passed,
        }


@dataclass
class ScenarioReport:
    name: str
    instances: list[dict]
    assertions: list[Assertion] = field(default_factory=list)
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def expect(self, description: str, expected, observed) -> None:
        self.assertions.append(Assertion(description, expected, observed))

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "scenario": self.name,
            "instances": self.instances,
            "assertions": [a.to_json() for a in self.assertions],
            "pass": self.passed,
        }
        if timing:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out


def _instance(grid: Grid, n) -> dict:
    return {"grid": [grid.fmt(a) for a in range(grid.m)], "agents": n}


def _target_rules(grid: Grid, n: int) -> list[TargetDefault]:
    return [TargetDefault(grid, n, x, y) for x in range(grid.m) for y in range(grid.m)]


def _failing(verdicts) -> list[str]:
    return sorted(v.name for v in verdicts if not v.passed)


def _passing(verdicts) -> list[str]:
    return sorted(v.name for v in verdicts if v.passed)


def _fmt_pairs(grid: Grid, pairs) -> list:
    return sorted([grid.fmt(x), grid.fmt(y)] for x, y in pairs)


def scenario_theorem1(workers: int = 1) -> ScenarioReport:
    report = ScenarioReport("theorem1", [_instance(GRID2, 3), _instance(GRID3, 3)])
    for grid in (GRID2, GRID3):
        rules = _target_rules(grid, 3)
        clean = 0
        for rule in rules:
            verdicts = axioms.check_all(rule, workers=workers)
            clean += all(v.passed for v in verdicts)
        report.expect(
            f"m={grid.m}, n=3: target rules passing every axiom including onto, pairwise SP and GSP(3)",
            len(rules),
            clean,
        )

    for grid in (GRID2, GRID3):
        spec = SearchSpec(grid, 3, frozenset({"onto", "pairwise_sp"}))
        found = enumerate_rules(spec, workers=workers)
        summary = classify_rules(found, with_axioms=False)
        report.expect(f"m={grid.m}, n=3: tables that are onto and pairwise SP", grid.m**2, len(found))
        report.expect(f"m={grid.m}, n=3: enumerated tables that are not target rules", 0, len(summary["other"]))
        report.expect(
            f"m={grid.m}, n=3: recognized (target, default) pairs",
            _fmt_pairs(grid, itertools.product(range(grid.m), repeat=2)),
            sorted([e["x"], e["y"]] for e in summary["target"]),
        )
    return report


def scenario_remark3(workers: int = 1) -> ScenarioReport:
    grid = GRID2
    report = ScenarioReport("remark3", [_instance(grid, 2)])
    fd = DefaultDictator(grid, 2)
    verdicts = {v.name: v for v in axioms.check_all(fd, workers=workers)}
    report.expect("f^d is onto", True, verdicts["onto"].passed)
    report.expect("f^d is pairwise strategy-proof", True, verdicts["pairwise_sp"].passed)
    report.expect("f^d is anonymous", False, verdicts["anonymity"].passed)
    report.expect("target rules matching f^d", [], _fmt_pairs(grid, recognize_target_default(fd)))

    lo, hi = grid.preferences[1], grid.preferences[2]
    report.expect(
        "f^d at (peak 0, peak 1) and at (peak 1, peak 0)",
        [0, 1],
        [grid.fmt(evaluate(fd, Profile.from_prefs(grid, p))) for p in ((lo, hi), (hi, lo))],
    )

    found = enumerate_rules(SearchSpec(grid, 2, frozenset({"onto", "pairwise_sp"})), workers=workers)
    summary = classify_rules(found, with_axioms=False)
    targets = {materialize_table(r) for r in _target_rules(grid, 2)}
    report.expect("all four target tables are onto and pairwise SP", True, targets <= set(found))
    report.expect("onto and pairwise SP tables strictly outnumber target tables", True, len(found) > len(targets))
    report.expect("f^d is among the enumerated tables", True, materialize_table(fd) in set(found))
    report.expect("enumerated tables that are not target rules", len(found) - 4, len(summary["other"]))
    return report


def named_example_profiles(grid: Grid, n: int) -> tuple[Profile, Profile]:
    """Agent 2 peaks at the middle point, everyone else indifferent; the first
    profile ranks 1 above 0, the second ranks 0 above 1."""
    mid = grid.index_of("1/2")
    last = grid.m - 1
    right = next(p for p in grid.preferences if p.peak == mid and p.ranking.index(last) < p.ranking.index(0))
    left = next(p for p in grid.preferences if p.peak == mid and p.ranking.index(0) < p.ranking.index(last))
    indiff = Preference.indifferent()
    make = lambda p: Profile.from_prefs(grid, (indiff, p) + (indiff,) * (n - 2))  # noqa: E731
    return make(right), make(left)


def scenario_example1(workers: int = 1) -> ScenarioReport:
    grid, n = GRID3, 3
    report = ScenarioReport("example1", [_instance(grid, n)])
    fstar = WgspExample(grid, n)
    verdicts = axioms.check_all(fstar, workers=workers)
    report.expect(
        "f* passes",
        sorted(["onto", "sp", f"wgsp:{n}", "weak_pairwise_sp"]),
        _passing(verdicts),
    )
    report.expect(
        "f* fails",
        sorted(["efficiency", "tops_only", "pairwise_sp", f"gsp:{n}", "anonymity"]),
        _failing(verdicts),
    )
    report.expect(
        "every failing verdict re-verifies",
        True,
        all(axioms.verify_witness(fstar, v) for v in verdicts if not v.passed),
    )

    R, R_prime = named_example_profiles(grid, n)
    eff = axioms.check_efficiency(fstar, profiles=[R])
    report.expect(
        "efficiency witness at R (agent 2 peak 1/2, 1 above 0): outcome and efficient set",
        {"profile": R.to_json(), "outcome": 1, "efficient_set": [0.5]},
        eff.witness.to_json() if eff.witness else None,
    )
    tops = next(v for v in verdicts if v.name == "tops_only")
    report.expect(
        "tops-only witness is the pair (R, R') with outcomes (1, 0)",
        {"profile": R.to_json(), "reference": R_prime.to_json(), "outcome": 1, "reference_outcome": 0},
        tops.witness.to_json(),
    )
    pair = next(v for v in verdicts if v.name == "pairwise_sp").witness
    report.expect(
        "pairwise SP witness: coalition and deviant outcome",
        {"coalition": [1, 2], "outcome_deviant": 0.5},
        {"coalition": [i + 1 for i in pair.coalition], "outcome_deviant": grid.fmt(pair.outcome_deviant)},
    )
    # at R, agent 1 (indifferent) reports agent 2's true preference
    dev = R.replace([0], [R.codes[1]])
    report.expect(
        "at R, coalition {1,2} moves the outcome from 1 to 1/2",
        [1, 0.5],
        [grid.fmt(evaluate(fstar, R)), grid.fmt(evaluate(fstar, dev))],
    )

    spec = SearchSpec(
        grid,
        n,
        frozenset({"onto", "sp", "wgsp"}),
        frozenset({"efficiency"}),
        seed=seed_from_rule(fstar),
    )
    found = find_counterexample_rule(spec, workers=workers)
    report.expect(
        "seeded search for onto, SP, WGSP and not efficient returns f*",
        True,
        found is not None and found == materialize_table(fstar),
    )
    return report


def _prop1_violations(tables, n: int) -> int:
    return sum(
        not (axioms.check_tops_only(t).passed and axioms.check_wgsp(t, n).passed) for t in tables
    )


def efficient_sp_tables(grid: Grid, n: int) -> list[TableRule]:
    """Every efficient table, filtered by the SP checker (no search involved)."""
    mask = efficiency_mask(grid, n)
    choices = [tuple(int(a) for a in np.flatnonzero(row)) for row in mask]
    free = sum(len(c) > 1 for c in choices)
    if 2**free > 1 << 16:
        raise ValueError(f"{2 ** free} efficient tables is too many to filter")
    return [
        t
        for t in (TableRule(grid, n, outcomes) for outcomes in itertools.product(*choices))
        if axioms.check_sp(t).passed
    ]


def scenario_prop1(workers: int = 1) -> ScenarioReport:
    grid = GRID2
    report = ScenarioReport("prop1", [_instance(grid, 2), _instance(grid, 3)])
    for n in (2, 3):
        searched = enumerate_rules(SearchSpec(grid, n, frozenset({"efficiency", "sp"})), workers=workers)
        if n == 2:
            how = f"all {grid.m ** grid.size ** n} tables"
            filtered = brute_force_rules(grid, n, ["efficiency", "sp"])
        else:
            how = "all efficient tables"
            filtered = efficient_sp_tables(grid, n)
        report.expect(
            f"n={n}: efficient and SP tables, search vs filter over {how}",
            len(filtered),
            len(searched),
        )
        report.expect(f"n={n}: search and filter give the same set", True, set(filtered) == set(searched))
        report.expect(f"n={n}: efficient and SP tables that are not tops-only or not WGSP({n})", 0,
                      _prop1_violations(searched, n))
        targets = {materialize_table(r) for r in _target_rules(grid, n)}
        report.expect(f"n={n}: every target rule is efficient and SP", True, targets <= set(searched))
    return report


def _target_properties(rule: TargetDefault) -> dict[str, int]:
    """Count violations of each supporting property for one target rule."""
    grid, n, x = rule.grid, rule.n, rule.x
    t = np.asarray(table_array(rule))
    last = grid.m - 1
    bad = dict.fromkeys(["spread_invariance", "spread_pinning", "target_inside", "target_below", "target_above"], 0)
    checked = dict.fromkeys(bad, 0)
    peak = grid.peak
    lo_prefs = [c for c in range(grid.size) if peak[c] == 0]
    hi_prefs = [c for c in range(grid.size) if peak[c] == last]
    spread = Profile(grid, (lo_prefs[0],) * (n - 1) + (hi_prefs[0],))
    target = int(t[spread.codes])

    for prof in enumerate_profiles(grid, n):
        codes = prof.codes
        out = int(t[codes])
        peaks = [int(peak[c]) for c in codes]
        for k in range(n):
            others = [peaks[i] for i in range(n) if i != k]
            if 0 in others and last in others:
                for c in range(grid.size):
                    checked["spread_invariance"] += 1
                    bad["spread_invariance"] += int(t[prof.replace([k], [c]).codes]) != out
        if all(p >= 0 for p in peaks) and peaks.count(last) == 1 and peaks.count(0) == n - 1:
            checked["spread_pinning"] += 1
            bad["spread_pinning"] += out != target or target != x
        s = peak_summary(prof)
        if s.all_indifferent:
            continue
        if s.tau_min <= x <= s.tau_max:
            checked["target_inside"] += 1
            bad["target_inside"] += out != x
        elif x < s.tau_min:
            checked["target_below"] += 1
            bad["target_below"] += out != s.tau_min
        else:
            checked["target_above"] += 1
            bad["target_above"] += out != s.tau_max
    return {k: (checked[k], bad[k]) for k in bad}


def scenario_appendix_claims(workers: int = 1) -> ScenarioReport:
    grid, n = GRID3, 3
    report = ScenarioReport("appendix_claims", [_instance(grid, n)])
    rules = _target_rules(grid, n)
    labels = {
        "efficient": "efficient",
        "tops_only": "tops-only",
        "spread_invariance": "with peaks at 0 and 1 present, a third agent cannot move the outcome",
        "spread_pinning": "one peak at 1, all others at 0, gives the target",
        "target_inside": "target inside [min peak, max peak] is chosen",
        "target_below": "target below the smallest peak gives the smallest peak",
        "target_above": "target above the largest peak gives the largest peak",
        "group_sp": "group strategy-proof for every coalition size",
    }
    failures = dict.fromkeys(labels, 0)
    instances = dict.fromkeys(labels, 0)
    for rule in rules:
        failures["efficient"] += not axioms.check_efficiency(rule).passed
        failures["tops_only"] += not axioms.check_tops_only(rule).passed
        failures["group_sp"] += not axioms.check_group_sp(rule, n, workers=workers).passed
        for key in ("efficient", "tops_only", "group_sp"):
            instances[key] += 1
        for key, (checked, bad) in _target_properties(rule).items():
            instances[key] += checked
            failures[key] += bad
    for key, label in labels.items():
        report.expect(f"{label} ({instances[key]} checks over {len(rules)} rules): violations", 0, failures[key])
    report.expect(
        "efficiency cross-check: outcome lies in the efficient set at every non-null profile",
        True,
        all(
            evaluate(r, p) in efficient_set(p)
            for r in rules
            for p in enumerate_profiles(grid, n)
            if not peak_summary(p).all_indifferent
        ),
    )
    return report


SCENARIOS = {
    "theorem1": scenario_theorem1,
    "remark3": scenario_remark3,
    "example1": scenario_example1,
    "prop1": scenario_prop1,
    "appendix_claims": scenario_appendix_claims,
}


def run_scenario(name: str, workers: int = 1) -> ScenarioReport:
    try:
        fn = SCENARIOS[name]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}") from None
    t0 = time.perf_counter()
    report = fn(workers=workers)
    report.elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return report
