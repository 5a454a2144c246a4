"""Exact axiom checkers over a finite instance.

Each checker scans every profile of the rule's table and returns an
:class:`AxiomVerdict`.  A failing verdict carries the first violation in
canonical order: coalitions by size and then as sorted index tuples,
profiles by id, misreports by preference code.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from augsp.domain import (
    Grid,
    Preference,
    Profile,
    efficiency_mask,
    efficient_set,
    enumerate_profiles,
    profile_codes,
)
from augsp.rules import Rule, evaluate, table_array

AXIOMS = (
    "onto",
    "sp",
    "pairwise_sp",
    "gsp",
    "wgsp",
    "weak_pairwise_sp",
    "efficiency",
    "tops_only",
    "anonymity",
)


@dataclass(frozen=True)
class DeviationWitness:
    profile: Profile
    coalition: tuple[int, ...]
    misreport: tuple[Preference, ...]
    outcome_truthful: int
    outcome_deviant: int

    @property
    def deviant_profile(self) -> Profile:
        grid = self.profile.grid
        return self.profile.replace(self.coalition, [grid.code_of[p] for p in self.misreport])

    def to_json(self) -> dict:
        grid = self.profile.grid
        return {
            "profile": self.profile.to_json(),
            "coalition": [i + 1 for i in self.coalition],
            "misreport": [p.to_json(grid) for p in self.misreport],
            "outcome_truthful": grid.fmt(self.outcome_truthful),
            "outcome_deviant": grid.fmt(self.outcome_deviant),
        }


@dataclass(frozen=True)
class InefficiencyWitness:
    profile: Profile
    outcome: int
    efficient: tuple[int, ...]

    def to_json(self) -> dict:
        grid = self.profile.grid
        return {
            "profile": self.profile.to_json(),
            "outcome": grid.fmt(self.outcome),
            "efficient_set": [grid.fmt(a) for a in self.efficient],
        }


@dataclass(frozen=True)
class ProfilePairWitness:
    """``profile`` should get the same outcome as the earlier ``reference`` but does not."""

    profile: Profile
    reference: Profile
    outcome: int
    reference_outcome: int

    def to_json(self) -> dict:
        grid = self.profile.grid
        return {
            "profile": self.profile.to_json(),
            "reference": self.reference.to_json(),
            "outcome": grid.fmt(self.outcome),
            "reference_outcome": grid.fmt(self.reference_outcome),
        }


@dataclass(frozen=True)
class MissingAlternativeWitness:
    grid: Grid
    alternative: int

    def to_json(self) -> dict:
        return {"missing_alternative": self.grid.fmt(self.alternative)}


@dataclass
class AxiomVerdict:
    axiom: str
    passed: bool
    witness: object = None
    max_coalition: int | None = None
    elapsed_ms: float | None = None
    note: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.passed and self.witness is None:
            raise ValueError("a failing verdict needs a witness")

    @property
    def name(self) -> str:
        if self.axiom in ("gsp", "wgsp") and self.max_coalition is not None:
            return f"{self.axiom}:{self.max_coalition}"
        return self.axiom

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "axiom": self.name,
            "pass": self.passed,
            "witness": None if self.witness is None else self.witness.to_json(),
        }
        if self.note:
            out["note"] = self.note
        if timing and self.elapsed_ms is not None:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        verdict = fn(*args, **kwargs)
        verdict.elapsed_ms = (time.perf_counter() - t0) * 1000.0
        return verdict

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- coalition deviations ---------------------------------------------------


def coalitions(n: int, max_size: int) -> list[tuple[int, ...]]:
    return [c for k in range(1, max_size + 1) for c in itertools.combinations(range(n), k)]


def _scan_coalition(table: np.ndarray, rank: np.ndarray, coalition: tuple[int, ...], strict_all: bool):
    """First (profile codes, misreport codes) where ``coalition`` profitably deviates.

    The broadcast array has one axis per agent (true report) followed by one
    axis per coalition member (misreport), so C order is profile id first,
    then misreport codes.
    """
    n = table.ndim
    d = table.shape[0]
    s = len(coalition)
    ndim = n + s

    def axis(k: int) -> np.ndarray:
        shape = [1] * ndim
        shape[k] = d
        return np.arange(d).reshape(shape)

    truth_idx = [axis(i) for i in range(n)]
    dev_idx = list(truth_idx)
    for k, i in enumerate(coalition):
        dev_idx[i] = axis(n + k)
    truthful = table.reshape(table.shape + (1,) * s)
    deviant = table[tuple(dev_idx)]

    weak = strict = None
    for i in coalition:
        before = rank[truth_idx[i], truthful]
        after = rank[truth_idx[i], deviant]
        w, st = after <= before, after < before
        if weak is None:
            weak, strict = w, st
        elif strict_all:
            strict = strict & st
        else:
            weak, strict = weak & w, strict | st
    bad = strict if strict_all else weak & strict
    hits = np.flatnonzero(bad)
    if hits.size == 0:
        return None
    full = np.unravel_index(hits[0], np.broadcast_shapes(bad.shape, (d,) * ndim))
    return tuple(int(c) for c in full[:n]), tuple(int(c) for c in full[n:])


@lru_cache(maxsize=None)
def _pool(workers: int) -> ProcessPoolExecutor:
    return ProcessPoolExecutor(max_workers=workers)


def _first_deviation(rule: Rule, max_coalition: int, strict_all: bool, workers: int):
    table = np.asarray(table_array(rule))
    rank = rule.grid.rank
    cs = coalitions(rule.n, max_coalition)
    if workers > 1 and len(cs) > 1:
        results = _pool(workers).map(
            _scan_coalition, itertools.repeat(table), itertools.repeat(rank), cs, itertools.repeat(strict_all)
        )
    else:
        results = (_scan_coalition(table, rank, c, strict_all) for c in cs)
    for c, hit in zip(cs, results):
        if hit is not None:
            codes, mis = hit
            profile = Profile(rule.grid, codes)
            dev = profile.replace(c, mis)
            return DeviationWitness(
                profile=profile,
                coalition=c,
                misreport=tuple(rule.grid.preferences[k] for k in mis),
                outcome_truthful=int(table[codes]),
                outcome_deviant=int(table[dev.codes]),
            )
    return None


def _bound(rule: Rule, max_coalition: int | None) -> int:
    k = rule.n if max_coalition is None else max_coalition
    if not 1 <= k <= rule.n:
        raise ValueError(f"coalition bound {k} outside 1..{rule.n}")
    return k


@_timed
def check_group_sp(rule: Rule, max_coalition: int | None = None, workers: int = 1) -> AxiomVerdict:
    """No coalition of at most ``max_coalition`` agents (default: all) can make
    every member weakly and some member strictly better off, by true preferences."""
    k = _bound(rule, max_coalition)
    w = _first_deviation(rule, k, strict_all=False, workers=workers)
    return AxiomVerdict("gsp", w is None, w, max_coalition=k)


@_timed
def check_wgsp(rule: Rule, max_coalition: int | None = None, workers: int = 1) -> AxiomVerdict:
    """No coalition of at most ``max_coalition`` agents can make every member strictly better off."""
    k = _bound(rule, max_coalition)
    w = _first_deviation(rule, k, strict_all=True, workers=workers)
    return AxiomVerdict("wgsp", w is None, w, max_coalition=k)


def check_sp(rule: Rule, workers: int = 1) -> AxiomVerdict:
    v = check_group_sp(rule, 1, workers=workers)
    v.axiom, v.max_coalition = "sp", None
    return v


def check_pairwise_sp(rule: Rule, workers: int = 1) -> AxiomVerdict:
    v = check_group_sp(rule, 2, workers=workers)
    v.axiom, v.max_coalition = "pairwise_sp", None
    return v


def check_weak_pairwise_sp(rule: Rule, workers: int = 1) -> AxiomVerdict:
    v = check_wgsp(rule, 2, workers=workers)
    v.axiom, v.max_coalition = "weak_pairwise_sp", None
    return v


# -- profile-wise properties -------------------------------------------------


@_timed
def check_efficiency(rule: Rule, profiles: Iterable[Profile] | None = None) -> AxiomVerdict:
    """``profiles`` restricts the scan, e.g. to a single hand-picked profile."""
    flat = np.asarray(table_array(rule)).ravel()
    mask = efficiency_mask(rule.grid, rule.n)
    if profiles is None:
        ids = np.arange(flat.size)
    else:
        ids = np.array(sorted({p.id for p in profiles}), dtype=np.int64)
    ok = mask[ids, flat[ids]]
    if ok.all():
        return AxiomVerdict("efficiency", True)
    pid = int(ids[np.argmin(ok)])
    eff = tuple(int(a) for a in np.flatnonzero(mask[pid]))
    w = InefficiencyWitness(Profile.from_id(rule.grid, rule.n, pid), int(flat[pid]), eff)
    return AxiomVerdict("efficiency", False, w)


@_timed
def check_onto(rule: Rule) -> AxiomVerdict:
    image = set(np.unique(np.asarray(table_array(rule))).tolist())
    missing = [a for a in range(rule.grid.m) if a not in image]
    note = "onto checked against grid points"
    if not missing:
        return AxiomVerdict("onto", True, note=note)
    return AxiomVerdict("onto", False, MissingAlternativeWitness(rule.grid, missing[0]), note=note)


def _first_mismatch(rule: Rule, axiom: str, ref_ids: np.ndarray) -> AxiomVerdict:
    flat = np.asarray(table_array(rule)).ravel()
    bad = np.flatnonzero(flat != flat[ref_ids])
    if bad.size == 0:
        return AxiomVerdict(axiom, True)
    pid = int(bad[0])
    rid = int(ref_ids[pid])
    w = ProfilePairWitness(
        Profile.from_id(rule.grid, rule.n, pid),
        Profile.from_id(rule.grid, rule.n, rid),
        int(flat[pid]),
        int(flat[rid]),
    )
    return AxiomVerdict(axiom, False, w)


def tops_classes(grid: Grid, n: int) -> np.ndarray:
    """For each profile id, the smallest id with the same indifferent set and peaks."""
    tops = grid.peak[profile_codes(grid, n)] + 1  # 0 marks indifference
    keys = tops @ ((grid.m + 1) ** np.arange(n - 1, -1, -1))
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return first[inverse.ravel()]


def anonymity_classes(grid: Grid, n: int) -> np.ndarray:
    """For each profile id, the id of its agent-sorted representative."""
    codes = np.sort(profile_codes(grid, n), axis=1)
    return codes @ (grid.size ** np.arange(n - 1, -1, -1))


@_timed
def check_tops_only(rule: Rule) -> AxiomVerdict:
    return _first_mismatch(rule, "tops_only", tops_classes(rule.grid, rule.n))


@_timed
def check_anonymity(rule: Rule) -> AxiomVerdict:
    return _first_mismatch(rule, "anonymity", anonymity_classes(rule.grid, rule.n))


def check(rule: Rule, axiom: str, workers: int = 1, max_coalition: int | None = None) -> AxiomVerdict:
    """Dispatch on an axiom tag; ``gsp:k`` and ``wgsp:k`` carry their coalition bound."""
    name, _, bound = axiom.partition(":")
    if bound:
        if name not in ("gsp", "wgsp"):
            raise ValueError(f"axiom {name!r} takes no coalition bound")
        max_coalition = int(bound)
    if name == "onto":
        return check_onto(rule)
    if name == "sp":
        return check_sp(rule, workers=workers)
    if name == "pairwise_sp":
        return check_pairwise_sp(rule, workers=workers)
    if name == "gsp":
        return check_group_sp(rule, max_coalition, workers=workers)
    if name == "wgsp":
        return check_wgsp(rule, max_coalition, workers=workers)
    if name == "weak_pairwise_sp":
        return check_weak_pairwise_sp(rule, workers=workers)
    if name == "efficiency":
        return check_efficiency(rule)
    if name == "tops_only":
        return check_tops_only(rule)
    if name == "anonymity":
        return check_anonymity(rule)
    raise ValueError(f"unknown axiom {axiom!r}; known: {', '.join(AXIOMS)}")


def check_all(rule: Rule, workers: int = 1) -> list[AxiomVerdict]:
    return [check(rule, a, workers=workers) for a in AXIOMS]


# -- independent re-verification ---------------------------------------------


def verify_witness(rule: Rule, verdict: AxiomVerdict) -> bool:
    """Re-evaluate ``rule`` at the witness and confirm it really is a violation."""
    w = verdict.witness
    if verdict.passed:
        return w is None
    if isinstance(w, DeviationWitness):
        truthful = evaluate(rule, w.profile)
        deviant = evaluate(rule, w.deviant_profile)
        if (truthful, deviant) != (w.outcome_truthful, w.outcome_deviant) or not w.coalition:
            return False
        if len(w.misreport) != len(w.coalition):
            return False
        rank = rule.grid.rank
        codes = w.profile.codes
        weak = [rank[codes[i], deviant] <= rank[codes[i], truthful] for i in w.coalition]
        strict = [rank[codes[i], deviant] < rank[codes[i], truthful] for i in w.coalition]
        if verdict.axiom in ("wgsp", "weak_pairwise_sp"):
            return all(strict)
        return all(weak) and any(strict)
    if isinstance(w, InefficiencyWitness):
        return evaluate(rule, w.profile) == w.outcome and w.outcome not in efficient_set(w.profile)
    if isinstance(w, ProfilePairWitness):
        a, b = w.profile, w.reference
        if evaluate(rule, a) != w.outcome or evaluate(rule, b) != w.reference_outcome:
            return False
        if w.outcome == w.reference_outcome:
            return False
        if verdict.axiom == "tops_only":
            return [p.peak for p in a.prefs] == [p.peak for p in b.prefs]
        return sorted(a.codes) == sorted(b.codes)
    if isinstance(w, MissingAlternativeWitness):
        return all(evaluate(rule, p) != w.alternative for p in enumerate_profiles(rule.grid, rule.n))
    return False


def implication_problems(verdicts: Sequence[AxiomVerdict], n: int) -> list[str]:
    """Breaks of GSP(n) => pairwise SP => SP, GSP(k) => WGSP(k), pairwise SP => weak pairwise SP."""
    by = {v.name: v.passed for v in verdicts}
    chain = [
        (f"gsp:{n}", "pairwise_sp"),
        ("pairwise_sp", "sp"),
        ("pairwise_sp", "weak_pairwise_sp"),
        (f"gsp:{n}", f"wgsp:{n}"),
        (f"wgsp:{n}", "weak_pairwise_sp"),
        ("efficiency", "onto"),
    ]
    return [f"{a} passes but {b} fails" for a, b in chain if by.get(a) and by.get(b) is False]
