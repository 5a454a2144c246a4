"""Backtracking enumeration of outcome tables satisfying a set of axioms.

Profiles are assigned one at a time (fewest indifferent agents first, then
by id).  Coalition axioms are enforced incrementally: whenever a profile
receives a value, every already-assigned profile that differs from it in at
most ``k`` agents is checked in both directions.  For a pair of profiles
``R`` (truth) and ``R'`` (report) differing exactly on agents ``D``, a
coalition ``S`` with ``D <= S`` and ``|S| <= k`` profitably deviates iff
every member of ``D`` weakly gains and either some member of ``D`` strictly
gains or ``|D| < k`` and some agent outside ``D`` strictly gains (that agent
joins and reports truthfully).  Under the all-strict variant only ``S = D``
matters.

Efficiency is applied as a restriction of each profile's value set before
the search; tops-onlyness and anonymity become equality constraints inside
profile classes; onto-ness prunes when the missing alternatives can no
longer be covered.  Forbidden axioms are checked on complete tables.
"""

from __future__ import annotations

import itertools
import sys
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from augsp import axioms
from augsp.domain import Grid, efficiency_mask, profile_codes
from augsp.rules import Rule, TableRule, recognize_target_default

MAX_PROFILES = 200
MAX_GRID = 3


class SearchGuardError(ValueError):
    """The instance exceeds the tractability guard and ``force`` was not set."""


def normalize_axiom(tag: str, n: int) -> str:
    """Canonical tag: ``gsp``/``wgsp`` always carry their coalition bound."""
    name, _, bound = tag.strip().partition(":")
    if name not in axioms.AXIOMS:
        raise ValueError(f"unknown axiom {tag!r}; known: {', '.join(axioms.AXIOMS)}")
    if name in ("gsp", "wgsp"):
        k = int(bound) if bound else n
        if not 1 <= k <= n:
            raise ValueError(f"coalition bound {k} outside 1..{n}")
        return f"{name}:{k}"
    if bound:
        raise ValueError(f"axiom {name!r} takes no coalition bound")
    return name


@dataclass(frozen=True)
class SearchSpec:
    grid: Grid
    n: int
    required: frozenset[str] = frozenset()
    forbidden: frozenset[str] = frozenset()
    limit: int | None = None
    seed: tuple[tuple[int, int], ...] = ()
    force: bool = False

    def __post_init__(self) -> None:
        req = frozenset(normalize_axiom(a, self.n) for a in self.required)
        forb = frozenset(normalize_axiom(a, self.n) for a in self.forbidden)
        object.__setattr__(self, "required", req)
        object.__setattr__(self, "forbidden", forb)
        if req & forb:
            raise ValueError(f"axioms both required and forbidden: {sorted(req & forb)}")
        if isinstance(self.seed, dict):
            object.__setattr__(self, "seed", tuple(sorted(self.seed.items())))
        if self.limit is not None and self.limit < 1:
            raise ValueError("limit must be positive")

    @property
    def num_profiles(self) -> int:
        return self.grid.size**self.n

    def check_guard(self) -> None:
        if self.force:
            return
        if self.num_profiles > MAX_PROFILES or self.grid.m > MAX_GRID:
            raise SearchGuardError(
                f"{self.num_profiles} profiles on a {self.grid.m}-point grid exceeds the guard "
                f"(at most {MAX_PROFILES} profiles and {MAX_GRID} grid points); use force to override"
            )


def seed_from_rule(rule: Rule) -> tuple[tuple[int, int], ...]:
    """Pin every profile to ``rule``'s outcome."""
    from augsp.rules import materialize_table

    return tuple(enumerate(materialize_table(rule).outcomes))


class _Problem:
    def __init__(self, spec: SearchSpec):
        grid, n = spec.grid, spec.n
        self.spec = spec
        self.m = m = grid.m
        self.n = n
        codes = profile_codes(grid, n)
        num = codes.shape[0]
        self.num = num
        indiff = (codes == 0).sum(axis=1)
        self.order = sorted(range(num), key=lambda p: (int(indiff[p]), p))

        allowed = np.ones((num, m), dtype=bool)
        if "efficiency" in spec.required:
            allowed &= efficiency_mask(grid, n)
        for pid, v in spec.seed:
            row = np.zeros(m, dtype=bool)
            row[v] = True
            allowed[pid] &= row
        self.values = [tuple(int(a) for a in np.flatnonzero(allowed[p])) for p in range(num)]

        self.gsp_k = max((int(t.split(":")[1]) for t in spec.required if t.startswith("gsp:")), default=0)
        if "pairwise_sp" in spec.required:
            self.gsp_k = max(self.gsp_k, 2)
        if "sp" in spec.required:
            self.gsp_k = max(self.gsp_k, 1)
        self.wgsp_k = max((int(t.split(":")[1]) for t in spec.required if t.startswith("wgsp:")), default=0)
        if "weak_pairwise_sp" in spec.required:
            self.wgsp_k = max(self.wgsp_k, 2)
        if self.wgsp_k <= self.gsp_k:
            self.wgsp_k = 0  # implied
        kmax = max(self.gsp_k, self.wgsp_k)

        # strict[p][a][b] / weak[p][a][b]: agent bitmasks preferring b to a at p
        rank = grid.rank[codes]  # (num, n, m)
        bit = 1 << np.arange(n)
        self.strict = [
            [[int(bit[rank[p, :, b] < rank[p, :, a]].sum()) for b in range(m)] for a in range(m)]
            for p in range(num)
        ]
        self.weak = [
            [[int(bit[rank[p, :, b] <= rank[p, :, a]].sum()) for b in range(m)] for a in range(m)]
            for p in range(num)
        ]

        self.neighbors: list[list[tuple[int, int, int]]] = [[] for _ in range(num)]
        if kmax:
            for p in range(num):
                diff = codes != codes[p]
                sizes = diff.sum(axis=1)
                masks = diff @ bit
                for q in np.flatnonzero((sizes >= 1) & (sizes <= kmax)):
                    self.neighbors[p].append((int(q), int(masks[q]), int(sizes[q])))

        self.classes: list[list[int]] = [[] for _ in range(num)]
        for tag, reps in (
            ("tops_only", lambda: axioms.tops_classes(grid, n)),
            ("anonymity", lambda: axioms.anonymity_classes(grid, n)),
        ):
            if tag in spec.required:
                groups: dict[int, list[int]] = {}
                for p, r in enumerate(reps()):
                    groups.setdefault(int(r), []).append(p)
                for members in groups.values():
                    for p in members:
                        self.classes[p].extend(q for q in members if q != p)

        self.onto = "onto" in spec.required
        full = (1 << m) - 1
        # cover[d]: alternatives still assignable at depths d..end
        self.cover = [0] * (num + 1)
        for d in range(num - 1, -1, -1):
            p = self.order[d]
            self.cover[d] = self.cover[d + 1] | sum(1 << v for v in self.values[p])
        self.full = full
        self.leaf_checks = sorted(spec.forbidden)

    def _violates(self, truth: int, a: int, b: int, dmask: int, dsize: int) -> bool:
        """Truth profile gets ``a``; reporting the other profile would give ``b``."""
        if a == b:
            return False
        strict = self.strict[truth][a][b]
        if self.gsp_k >= dsize and not dmask & ~self.weak[truth][a][b]:
            if dmask & strict or (dsize < self.gsp_k and strict & ~dmask):
                return True
        if self.wgsp_k >= dsize and not dmask & ~strict:
            return True
        return False

    def consistent(self, assign: list[int], p: int, v: int) -> bool:
        """Can ``p`` take ``v`` given the assigned profiles (``-1`` = unassigned)?"""
        for q in self.classes[p]:
            w = assign[q]
            if w >= 0 and w != v:
                return False
        for q, dmask, dsize in self.neighbors[p]:
            w = assign[q]
            if w < 0 or w == v:
                continue
            if self._violates(p, v, w, dmask, dsize) or self._violates(q, w, v, dmask, dsize):
                return False
        return True

    def _leaf_ok(self, assign: list[int]) -> bool:
        if not self.leaf_checks:
            return True
        table = TableRule(self.spec.grid, self.n, tuple(assign))
        return all(not axioms.check(table, tag).passed for tag in self.leaf_checks)

    def dfs(self, assign: list[int], depth: int, out: list, limit: int | None, stop_depth: int | None = None):
        """Append solutions (or, at ``stop_depth``, partial states) to ``out`` in DFS order."""
        if limit is not None and len(out) >= limit:
            return
        if stop_depth is not None and depth == stop_depth:
            out.append((list(assign), depth))
            return
        if depth == self.num:
            if self._leaf_ok(assign):
                out.append(tuple(assign))
            return
        p = self.order[depth]
        for v in self.values[p]:
            if not self.consistent(assign, p, v):
                continue
            assign[p] = v
            if self.onto and not self._coverable(assign, depth + 1):
                assign[p] = -1
                continue
            self.dfs(assign, depth + 1, out, limit, stop_depth)
            assign[p] = -1
            if limit is not None and len(out) >= limit:
                return

    def _coverable(self, assign: list[int], depth: int) -> bool:
        seen = 0
        for d in range(depth):
            seen |= 1 << assign[self.order[d]]
        missing = self.full & ~seen
        if missing & ~self.cover[depth]:
            return False
        return bin(missing).count("1") <= self.num - depth


@lru_cache(maxsize=8)
def _problem(spec: SearchSpec) -> _Problem:
    return _Problem(spec)


def _solve_subtree(spec: SearchSpec, assign: list[int], depth: int) -> list[tuple[int, ...]]:
    out: list = []
    _problem(spec).dfs(list(assign), depth, out, spec.limit)
    return out


def _frontier(problem: _Problem, workers: int) -> list[tuple[list[int], int]]:
    target = 4 * workers
    for depth in range(1, problem.num + 1):
        states: list = []
        problem.dfs([-1] * problem.num, 0, states, None, stop_depth=depth)
        if len(states) >= target or not states:
            return states
    return states


def enumerate_rules(spec: SearchSpec, workers: int = 1) -> list[TableRule]:
    """All tables passing ``spec.required`` and failing ``spec.forbidden``, in DFS order."""
    spec.check_guard()
    problem = _problem(spec)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * problem.num + 100))
    if workers <= 1:
        found: list = []
        problem.dfs([-1] * problem.num, 0, found, spec.limit)
    else:
        states = _frontier(problem, workers)
        pool = axioms._pool(workers)
        found = []
        # subtrees come back in frontier order, which is the sequential DFS order
        for part in pool.map(_solve_subtree, itertools.repeat(spec), [s for s, _ in states], [d for _, d in states]):
            found.extend(part)
            if spec.limit is not None and len(found) >= spec.limit:
                break
        if spec.limit is not None:
            found = found[: spec.limit]
    return [TableRule(spec.grid, spec.n, t) for t in found]


def find_counterexample_rule(spec: SearchSpec, workers: int = 1) -> TableRule | None:
    first = enumerate_rules(
        SearchSpec(spec.grid, spec.n, spec.required, spec.forbidden, 1, spec.seed, spec.force), workers
    )
    return first[0] if first else None


def brute_force_rules(grid: Grid, n: int, required, forbidden=()) -> list[TableRule]:
    """Filter every table with the axiom checkers; only for tiny instances."""
    num = grid.size**n
    if grid.m**num > 5000:
        raise SearchGuardError(f"{grid.m ** num} tables is too many to filter")
    out = []
    for outcomes in itertools.product(range(grid.m), repeat=num):
        t = TableRule(grid, n, outcomes)
        if all(axioms.check(t, a).passed for a in required) and not any(
            axioms.check(t, a).passed for a in forbidden
        ):
            out.append(t)
    return out


def classify_rules(tables: list[TableRule], with_axioms: bool = True) -> dict:
    summary: dict = {"total": len(tables), "target": [], "other": []}
    if not tables:
        return summary
    counts: Counter = Counter()
    for k, t in enumerate(tables):
        match = recognize_target_default(t)
        if match:
            ((x, y),) = match
            summary["target"].append({"index": k, "x": t.grid.fmt(x), "y": t.grid.fmt(y)})
        else:
            summary["other"].append(k)
        if with_axioms:
            for v in axioms.check_all(t):
                counts[v.name] += v.passed
    if with_axioms:
        names = [v.name for v in axioms.check_all(tables[0])]
        summary["axiom_pass_counts"] = {name: counts[name] for name in names}
    return summary
