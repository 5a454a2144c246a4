"""Social choice rules on a grid: target rules with a default, the two-agent
default dictator, the weakly group strategy-proof counterexample, and
explicit outcome tables.

Every rule answers ``evaluate(rule, profile)`` with a grid index.  Checkers
and the search work on tables, see :func:`materialize_table`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from augsp.domain import Grid, Profile, enumerate_profiles, peak_summary, profile_codes


@dataclass(frozen=True)
class Rule:
    grid: Grid
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("rules need at least two agents")

    def evaluate(self, profile: Profile) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TargetDefault(Rule):
    x: int = 0
    y: int = 0

    def __post_init__(self) -> None:
        super().__post_init__()
        for v in (self.x, self.y):
            if not 0 <= v < self.grid.m:
                raise ValueError(f"grid index {v} out of range")

    def evaluate(self, profile: Profile) -> int:
        return eval_target_default(self.x, self.y, profile)

    def to_json(self) -> dict:
        return {"kind": "target", "x": self.grid.fmt(self.x), "y": self.grid.fmt(self.y)}


@dataclass(frozen=True)
class DefaultDictator(Rule):
    def __post_init__(self) -> None:
        super().__post_init__()
        if self.n != 2:
            raise ValueError("the default dictator rule is defined for two agents only")

    def evaluate(self, profile: Profile) -> int:
        return eval_default_dictator(profile)

    def to_json(self) -> dict:
        return {"kind": "fd"}


@dataclass(frozen=True)
class WgspExample(Rule):
    def evaluate(self, profile: Profile) -> int:
        return eval_wgsp_example(profile)

    def to_json(self) -> dict:
        return {"kind": "fstar"}


@dataclass(frozen=True, eq=False)
class TableRule(Rule):
    outcomes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        super().__post_init__()
        object.__setattr__(self, "outcomes", tuple(int(v) for v in self.outcomes))
        want = self.grid.size**self.n
        if len(self.outcomes) != want:
            raise ValueError(f"table has {len(self.outcomes)} entries, expected {want}")
        if any(not 0 <= v < self.grid.m for v in self.outcomes):
            raise ValueError("table entry is not a grid index")

    def evaluate(self, profile: Profile) -> int:
        return self.outcomes[profile.id]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TableRule):
            return NotImplemented
        return (self.grid, self.n, self.outcomes) == (other.grid, other.n, other.outcomes)

    def __hash__(self) -> int:
        return hash((self.grid, self.n, self.outcomes))

    def to_json(self) -> dict:
        return {"kind": "table", "outcomes": [self.grid.fmt(v) for v in self.outcomes]}


def eval_target_default(x: int, y: int, profile: Profile) -> int:
    s = peak_summary(profile)
    if s.all_indifferent:
        return y
    if x < s.tau_min:
        return s.tau_min
    if x > s.tau_max:
        return s.tau_max
    return x


def eval_default_dictator(profile: Profile) -> int:
    if profile.n != 2:
        raise ValueError("the default dictator rule is defined for two agents only")
    first, second = profile.prefs
    if not first.is_indifferent:
        return first.peak
    if not second.is_indifferent:
        return second.peak
    return 0


def eval_wgsp_example(profile: Profile) -> int:
    first, second = profile.prefs[:2]
    if not first.is_indifferent:
        return first.peak
    last = profile.grid.m - 1
    # "0 P2 1": agent 2 strictly ranks the left endpoint above the right one
    if not second.is_indifferent and second.ranking.index(0) < second.ranking.index(last):
        return 0
    return last


def evaluate(rule: Rule, profile: Profile) -> int:
    if profile.grid != rule.grid or profile.n != rule.n:
        raise ValueError(
            f"profile ({profile.grid}, n={profile.n}) does not match rule ({rule.grid}, n={rule.n})"
        )
    return rule.evaluate(profile)


def materialize_table(rule: Rule) -> TableRule:
    if isinstance(rule, TableRule):
        return rule
    return TableRule(rule.grid, rule.n, tuple(rule.evaluate(p) for p in enumerate_profiles(rule.grid, rule.n)))


@lru_cache(maxsize=128)
def table_array(rule: Rule) -> np.ndarray:
    """Outcomes as a read-only ``n``-dimensional array indexed by preference codes."""
    t = materialize_table(rule)
    arr = np.array(t.outcomes, dtype=np.int64).reshape((rule.grid.size,) * rule.n)
    arr.flags.writeable = False
    return arr


def recognize_target_default(table: Rule) -> set[tuple[int, int]]:
    """The (x, y) pairs whose target rule agrees with ``table`` everywhere.

    The target is pinned by the outcome where agent 1 peaks at 0, agent 2
    peaks at 1 and everyone else is indifferent; the default is pinned by
    the all-indifferent outcome.  At most one pair can match.
    """
    grid, n = table.grid, table.n
    t = np.asarray(materialize_table(table).outcomes)
    lo_code = grid.code_of[grid.preferences[1]]  # first order peaking at 0
    hi_code = grid.size - 1  # the only order peaking at the right endpoint
    spread = Profile(grid, (lo_code, hi_code) + (0,) * (n - 2))
    x, y = int(t[spread.id]), int(t[0])
    if np.array_equal(t, target_outcomes(grid, n, x, y)):
        return {(x, y)}
    return set()


def target_outcomes(grid: Grid, n: int, x: int, y: int) -> np.ndarray:
    """Vectorized target-rule table in profile-id order."""
    peaks = grid.peak[profile_codes(grid, n)]
    lo = np.where(peaks >= 0, peaks, grid.m).min(axis=1)
    hi = peaks.max(axis=1)
    out = np.clip(x, lo, np.maximum(hi, lo))
    out[hi < 0] = y
    return out


def load_table_file(path: str | Path, grid: Grid, n: int) -> TableRule:
    """One outcome value per line, in profile-id order; blank lines and ``#`` comments ignored."""
    values = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            values.append(grid.index_of(line))
    return TableRule(grid, n, tuple(values))


def write_table_file(path: str | Path, table: TableRule) -> None:
    Path(path).write_text("".join(f"{table.grid.values[v]}\n" for v in table.outcomes))
