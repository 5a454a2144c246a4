"""Grid of alternatives, the augmented single-peaked domain, and profiles.

Alternatives are grid indices ``0..m-1``; grid values are kept as exact
``Fraction`` objects and are only needed for parsing and reporting.  A
preference is either complete indifference or a strict single-peaked
ranking of grid indices.  Preferences are numbered canonically (the
indifferent relation first, then single-peaked orders by peak and ranking)
and a profile is an ``n``-tuple of such codes with a mixed-radix id, agent 0
most significant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

INDIFF = "indiff"


@dataclass(frozen=True)
class Grid:
    values: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        vals = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise ValueError("a grid needs at least two points")
        if vals[0] != 0 or vals[-1] != 1:
            raise ValueError("grid endpoints must be exactly 0 and 1")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise ValueError("grid values must be strictly increasing")

    @classmethod
    def uniform(cls, m: int) -> Grid:
        if m < 2:
            raise ValueError("a grid needs at least two points")
        return cls(tuple(Fraction(k, m - 1) for k in range(m)))

    @classmethod
    def parse(cls, text: str) -> Grid:
        """Parse ``"0,1/2,1"`` or ``"0,0.25,0.5,1"``."""
        try:
            return cls(tuple(Fraction(tok.strip()) for tok in text.split(",")))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad grid {text!r}: {exc}") from None

    @property
    def m(self) -> int:
        return len(self.values)

    def index_of(self, value) -> int:
        v = Fraction(value)
        try:
            return self.values.index(v)
        except ValueError:
            raise ValueError(f"{value} is not a grid point") from None

    def __repr__(self) -> str:
        return "Grid(" + ",".join(str(v) for v in self.values) + ")"

    # -- domain tables, computed once per grid ---------------------------

    @cached_property
    def preferences(self) -> tuple[Preference, ...]:
        return tuple(enumerate_preferences(self))

    @property
    def size(self) -> int:
        """Number of admissible preferences, ``1 + 2**(m-1)``."""
        return len(self.preferences)

    @cached_property
    def code_of(self) -> dict[Preference, int]:
        return {p: k for k, p in enumerate(self.preferences)}

    @cached_property
    def rank(self) -> np.ndarray:
        """``rank[code, a]``: position of ``a`` in the ranking, 0 = best.

        The indifferent relation has every alternative at position 0, so
        "weakly prefers b to a" is ``rank[c, b] <= rank[c, a]`` for every code.
        """
        out = np.zeros((self.size, self.m), dtype=np.int16)
        for k, p in enumerate(self.preferences):
            for pos, a in enumerate(p.ranking):
                out[k, a] = pos
        return out

    @cached_property
    def peak(self) -> np.ndarray:
        """Peak index per code, -1 for the indifferent relation."""
        return np.array([p.peak if p.peak is not None else -1 for p in self.preferences])

    def fmt(self, a: int):
        """JSON-friendly form of the grid value at index ``a``."""
        return format_value(self.values[a])


def format_value(v: Fraction):
    if v.denominator == 1:
        return int(v)
    d = v.denominator
    for q in (2, 5):
        while d % q == 0:
            d //= q
    # terminating decimals print exactly via float's shortest repr
    return float(v) if d == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class Preference:
    """Complete indifference when ``ranking`` is empty, else a strict order.

    ``ranking`` lists grid indices from best to worst.
    """

    ranking: tuple[int, ...] = ()

    @classmethod
    def indifferent(cls) -> Preference:
        return cls(())

    @property
    def is_indifferent(self) -> bool:
        return not self.ranking

    @property
    def peak(self) -> int | None:
        return self.ranking[0] if self.ranking else None

    def to_json(self, grid: Grid):
        if self.is_indifferent:
            return INDIFF
        return [grid.fmt(a) for a in self.ranking]

    def describe(self, grid: Grid) -> str:
        if self.is_indifferent:
            return "R0"
        return "(" + ",".join(str(grid.values[a]) for a in self.ranking) + ")"


def validate_preference(ranking: Sequence[int], grid: Grid) -> bool:
    """True iff every prefix of ``ranking`` is a contiguous block holding the peak."""
    ranking = tuple(ranking)
    if sorted(ranking) != list(range(grid.m)):
        raise ValueError(f"ranking {ranking} is not a permutation of 0..{grid.m - 1}")
    lo = hi = ranking[0]
    for a in ranking[1:]:
        if a == lo - 1:
            lo = a
        elif a == hi + 1:
            hi = a
        else:
            return False
    return True


def weakly_prefers(p: Preference, a: int, b: int) -> bool:
    """``a R b``: always true for the indifferent relation."""
    if p.is_indifferent or a == b:
        return True
    return p.ranking.index(a) < p.ranking.index(b)


def strictly_prefers(p: Preference, a: int, b: int) -> bool:
    return not p.is_indifferent and a != b and p.ranking.index(a) < p.ranking.index(b)


def _single_peaked_from(peak: int, m: int) -> Iterator[tuple[int, ...]]:
    # interleave the left walk (peak-1 .. 0) and the right walk (peak+1 .. m-1)
    left = list(range(peak - 1, -1, -1))
    right = list(range(peak + 1, m))
    for picks in itertools.combinations(range(m - 1), len(left)):
        chosen = set(picks)
        li = ri = 0
        order = [peak]
        for slot in range(m - 1):
            if slot in chosen:
                order.append(left[li])
                li += 1
            else:
                order.append(right[ri])
                ri += 1
        yield tuple(order)


def enumerate_preferences(grid: Grid) -> list[Preference]:
    """R0 first, then single-peaked orders sorted by (peak, ranking)."""
    strict = sorted(
        (r for peak in range(grid.m) for r in _single_peaked_from(peak, grid.m)),
        key=lambda r: (r[0], r),
    )
    return [Preference.indifferent()] + [Preference(r) for r in strict]


@dataclass(frozen=True)
class Profile:
    grid: Grid
    codes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.codes) < 2:
            raise ValueError("a profile needs at least two agents")
        d = self.grid.size
        if any(not 0 <= c < d for c in self.codes):
            raise ValueError(f"preference code out of range in {self.codes}")

    @classmethod
    def from_prefs(cls, grid: Grid, prefs: Sequence[Preference]) -> Profile:
        try:
            return cls(grid, tuple(grid.code_of[p] for p in prefs))
        except KeyError as exc:
            raise ValueError(f"{exc.args[0]} is not in the domain of {grid}") from None

    @classmethod
    def from_id(cls, grid: Grid, n: int, pid: int) -> Profile:
        return cls(grid, decode(pid, grid.size, n))

    @property
    def n(self) -> int:
        return len(self.codes)

    @property
    def prefs(self) -> tuple[Preference, ...]:
        return tuple(self.grid.preferences[c] for c in self.codes)

    @property
    def id(self) -> int:
        return encode(self.codes, self.grid.size)

    def replace(self, agents: Sequence[int], codes: Sequence[int]) -> Profile:
        new = list(self.codes)
        for i, c in zip(agents, codes):
            new[i] = c
        return Profile(self.grid, tuple(new))

    def to_json(self) -> list:
        return [p.to_json(self.grid) for p in self.prefs]

    def describe(self) -> str:
        return "[" + ", ".join(p.describe(self.grid) for p in self.prefs) + "]"


def encode(codes: Sequence[int], radix: int) -> int:
    pid = 0
    for c in codes:
        pid = pid * radix + c
    return pid


def decode(pid: int, radix: int, n: int) -> tuple[int, ...]:
    if not 0 <= pid < radix**n:
        raise ValueError(f"profile id {pid} out of range")
    out = []
    for _ in range(n):
        pid, c = divmod(pid, radix)
        out.append(c)
    return tuple(reversed(out))


def enumerate_profiles(grid: Grid, n: int) -> Iterator[Profile]:
    if n < 2:
        raise ValueError("need at least two agents")
    for codes in itertools.product(range(grid.size), repeat=n):
        yield Profile(grid, codes)


@dataclass(frozen=True)
class PeakSummary:
    peaks: frozenset[int]
    tau_min: int | None
    tau_max: int | None

    @property
    def all_indifferent(self) -> bool:
        return not self.peaks


def peak_summary(profile: Profile) -> PeakSummary:
    peaks = frozenset(p.peak for p in profile.prefs if not p.is_indifferent)
    if not peaks:
        return PeakSummary(peaks, None, None)
    return PeakSummary(peaks, min(peaks), max(peaks))


def efficient_set(profile: Profile) -> frozenset[int]:
    s = peak_summary(profile)
    if s.all_indifferent:
        return frozenset(range(profile.grid.m))
    return frozenset(range(s.tau_min, s.tau_max + 1))


def efficient_set_star(profile: Profile) -> frozenset[int]:
    """Alternatives that no other alternative beats strictly for every agent."""
    m = profile.grid.m
    prefs = profile.prefs
    return frozenset(
        a
        for a in range(m)
        if not any(
            b != a and all(strictly_prefers(p, b, a) for p in prefs) for b in range(m)
        )
    )


# -- array views used by the checkers and the search -----------------------


def profile_codes(grid: Grid, n: int) -> np.ndarray:
    """All profiles as a ``(size**n, n)`` code matrix in id order."""
    return np.array(list(itertools.product(range(grid.size), repeat=n)), dtype=np.int64).reshape(-1, n)


def efficiency_mask(grid: Grid, n: int) -> np.ndarray:
    """``mask[pid, a]`` is True iff ``a`` is efficient at profile ``pid``."""
    codes = profile_codes(grid, n)
    peaks = grid.peak[codes]
    big = grid.m
    lo = np.where(peaks >= 0, peaks, big).min(axis=1)
    hi = peaks.max(axis=1)
    alts = np.arange(grid.m)
    mask = (alts[None, :] >= lo[:, None]) & (alts[None, :] <= hi[:, None])
    mask[hi < 0] = True
    return mask
