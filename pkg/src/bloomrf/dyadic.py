"""Two-path dyadic decomposition of arbitrary lookup intervals.

An interval ``[lo, hi]`` is cut into maximal dyadic intervals (the
*pieces*, at most two per level) by walking one path of nested covering
intervals along each bound.  Coverings above the split are shared by
both paths; below it each side keeps its own chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import QueryBoundsError

SIDE_BOTH = 0
SIDE_LEFT = 1
SIDE_RIGHT = 2

SIDE_NAMES = {SIDE_BOTH: "both", SIDE_LEFT: "left", SIDE_RIGHT: "right"}

# Raw entries are (level, lo, hi, side) tuples; the range-lookup hot path
# plans directly from them, the dataclass view below is for API users.


def two_path_raw(
    d: int, lo: int, hi: int
) -> tuple[list[tuple[int, int, int, int]], list[tuple[int, int, int, int]]]:
    """Decompose ``[lo, hi]``: (pieces, coverings) as (level, lo, hi, side)."""
    if lo > hi:
        raise QueryBoundsError(f"inverted interval [{lo}, {hi}]")
    if lo < 0 or hi >= (1 << d):
        raise QueryBoundsError(f"interval [{lo}, {hi}] outside the {d}-bit domain")

    pieces: list[tuple[int, int, int, int]] = []
    coverings: list[tuple[int, int, int, int]] = []

    # Phase 1: one dyadic interval covers all of I.
    level, a, b = d, 0, (1 << d) - 1
    while True:
        if a == lo and b == hi:
            pieces.append((level, a, b, SIDE_BOTH))
            return pieces, coverings
        coverings.append((level, a, b, SIDE_BOTH))
        level -= 1
        mid = a + (1 << level)
        if hi < mid:
            b = mid - 1
        elif lo >= mid:
            a = mid
        else:
            break

    # Phase 2: the path splits; [a, mid-1] holds lo, [mid, b] holds hi.
    if a == lo:
        pieces.append((level, a, mid - 1, SIDE_LEFT))
    else:
        lvl, ca, cb = level, a, mid - 1
        while True:
            coverings.append((lvl, ca, cb, SIDE_LEFT))
            lvl -= 1
            m = ca + (1 << lvl)
            if lo >= m:
                if lo == m:
                    pieces.append((lvl, m, cb, SIDE_LEFT))
                    break
                ca = m
            else:
                pieces.append((lvl, m, cb, SIDE_LEFT))
                cb = m - 1

    if b == hi:
        pieces.append((level, mid, b, SIDE_RIGHT))
    else:
        lvl, ca, cb = level, mid, b
        while True:
            coverings.append((lvl, ca, cb, SIDE_RIGHT))
            lvl -= 1
            m = ca + (1 << lvl)
            if hi < m:
                if hi == m - 1:
                    pieces.append((lvl, ca, m - 1, SIDE_RIGHT))
                    break
                cb = m - 1
            else:
                pieces.append((lvl, ca, m - 1, SIDE_RIGHT))
                ca = m

    return pieces, coverings


@dataclass(frozen=True)
class DyadicPiece:
    """One dyadic interval fully inside the query."""

    level: int
    lo: int
    hi: int
    side: int = SIDE_BOTH


@dataclass(frozen=True)
class CoverEntry:
    """A dyadic interval covering the query (or one of its bounds)."""

    level: int
    lo: int
    hi: int
    side: int


@dataclass(frozen=True)
class DyadicDecomposition:
    """Pieces plus the covering intervals at the configured layer levels."""

    d: int
    lo: int
    hi: int
    pieces: tuple[DyadicPiece, ...]
    coverings_by_level: dict[int, tuple[CoverEntry, ...]]
    layer_levels: tuple[int, ...]
    exact_level: Optional[int]

    def layer_coverings(self, level: int) -> tuple[CoverEntry, ...]:
        return self.coverings_by_level.get(level, ())

    @property
    def exact_coverings(self) -> tuple[CoverEntry, ...]:
        if self.exact_level is None:
            return ()
        return self.coverings_by_level.get(self.exact_level, ())


def layer_levels_from_deltas(deltas_top_first: Sequence[int]) -> tuple[int, ...]:
    """Bottom-up cumulative levels for a top-first delta vector."""
    levels = []
    acc = 0
    for delta in reversed(deltas_top_first):
        levels.append(acc)
        acc += delta
    return tuple(levels)


def decompose(
    d: int,
    l_key: int,
    r_key: int,
    deltas: Sequence[int],
    exact_level: Optional[int] = None,
) -> DyadicDecomposition:
    """Decompose ``[l_key, r_key]`` and report coverings at layer levels.

    ``deltas`` is the top-first level-distance vector; coverings are
    reported at the layer levels it induces plus the exact level when
    one is configured.  Pieces are independent of the layer layout.
    """
    pieces, coverings = two_path_raw(d, l_key, r_key)
    levels = layer_levels_from_deltas(deltas)
    keep = set(levels)
    if exact_level is not None:
        keep.add(exact_level)
    by_level: dict[int, list[CoverEntry]] = {}
    for lvl, lo, hi, side in coverings:
        if lvl in keep:
            by_level.setdefault(lvl, []).append(CoverEntry(lvl, lo, hi, side))
    pieces.sort(key=lambda p: p[1])
    return DyadicDecomposition(
        d=d,
        lo=l_key,
        hi=r_key,
        pieces=tuple(DyadicPiece(*p) for p in pieces),
        coverings_by_level={lvl: tuple(v) for lvl, v in by_level.items()},
        layer_levels=levels,
        exact_level=exact_level,
    )
