"""
Line Percolation Engine
=======================

r-neighbor line percolation on an incidence plane: a line holding at least
r infected points becomes infected and infects all of its points. Rounds
are synchronous: every line that reaches the threshold from the points of
round s-1 is infected in round s.

Two layers:
- Value layer (InfectionState, spread_round, closure -> InfectionTrace)
  records every round and is what callers inspect.
- Mask layer (closure_mask, time_mask) works on raw int masks with mutable
  per-line counters and is what searches and Monte Carlo call in bulk.

Public API:
    InfectionState / RoundDelta / InfectionTrace
    spread_round, closure
    percolates, percolation_time, closure_points, closure_size
    closure_mask, time_mask
    is_minimal_percolating
    one_by_one_verify, greedy_percolating_sequence
    covered_by_k_lines, contains_r_broom, fully_infected_lines, r_lines_complete_next
"""

from __future__ import annotations

import heapq
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from math import comb
from typing import Any

from common.bitset import LineSet, PointSet, iter_bits
from common.exceptions import BadRangeError, NotAPermutationError

from .plane import IncidencePlane

logger = logging.getLogger(__name__)

# covered_by_k_lines is exact up to this many lines
EXACT_COVER_LIMIT = 4


# ============================================================================
# Value Layer
# ============================================================================


@dataclass(frozen=True)
class InfectionState:
    """
    Snapshot of the infection after some number of rounds.

    Attributes:
        points: Infected points
        lines: Infected lines (every point of each is in `points`)
        round: Number of rounds that added points so far
        counters: counters[l] = |points ∩ l|
    """

    points: PointSet
    lines: LineSet
    round: int
    counters: tuple[int, ...]

    @classmethod
    def initial(cls, plane: IncidencePlane, points: PointSet) -> InfectionState:
        bits = points.bits
        return cls(
            points=points,
            lines=LineSet.empty(plane.num_lines),
            round=0,
            counters=tuple((mask & bits).bit_count() for mask in plane.line_points),
        )


@dataclass(frozen=True)
class RoundDelta:
    """What one round changed. `fixpoint` means no new point was infected."""

    round: int
    new_lines: tuple[int, ...]
    new_points: tuple[int, ...]
    fixpoint: bool

    def to_dict(self) -> dict[str, Any]:
        return {"round": self.round, "new_lines": list(self.new_lines), "new_points": list(self.new_points)}


def spread_round(plane: IncidencePlane, state: InfectionState, r: int) -> tuple[InfectionState, RoundDelta]:
    """
    Run one synchronous round.

    Every uninfected line with counter >= r is infected, then every point on
    those lines. The round number advances only when a point was added; a
    round that infects lines but no points is the fixpoint.

    Returns:
        (new state, delta)
    """
    _check_r(r)
    new_lines = [
        line for line, count in enumerate(state.counters) if count >= r and not state.lines.bits >> line & 1
    ]
    line_bits = state.lines.bits
    point_bits = state.points.bits
    gained = 0
    for line in new_lines:
        line_bits |= 1 << line
        gained |= plane.line_points[line]
    gained &= ~point_bits

    counters = list(state.counters)
    for point in iter_bits(gained):
        for line in plane.lines_of_point[point]:
            counters[line] += 1

    fixpoint = gained == 0
    next_round = state.round if fixpoint else state.round + 1
    new_state = InfectionState(
        points=PointSet(plane.num_points, point_bits | gained),
        lines=LineSet(plane.num_lines, line_bits),
        round=next_round,
        counters=tuple(counters),
    )
    delta = RoundDelta(
        round=state.round + 1, new_lines=tuple(new_lines), new_points=tuple(iter_bits(gained)), fixpoint=fixpoint
    )
    return new_state, delta


@dataclass(frozen=True)
class InfectionTrace:
    """
    Full record of a closure computation.

    Attributes:
        initial: Initially infected set A
        r: Infection threshold
        rounds: One delta per round that added points, in order
        closure: cl(A)
        infected_lines: Lines infected by the fixpoint
    """

    initial: PointSet
    r: int
    rounds: tuple[RoundDelta, ...]
    closure: PointSet
    infected_lines: LineSet

    @property
    def percolates(self) -> bool:
        return self.closure.is_full()

    @property
    def closure_rounds(self) -> int:
        """Smallest k with A^k = A^(k+1)."""
        return len(self.rounds)

    @property
    def time(self) -> int | None:
        """Percolation time; None when the set does not percolate."""
        return self.closure_rounds if self.percolates else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "r": self.r,
            "initial": self.initial.indices(),
            "percolates": self.percolates,
            "time": self.time,
            "closure_rounds": self.closure_rounds,
            "closure_size": len(self.closure),
            "rounds": [delta.to_dict() for delta in self.rounds],
        }


def closure(plane: IncidencePlane, points: PointSet, r: int) -> InfectionTrace:
    """Iterate spread_round to the fixpoint and record every round."""
    _check_r(r)
    state = InfectionState.initial(plane, points)
    rounds: list[RoundDelta] = []
    while True:
        state, delta = spread_round(plane, state, r)
        if delta.fixpoint:
            break
        rounds.append(delta)
        logger.debug("round %d: %d new lines, %d new points", delta.round, len(delta.new_lines), len(delta.new_points))
    return InfectionTrace(
        initial=points, r=r, rounds=tuple(rounds), closure=state.points, infected_lines=state.lines
    )


# ============================================================================
# Mask Layer
# ============================================================================


def closure_mask(plane: IncidencePlane, bits: int, r: int) -> int:
    """cl(A) as an int mask."""
    return _run(plane, bits, r)[0]


def time_mask(plane: IncidencePlane, bits: int, r: int) -> int | None:
    """Percolation time of an int mask, None when it does not percolate."""
    closed, rounds = _run(plane, bits, r)
    return rounds if closed == (1 << plane.num_points) - 1 else None


def percolates(plane: IncidencePlane, points: PointSet, r: int) -> bool:
    return closure_mask(plane, points.bits, r) == (1 << plane.num_points) - 1


def percolation_time(plane: IncidencePlane, points: PointSet, r: int) -> int | None:
    return time_mask(plane, points.bits, r)


def closure_points(plane: IncidencePlane, points: PointSet, r: int) -> PointSet:
    return PointSet(plane.num_points, closure_mask(plane, points.bits, r))


def closure_size(plane: IncidencePlane, points: PointSet, r: int) -> int:
    return closure_mask(plane, points.bits, r).bit_count()


def _run(plane: IncidencePlane, bits: int, r: int) -> tuple[int, int]:
    """
    Counter-based closure. Returns (closure mask, rounds that added points).

    Once r lines are fully infected and C(r, 2) <= q, every point outside
    them sees a line through it avoiding all their pairwise intersections,
    so the next round completes the plane. The loop stops there; the
    returned round count is still exact.
    """
    _check_r(r)
    q = plane.order
    full = (1 << plane.num_points) - 1
    line_points = plane.line_points
    lines_of_point = plane.lines_of_point
    num_lines = plane.num_lines
    shortcut = comb(r, 2) <= q

    if bits.bit_count() * (q + 1) < num_lines:
        counters = [0] * num_lines
        for point in iter_bits(bits):
            for line in lines_of_point[point]:
                counters[line] += 1
    else:
        counters = [(mask & bits).bit_count() for mask in line_points]

    infected = bytearray(num_lines)
    pending = [line for line, count in enumerate(counters) if count >= r]
    full_lines = sum(1 for count in counters if count == q + 1)
    current = bits
    rounds = 0
    while current != full:
        if shortcut and full_lines >= r:
            return full, rounds + 1
        gained = 0
        for line in pending:
            if not infected[line]:
                infected[line] = 1
                gained |= line_points[line]
        gained &= ~current
        if not gained:
            break
        pending = []
        current |= gained
        rounds += 1
        for point in iter_bits(gained):
            for line in lines_of_point[point]:
                count = counters[line] + 1
                counters[line] = count
                if count == r:
                    pending.append(line)
                if count == q + 1:
                    full_lines += 1
    return current, rounds


# ============================================================================
# Minimality and the One-by-One Model
# ============================================================================


def is_minimal_percolating(plane: IncidencePlane, points: PointSet, r: int) -> bool:
    """True iff A percolates and no A minus one point does.

    Single removals suffice because closure is monotone.
    """
    full = (1 << plane.num_points) - 1
    bits = points.bits
    if closure_mask(plane, bits, r) != full:
        return False
    return all(closure_mask(plane, bits & ~(1 << point), r) != full for point in iter_bits(bits))


def one_by_one_verify(plane: IncidencePlane, points: PointSet, r: int, sequence: Sequence[int]) -> bool:
    """
    Check a percolating sequence: each line l_i meets A ∪ l_1 ∪ ... ∪ l_(i-1)
    in at least r points.

    Raises:
        NotAPermutationError: If `sequence` is not a permutation of all line indices
    """
    _check_r(r)
    if len(sequence) != plane.num_lines or sorted(sequence) != list(range(plane.num_lines)):
        raise NotAPermutationError(f"sequence must be a permutation of 0..{plane.num_lines - 1}")
    infected = points.bits
    for line in sequence:
        mask = plane.line_points[line]
        if (mask & infected).bit_count() < r:
            return False
        infected |= mask
    return True


def greedy_percolating_sequence(plane: IncidencePlane, points: PointSet, r: int) -> list[int] | None:
    """
    Build a percolating sequence by always taking the lowest-index line that
    is currently infectable. Returns None when the process stalls before
    every line is used, which happens exactly when A does not percolate.
    """
    _check_r(r)
    bits = points.bits
    counters = [(mask & bits).bit_count() for mask in plane.line_points]
    ready = [line for line, count in enumerate(counters) if count >= r]
    heapq.heapify(ready)
    used = bytearray(plane.num_lines)
    sequence: list[int] = []
    while ready:
        line = heapq.heappop(ready)
        if used[line]:
            continue
        used[line] = 1
        sequence.append(line)
        gained = plane.line_points[line] & ~bits
        bits |= gained
        for point in iter_bits(gained):
            for other in plane.lines_of_point[point]:
                counters[other] += 1
                if counters[other] == r and not used[other]:
                    heapq.heappush(ready, other)
    return sequence if len(sequence) == plane.num_lines else None


# ============================================================================
# Structural Predicates
# ============================================================================


def covered_by_k_lines(plane: IncidencePlane, points: PointSet, k: int) -> bool:
    """
    True when some k lines cover A.

    Exact for k <= 4: branch on the lines through the lowest uncovered point.
    Only lines meeting another uncovered point matter, plus one line covering
    that point alone. For k > 4 a greedy max-coverage pass is used; it may
    miss a cover but never reports a false one.
    """
    if k < 0:
        raise BadRangeError(f"k must be non-negative, got: {k}")
    bits = points.bits
    if k <= EXACT_COVER_LIMIT:
        return _exact_cover(plane, bits, k)
    return _greedy_cover(plane, bits, k)


def _exact_cover(plane: IncidencePlane, bits: int, k: int) -> bool:
    if not bits:
        return True
    if k == 0 or bits.bit_count() > k * (plane.order + 1):
        return False
    low = bits & -bits
    point = low.bit_length() - 1
    rest = bits ^ low
    solo_tried = False
    for line in plane.lines_of_point[point]:
        mask = plane.line_points[line]
        if not mask & rest:
            if solo_tried:
                continue
            solo_tried = True
        if _exact_cover(plane, rest & ~mask, k - 1):
            return True
    return False


def _greedy_cover(plane: IncidencePlane, bits: int, k: int) -> bool:
    remaining = bits
    for _ in range(k):
        if not remaining:
            return True
        best = max(plane.line_points, key=lambda mask: (mask & remaining).bit_count())
        remaining &= ~best
    return not remaining


def fully_infected_lines(plane: IncidencePlane, points: PointSet) -> LineSet:
    """Lines all of whose points lie in A."""
    bits = points.bits
    mask = 0
    for line, line_mask in enumerate(plane.line_points):
        if line_mask & ~bits == 0:
            mask |= 1 << line
    return LineSet(plane.num_lines, mask)


def contains_r_broom(plane: IncidencePlane, points: PointSet, r: int) -> bool:
    """True when some point of A lies on at least r lines contained in A."""
    full_lines = fully_infected_lines(plane, points).bits
    if full_lines.bit_count() < r:
        return False
    return any((plane.point_lines[point] & full_lines).bit_count() >= r for point in points)


def r_lines_complete_next(plane: IncidencePlane, state: InfectionState, r: int) -> bool:
    """
    Check the r-lines rule on a state.

    If C(r, 2) <= q and at least r lines are fully infected, the next round
    must infect every point. Returns False only when that implication fails.
    """
    if comb(r, 2) > plane.order:
        return True
    if len(fully_infected_lines(plane, state.points)) < r:
        return True
    next_state, _ = spread_round(plane, state, r)
    return next_state.points.is_full()


# ============================================================================
# Private Helper Functions
# ============================================================================


def _check_r(r: int) -> None:
    if r < 1:
        raise BadRangeError(f"r must be at least 1, got: {r}")
