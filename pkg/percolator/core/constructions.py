"""
Explicit Constructions
======================

Generators for the point and line configurations behind the extremal
results: brooms, conics and hyperovals, lines in general position, smallest
percolating sets, minimal sets percolating in exactly three rounds, slow
percolating sets, and the two large non-percolating sets for even q.

Every construction re-checks its claim with the percolation engine before
returning. A ConstructionResult is only ever emitted with all checks
passing; a failing check raises VerificationError.

Free choices are resolved by the lowest-index admissible candidate. The
smallest-percolating-set builder also accepts a seed that randomizes every
free choice.

Public API:
    ConstructionResult / CheckResult
    r_broom, broom_construction
    conic_oval, hyperoval, general_position_lines
    min_percolating_from_general_position
    minimal_t3_set, slow_percolating_set
    dual_hyperoval_union, hyperoval_complement
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from math import comb
from typing import Any

from common.bitset import PointSet, iter_bits
from common.exceptions import (
    BadArityError,
    BadRangeError,
    ConstructionFailedError,
    NoCoordinatesError,
    OddOrderError,
    PreconditionUnmetError,
    TooManyError,
    VerificationError,
)
from common.utils import make_rng, validate_threshold

from .galois_field import Field
from .percolation import closure, closure_mask, is_minimal_percolating, time_mask
from .plane import IncidencePlane, greedy_general_position_lines, is_arc, lines_in_general_position

logger = logging.getLogger(__name__)

VARIANTS = ("auto", "conic", "greedy")


# ============================================================================
# Result Types
# ============================================================================


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "pass": self.passed}


@dataclass(frozen=True)
class ConstructionResult:
    """
    A constructed configuration together with its verified claims.

    Attributes:
        name: Construction name (e.g. "min-percolating")
        q: Plane order
        r: Threshold the claims refer to (None for purely geometric objects)
        points: Constructed point set
        lines: Lines the construction is built on, in construction order
        parameters: Choices made (center, variant, chosen points, ...)
        checks: Named claims, all passing
    """

    name: str
    q: int
    r: int | None
    points: PointSet
    lines: tuple[int, ...] = ()
    parameters: dict[str, Any] = field(default_factory=dict)
    checks: tuple[CheckResult, ...] = ()

    @property
    def size(self) -> int:
        return len(self.points)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "q": self.q,
            "r": self.r,
            "size": self.size,
            "point_indices": self.points.indices(),
            "lines": list(self.lines),
            "parameters": self.parameters,
            "checks": [check.to_dict() for check in self.checks],
        }


def _emit(
    name: str,
    plane: IncidencePlane,
    r: int | None,
    points: PointSet,
    checks: Iterable[tuple[str, bool]],
    lines: Sequence[int] = (),
    parameters: dict[str, Any] | None = None,
) -> ConstructionResult:
    """Package a construction, raising VerificationError if any claim fails."""
    results = tuple(CheckResult(check_name, bool(passed)) for check_name, passed in checks)
    failed = [check.name for check in results if not check.passed]
    if failed:
        raise VerificationError(f"{name} (q={plane.order}, r={r}) failed checks: {', '.join(failed)}")
    return ConstructionResult(
        name=name,
        q=plane.order,
        r=r,
        points=points,
        lines=tuple(lines),
        parameters=parameters or {},
        checks=results,
    )


# ============================================================================
# Brooms
# ============================================================================


def r_broom(plane: IncidencePlane, center: int, m: int) -> PointSet:
    """
    Union of the first m lines (ascending index) through `center`.

    Raises:
        BadArityError: If m is outside 1..q+1
    """
    q = plane.order
    if not 1 <= m <= q + 1:
        raise BadArityError(f"a broom needs 1..{q + 1} lines, got: {m}")
    bits = 0
    for line in plane.lines_of_point[center][:m]:
        bits |= plane.line_points[line]
    return PointSet(plane.num_points, bits)


def broom_construction(plane: IncidencePlane, r: int, m: int | None = None, center: int = 0) -> ConstructionResult:
    """An m-broom (default m = r) checked to percolate exactly when m >= r."""
    validate_threshold(plane.order, r)
    m = r if m is None else m
    points = r_broom(plane, center, m)
    full = (1 << plane.num_points) - 1
    percolating = closure_mask(plane, points.bits, r) == full
    return _emit(
        "broom",
        plane,
        r,
        points,
        [("size", len(points) == m * plane.order + 1), ("percolates_iff_m_at_least_r", percolating == (m >= r))],
        lines=plane.lines_of_point[center][:m],
        parameters={"center": center, "m": m},
    )


# ============================================================================
# Conics, Hyperovals, Lines in General Position
# ============================================================================


def conic_oval(plane: IncidencePlane) -> PointSet:
    """
    The conic x^2 = yz: {(t, t^2, 1)} plus (0, 1, 0).

    Raises:
        NoCoordinatesError: If the plane has no coordinates
        VerificationError: If the result is not an arc
    """
    gf = _require_field(plane)
    indices = [plane.point_index((t, gf.mul(t, t), 1)) for t in gf.elements()]
    indices.append(plane.point_index((0, 1, 0)))
    oval = plane.point_set(indices)
    if len(oval) != plane.order + 1 or not is_arc(plane, oval):
        raise VerificationError(f"conic in PG(2,{plane.order}) is not a {plane.order + 1}-arc")
    return oval


def hyperoval(plane: IncidencePlane) -> PointSet:
    """
    The conic plus its nucleus (1, 0, 0).

    Raises:
        OddOrderError: If q is odd
        NoCoordinatesError: If the plane has no coordinates
    """
    if plane.order % 2:
        raise OddOrderError(f"hyperovals need even q, got: {plane.order}")
    points = conic_oval(plane).with_index(plane.point_index((1, 0, 0)))
    if len(points) != plane.order + 2 or not is_arc(plane, points):
        raise VerificationError(f"conic plus nucleus in PG(2,{plane.order}) is not a {plane.order + 2}-arc")
    return points


def general_position_lines(plane: IncidencePlane, k: int) -> list[int]:
    """
    The first k (ascending index) of the dual conic lines {[t, t^2, 1]} ∪ {[0, 1, 0]}.

    Raises:
        TooManyError: If k > q+1
        NoCoordinatesError: If the plane has no coordinates
    """
    gf = _require_field(plane)
    if k > plane.order + 1:
        raise TooManyError(f"at most {plane.order + 1} dual conic lines exist, {k} requested")
    if k < 0:
        raise BadRangeError(f"k must be non-negative, got: {k}")
    candidates = [plane.line_index((t, gf.mul(t, t), 1)) for t in gf.elements()]
    candidates.append(plane.line_index((0, 1, 0)))
    lines = sorted(candidates)[:k]
    if not lines_in_general_position(plane, lines):
        raise VerificationError(f"dual conic lines of PG(2,{plane.order}) are not in general position")
    return lines


# ============================================================================
# Smallest Percolating Sets
# ============================================================================


def min_percolating_from_general_position(
    plane: IncidencePlane, r: int, variant: str = "auto", seed: int | None = None
) -> ConstructionResult:
    """
    A percolating set of size C(r+1, 2) built on r lines in general position.

    A_i holds r-i+1 points of l_i off the earlier lines. Variants:
        conic: the first lines of the 2r dual conic lines (coordinates, 2r <= q+1)
        greedy: greedy general-position lines, valid on any plane when r^2 < 2q
        auto: conic when available, otherwise greedy

    Args:
        plane: The plane
        r: Threshold
        variant: auto | conic | greedy
        seed: When given, every free choice is drawn from this seed

    Raises:
        PreconditionUnmetError: If neither route is available for (q, r)
    """
    q = plane.order
    validate_threshold(q, r)
    if variant not in VARIANTS:
        raise BadRangeError(f"variant must be one of {', '.join(VARIANTS)}, got: {variant}")
    conic_ok = plane.has_coordinates and 2 * r <= q + 1
    greedy_ok = r * r < 2 * q
    if variant == "auto":
        variant = "conic" if conic_ok else "greedy"
    if (variant == "conic" and not conic_ok) or (variant == "greedy" and not greedy_ok):
        raise PreconditionUnmetError(
            f"no {variant} route to a C(r+1,2) percolating set for q={q}, r={r} "
            f"(conic needs coordinates and 2r <= q+1, greedy needs r^2 < 2q)"
        )

    rng = make_rng(seed, 0) if seed is not None else None
    if variant == "conic":
        family = general_position_lines(plane, 2 * r)
        if rng is not None:
            family = [int(x) for x in rng.permutation(family)]
        lines = family[:r]
    else:
        order = [int(x) for x in rng.permutation(plane.num_lines)] if rng is not None else None
        lines = greedy_general_position_lines(plane, r, order)

    covered = 0
    bits = 0
    for i, line in enumerate(lines):
        free = list(iter_bits(plane.line_points[line] & ~covered))
        if rng is not None:
            free = [int(x) for x in rng.permutation(free)]
        for point in free[: r - i]:
            bits |= 1 << point
        covered |= plane.line_points[line]
    points = PointSet(plane.num_points, bits)

    full = (1 << plane.num_points) - 1
    return _emit(
        "min-percolating",
        plane,
        r,
        points,
        [
            ("size", len(points) == comb(r + 1, 2)),
            ("general_position", lines_in_general_position(plane, lines)),
            ("percolates", closure_mask(plane, bits, r) == full),
            ("minimal", is_minimal_percolating(plane, points, r)),
        ],
        lines=lines,
        parameters={"variant": variant, "seed": seed},
    )


# ============================================================================
# Minimal Sets Percolating in Three Rounds
# ============================================================================


def minimal_t3_set(plane: IncidencePlane, r: int) -> ConstructionResult:
    """
    A minimal percolating set with percolation time exactly 3.

    For r >= 5 the set is built on an r-broom l_1..l_r with center P
    (point 0, first r lines through it). With P1 on l_1, P21 and P22 on l_2,
    l'_1 = P1P21 and l'_2 = P1P22, P_i1 = l_i ∩ l'_1 and P_i2 = l_i ∩ l'_2,
    a free point P33 on l_3 and, for i >= 4, the r-3 points l_i ∩ P33P1 and
    l_i ∩ P33P_j1 (4 <= j <= r, j != i):

        A = {P, P1, P33} ∪ {P_i1, P_i2 : 2 <= i <= r} ∪ (those r-3 points per line)

    so |A| = 3 + 2(r-1) + (r-3)^2. Every line through P33 and a point of A
    on l_4..l_r then meets l'_1 or l'_2 where it meets another line of the
    union, which keeps A minimal.

    For r = 4 the broom puts four points of A on l_3 and percolates in two
    rounds, so a fan is used instead: four lines in general position, four
    points on the first, the three pairwise intersections of the others and
    one free point on each of them. That set has the same size 10.

    Free choices are tried in ascending index order; the first candidate
    whose pieces are pairwise distinct and which passes verification is
    returned.

    Raises:
        PreconditionUnmetError: Unless 4 <= r and 3r <= q+7
        ConstructionFailedError: If no candidate passes verification
    """
    q = plane.order
    validate_threshold(q, r)
    if r < 4 or 3 * r > q + 7:
        raise PreconditionUnmetError(f"needs 4 <= r <= (q+7)/3, got q={q}, r={r}")
    expected = 3 + 2 * (r - 1) + (r - 3) ** 2
    full = (1 << plane.num_points) - 1
    candidates = _t3_fan_candidates(plane, r) if r == 4 else _t3_broom_candidates(plane, r)

    rejected = 0
    for chosen, lines, parameters in candidates:
        if len(chosen) != expected:
            continue
        points = PointSet(plane.num_points, sum(1 << p for p in chosen))
        time = time_mask(plane, points.bits, r)
        minimal = time is not None and is_minimal_percolating(plane, points, r)
        if time != 3 or not minimal:
            rejected += 1
            logger.debug("t3 candidate %s rejected: time=%s minimal=%s", parameters, time, minimal)
            continue
        if rejected:
            logger.debug("t3 at q=%d, r=%d accepted after %d rejected candidates", q, r, rejected)
        return _emit(
            "t3",
            plane,
            r,
            points,
            [
                ("size", len(points) == expected),
                ("percolates", closure_mask(plane, points.bits, r) == full),
                ("time_is_3", time == 3),
                ("minimal", minimal),
            ],
            lines=lines,
            parameters=parameters,
        )
    logger.warning("t3 at q=%d, r=%d: all %d verified candidates rejected", q, r, rejected)
    raise ConstructionFailedError(f"no admissible choice for the time-3 minimal set at q={q}, r={r}")


def _t3_broom_candidates(
    plane: IncidencePlane, r: int
) -> Iterator[tuple[set[int], list[int], dict[str, Any]]]:
    center = 0
    broom = plane.lines_of_point[center][:r]

    def off_center(line: int) -> list[int]:
        return [point for point in plane.points_of_line[line] if point != center]

    for p1 in off_center(broom[0]):
        for p21, p22 in itertools.combinations(off_center(broom[1]), 2):
            side1 = plane.line_through(p1, p21)
            side2 = plane.line_through(p1, p22)
            first = {i: plane.meet(broom[i], side1) for i in range(1, r)}
            second = {i: plane.meet(broom[i], side2) for i in range(1, r)}
            for p33 in off_center(broom[2]):
                if p33 in (first[2], second[2]):
                    continue
                chosen = _t3_broom_points(plane, broom, center, p1, p33, first, second)
                if chosen is None:
                    continue
                parameters = {"variant": "broom", "center": center, "P1": p1, "P21": p21, "P22": p22, "P33": p33}
                yield chosen, list(broom), parameters


def _t3_broom_points(
    plane: IncidencePlane,
    broom: Sequence[int],
    center: int,
    p1: int,
    p33: int,
    first: dict[int, int],
    second: dict[int, int],
) -> set[int] | None:
    """Assemble the broom-based time-3 set; None when two of its pieces coincide."""
    r = len(broom)
    named = [center, p1, p33] + [first[i] for i in range(1, r)] + [second[i] for i in range(1, r)]
    if len(set(named)) != len(named):
        return None
    chosen = set(named)
    spokes = [plane.line_through(p33, p1)] + [plane.line_through(p33, first[j]) for j in range(3, r)]
    for i in range(3, r):
        extra = {plane.meet(broom[i], spoke) for j, spoke in enumerate(spokes, start=2) if j != i}
        if len(extra) != r - 3 or extra & chosen:
            return None
        chosen |= extra
    return chosen


def _t3_fan_candidates(
    plane: IncidencePlane, r: int
) -> Iterator[tuple[set[int], list[int], dict[str, Any]]]:
    """
    Fan candidates: r lines in general position, r points on the first one
    off the others, every pairwise intersection of the remaining lines and
    one free point on each remaining line.

    The first line fills in round one and the others in round two. From
    there the r lines in general position complete the plane.
    """
    try:
        lines = greedy_general_position_lines(plane, r)
    except TooManyError:
        return
    vertices = {plane.meet(a, b) for a, b in itertools.combinations(lines[1:], 2)}

    def free_on(line: int) -> list[int]:
        return [p for p in plane.points_of_line[line] if sum(plane.line_points[other] >> p & 1 for other in lines) == 1]

    first_free = free_on(lines[0])
    free = {line: free_on(line) for line in lines[1:]}
    for base in itertools.combinations(first_free, r):
        for extras in itertools.product(*(free[line] for line in lines[1:])):
            chosen = set(base) | vertices | set(extras)
            parameters = {"variant": "fan", "lines": list(lines), "base": list(base), "extras": list(extras)}
            yield chosen, list(lines), parameters


# ============================================================================
# Slow Percolating Sets
# ============================================================================


def slow_percolating_set(plane: IncidencePlane, r: int) -> ConstructionResult:
    """
    A percolating set of size C(r+1, 2) with percolation time exactly r+1.

    On r lines l_1..l_r in general position, A_i is a set of r+1-i points
    of l_i avoiding every pairwise intersection. A_r = {P} and
    A_(r-1) = {Q1, Q2} are placed so that q1 = PQ1 passes through l_1 ∩ l_2
    and q2 = PQ2 through l_1 ∩ l_3, and A_(r-2) avoids q1 ∪ q2. Round j
    (j <= r-1) then infects l_j alone, and the set first fills the plane in
    round r+1.

    The lines are fixed first and P is then chosen on l_r, which determines
    Q1 and Q2 as the points where PX12 and PX13 meet l_(r-1). This is the
    reverse of picking P, Q1, Q2 and deriving l_1, l_2, l_3 through the
    required intersections; the resulting configuration is the same.

    Raises:
        PreconditionUnmetError: Unless r >= 5 and C(r, 2) <= q
        ConstructionFailedError: If no admissible P exists
    """
    q = plane.order
    validate_threshold(q, r)
    if r < 5 or comb(r, 2) > q:
        raise PreconditionUnmetError(f"needs r >= 5 and C(r,2) <= q, got q={q}, r={r}")
    lines = greedy_general_position_lines(plane, r)
    crossings = 0
    for a, b in itertools.combinations(lines, 2):
        crossings |= 1 << plane.meet(a, b)
    x12 = plane.meet(lines[0], lines[1])
    x13 = plane.meet(lines[0], lines[2])
    last, second_last = lines[r - 1], lines[r - 2]
    full = (1 << plane.num_points) - 1

    for p in plane.points_of_line[last]:
        if crossings >> p & 1:
            continue
        q1_line = plane.line_through(p, x12)
        q2_line = plane.line_through(p, x13)
        q1 = plane.meet(q1_line, second_last)
        q2 = plane.meet(q2_line, second_last)
        if crossings >> q1 & 1 or crossings >> q2 & 1 or q1 == q2:
            continue

        bits = (1 << p) | (1 << q1) | (1 << q2)
        for i in range(r - 2):
            forbidden = crossings
            if i == r - 3:
                forbidden |= plane.line_points[q1_line] | plane.line_points[q2_line]
            free = [point for point in plane.points_of_line[lines[i]] if not forbidden >> point & 1]
            for point in free[: r - i]:
                bits |= 1 << point
        points = PointSet(plane.num_points, bits)
        if len(points) != comb(r + 1, 2):
            continue

        trace = closure(plane, points, r)
        one_line_per_round = all(
            trace.rounds[j].new_lines == (lines[j],) for j in range(min(r - 1, len(trace.rounds)))
        ) and len(trace.rounds) >= r - 1
        if trace.time != r + 1 or not one_line_per_round:
            logger.warning("slow set with P=%d failed verification (time %s)", p, trace.time)
            continue
        return _emit(
            "slow",
            plane,
            r,
            points,
            [
                ("size", len(points) == comb(r + 1, 2)),
                ("percolates", closure_mask(plane, bits, r) == full),
                ("time_is_r_plus_1", trace.time == r + 1),
                ("one_new_line_per_early_round", one_line_per_round),
            ],
            lines=lines,
            parameters={"P": p, "Q1": q1, "Q2": q2, "q1_line": q1_line, "q2_line": q2_line},
        )
    raise ConstructionFailedError(f"no admissible P for the slow percolating set at q={q}, r={r}")


# ============================================================================
# Large Non-Percolating Sets (q even)
# ============================================================================


def dual_hyperoval_union(plane: IncidencePlane, r: int | None = None) -> ConstructionResult:
    """
    Union of the q+2 lines dual to the hyperoval.

    Every point lies on 0 or 2 of these lines, so any other line meets the
    union in exactly q/2+1 points and the set is closed for every
    r >= q/2+2. Whether it beats the (r-1)-broom is recorded, not asserted.

    Raises:
        OddOrderError: If q is odd
        NoCoordinatesError: If the plane has no coordinates
        BadRangeError: If r is outside [q/2+2, q+1]
    """
    q = plane.order
    if q % 2:
        raise OddOrderError(f"dual hyperovals need even q, got: {q}")
    _require_field(plane)
    r = q // 2 + 2 if r is None else r
    if not q // 2 + 2 <= r <= q + 1:
        raise BadRangeError(f"r must be in {q // 2 + 2}..{q + 1}, got: {r}")
    lines = general_position_lines(plane, q + 1)
    lines = sorted([*lines, plane.line_index((1, 0, 0))])

    bits = 0
    for line in lines:
        bits |= plane.line_points[line]
    points = PointSet(plane.num_points, bits)
    chosen = set(lines)
    outside_ok = all(
        (plane.line_points[line] & bits).bit_count() == q // 2 + 1
        for line in range(plane.num_lines)
        if line not in chosen
    )
    broom_size = q * (r - 1) + 1
    return _emit(
        "dual-hyperoval",
        plane,
        r,
        points,
        [
            ("size", len(points) == (q + 2) * (q + 1) // 2),
            ("general_position", lines_in_general_position(plane, lines)),
            ("outside_lines_meet_half_plus_one", outside_ok),
            ("not_percolating", closure_mask(plane, bits, r) == bits),
        ],
        lines=lines,
        parameters={"beats_broom": len(points) > broom_size, "broom_size": broom_size},
    )


def hyperoval_complement(plane: IncidencePlane, r: int | None = None) -> ConstructionResult:
    """
    Complement of the hyperoval: q^2 - 1 points, closed at r = q.

    Lines disjoint from the hyperoval lie inside the set, and every other
    line has exactly 2 uninfected points.

    Raises:
        OddOrderError: If q is odd
        NoCoordinatesError: If the plane has no coordinates
        BadRangeError: If r is outside q..q+1
    """
    q = plane.order
    r = q if r is None else r
    if not q <= r <= q + 1:
        raise BadRangeError(f"r must be in {q}..{q + 1}, got: {r}")
    oval = hyperoval(plane)
    points = oval.complement()
    bits = points.bits
    missing_ok = all((mask & oval.bits).bit_count() in (0, 2) for mask in plane.line_points)
    return _emit(
        "hyperoval-complement",
        plane,
        r,
        points,
        [
            ("size", len(points) == (q + 1) * (q - 1)),
            ("every_line_misses_0_or_2", missing_ok),
            ("not_percolating", closure_mask(plane, bits, r) == bits),
        ],
        parameters={"hyperoval": oval.indices()},
    )


# ============================================================================
# Private Helper Functions
# ============================================================================


def _require_field(plane: IncidencePlane) -> Field:
    if not plane.has_coordinates or plane.gf is None:
        raise NoCoordinatesError("this construction needs a plane with coordinates (PG(2,q))")
    return plane.gf
