"""
Projective Planes
=================

Incidence structures of order q: PG(2, q) built from a field, duals,
axiom validation for arbitrary imported planes, and indexed incidence
queries.

Points of PG(2, q) are homogeneous triples (x, y, z) normalized so the last
nonzero coordinate is 1, indexed in lexicographic order of (z, y, x):

    (1, 0, 0)         -> 0
    (x, 1, 0)         -> 1 + x
    (x, y, 1)         -> 1 + q + y*q + x

Lines [a, b, c] are normalized and indexed the same way; a point lies on a
line when a*x + b*y + c*z = 0.

Public API:
    IncidencePlane: Immutable plane with point/line incidence bitmasks
    ValidationReport / AxiomCheck: Result of validate_axioms
    build_pg2: Build PG(2, q) from a Field
    dual: Swap points and lines
    validate_axioms: Check counts, regularity, unique joins and unique meets
    save_plane / load_plane: Plane JSON files
    is_arc / lines_in_general_position / greedy_general_position_lines
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from common.bitset import LineSet, PointSet, iter_bits
from common.exceptions import (
    AxiomViolationError,
    IdenticalArgumentsError,
    NoCoordinatesError,
    PercolatorError,
    PlaneParseError,
    TooManyError,
)
from common.state import FileArtifactRepository

from .galois_field import Field, make_field

logger = logging.getLogger(__name__)

Triple = tuple[int, int, int]


# ============================================================================
# Plane
# ============================================================================


@dataclass(frozen=True)
class IncidencePlane:  # pylint: disable=too-many-instance-attributes
    """
    A finite incidence structure of order q.

    Instances returned by build_pg2, dual and load_plane satisfy the
    projective plane axioms. Constructing one directly does not validate;
    pass it to validate_axioms first.

    Attributes:
        order: q
        num_points: Number of points (q^2+q+1 for a plane)
        line_points: For each line, the int mask of its points
        gf: Coordinatizing field, None for imported planes without coordinates
        point_coords: Normalized homogeneous triple per point, if coordinatized
        line_coords: Normalized homogeneous triple per line, if coordinatized
    """

    order: int
    num_points: int
    line_points: tuple[int, ...]
    gf: Field | None = None
    point_coords: tuple[Triple, ...] | None = None
    line_coords: tuple[Triple, ...] | None = None
    point_lines: tuple[int, ...] = field(init=False, repr=False, compare=False)
    points_of_line: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    lines_of_point: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    _point_lookup: dict[Triple, int] = field(init=False, repr=False, compare=False)
    _line_lookup: dict[Triple, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        point_lines = [0] * self.num_points
        for line, mask in enumerate(self.line_points):
            if mask >> self.num_points:
                raise PlaneParseError(f"line {line} contains a point index >= {self.num_points}")
            for point in iter_bits(mask):
                point_lines[point] |= 1 << line
        object.__setattr__(self, "point_lines", tuple(point_lines))
        object.__setattr__(self, "points_of_line", tuple(tuple(iter_bits(m)) for m in self.line_points))
        object.__setattr__(self, "lines_of_point", tuple(tuple(iter_bits(m)) for m in point_lines))
        object.__setattr__(
            self, "_point_lookup", {t: i for i, t in enumerate(self.point_coords)} if self.point_coords else {}
        )
        object.__setattr__(
            self, "_line_lookup", {t: i for i, t in enumerate(self.line_coords)} if self.line_coords else {}
        )

    @property
    def q(self) -> int:
        return self.order

    @property
    def num_lines(self) -> int:
        return len(self.line_points)

    @property
    def has_coordinates(self) -> bool:
        return self.gf is not None and self.point_coords is not None and self.line_coords is not None

    @property
    def point_transitive(self) -> bool:
        """True for coordinatized PG(2, q), whose collineation group is transitive on points."""
        return self.has_coordinates

    def full_points(self) -> PointSet:
        return PointSet.full(self.num_points)

    def point_set(self, indices: Iterable[int]) -> PointSet:
        return PointSet.from_indices(self.num_points, indices)

    def line_set(self, indices: Iterable[int]) -> LineSet:
        return LineSet.from_indices(self.num_lines, indices)

    # ------------------------------------------------------------------
    # Incidence queries
    # ------------------------------------------------------------------

    def points_on(self, line: int) -> PointSet:
        return PointSet(self.num_points, self.line_points[line])

    def lines_through(self, point: int) -> LineSet:
        return LineSet(self.num_lines, self.point_lines[point])

    def line_through(self, p1: int, p2: int) -> int:
        """The unique line joining two distinct points.

        Raises:
            IdenticalArgumentsError: If p1 == p2
        """
        if p1 == p2:
            raise IdenticalArgumentsError(f"line_through needs two distinct points, got {p1} twice")
        common = self.point_lines[p1] & self.point_lines[p2]
        return (common & -common).bit_length() - 1

    def meet(self, l1: int, l2: int) -> int:
        """The unique point on two distinct lines.

        Raises:
            IdenticalArgumentsError: If l1 == l2
        """
        if l1 == l2:
            raise IdenticalArgumentsError(f"meet needs two distinct lines, got {l1} twice")
        common = self.line_points[l1] & self.line_points[l2]
        return (common & -common).bit_length() - 1

    def point_index(self, triple: Sequence[int]) -> int:
        """Index of the point with homogeneous coordinates `triple` (any nonzero scaling).

        Raises:
            NoCoordinatesError: If the plane carries no coordinates
        """
        return self._lookup(triple, self._point_lookup, "point")

    def line_index(self, triple: Sequence[int]) -> int:
        """Index of the line [a, b, c] (any nonzero scaling).

        Raises:
            NoCoordinatesError: If the plane carries no coordinates
        """
        return self._lookup(triple, self._line_lookup, "line")

    def _lookup(self, triple: Sequence[int], table: dict[Triple, int], kind: str) -> int:
        if self.gf is None or not table:
            raise NoCoordinatesError(f"{kind} lookup by coordinates needs a coordinatized plane")
        normalized = normalize(self.gf, triple)
        if normalized not in table:
            raise KeyError(f"{kind} {tuple(triple)} not found")
        return table[normalized]


# ============================================================================
# Validation
# ============================================================================


@dataclass(frozen=True)
class AxiomCheck:
    """Outcome of one axiom check with a counterexample on failure."""

    name: str
    passed: bool
    detail: str = ""
    witness: tuple[int, int] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "pass": self.passed,
            "detail": self.detail,
            "witness": list(self.witness) if self.witness else None,
        }


@dataclass(frozen=True)
class ValidationReport:
    """Per-axiom report returned by validate_axioms."""

    order: int
    checks: tuple[AxiomCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> AxiomCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def failures(self) -> list[AxiomCheck]:
        return [check for check in self.checks if not check.passed]

    def to_dict(self) -> dict[str, Any]:
        return {"q": self.order, "pass": self.passed, "checks": [c.to_dict() for c in self.checks]}


def validate_axioms(candidate: IncidencePlane) -> ValidationReport:
    """
    Check the projective plane axioms on any incidence structure.

    Checks, in order: counts, line_regularity, point_regularity,
    unique_joins, unique_meets. Failures are report content, not exceptions.
    Witnesses are (point, point) for joins, (line, line) for meets,
    (index, size) for the regularity checks and (points, lines) for counts.
    """
    q = candidate.order
    n = q * q + q + 1
    checks = [
        _check_counts(candidate, n),
        _check_regularity("line_regularity", candidate.line_points, q + 1, "line"),
        _check_regularity("point_regularity", candidate.point_lines, q + 1, "point"),
        _check_unique_pairs(
            "unique_joins", candidate.point_lines, candidate.line_points, candidate.num_points, "points"
        ),
        _check_unique_pairs("unique_meets", candidate.line_points, candidate.point_lines, candidate.num_lines, "lines"),
    ]
    report = ValidationReport(order=q, checks=tuple(checks))
    if not report.passed:
        logger.debug("Axiom check failed for q=%d: %s", q, [c.name for c in report.failures()])
    return report


def _check_counts(candidate: IncidencePlane, n: int) -> AxiomCheck:
    if candidate.num_points == n and candidate.num_lines == n:
        return AxiomCheck("counts", True, f"{n} points and {n} lines")
    return AxiomCheck(
        "counts",
        False,
        f"expected {n} points and lines, got {candidate.num_points} points and {candidate.num_lines} lines",
        (candidate.num_points, candidate.num_lines),
    )


def _check_regularity(name: str, masks: Sequence[int], expected: int, kind: str) -> AxiomCheck:
    for index, mask in enumerate(masks):
        size = mask.bit_count()
        if size != expected:
            return AxiomCheck(name, False, f"{kind} {index} has {size} incidences, expected {expected}", (index, size))
    return AxiomCheck(name, True, f"every {kind} has {expected} incidences")


def _check_unique_pairs(
    name: str, incident: Sequence[int], members: Sequence[int], count: int, kind: str
) -> AxiomCheck:
    """Every pair of distinct elements shares exactly one incident object.

    For element e, the objects through e must cover every other element
    exactly once: their union is everything and their sizes sum to count - 1
    once e is discounted.
    """
    full = (1 << count) - 1
    for element in range(count):
        union = 0
        total = 0
        for obj in iter_bits(incident[element]):
            union |= members[obj]
            total += members[obj].bit_count() - 1
        if union == full and total == count - 1:
            continue
        missing = full & ~union
        if missing:
            other = (missing & -missing).bit_length() - 1
            return AxiomCheck(name, False, f"{kind} {element} and {other} share no common incidence", (element, other))
        # Some pair is covered twice: find two objects through `element` that overlap elsewhere
        objects = list(iter_bits(incident[element]))
        for i, first in enumerate(objects):
            for second in objects[i + 1 :]:
                overlap = members[first] & members[second] & ~(1 << element)
                if overlap:
                    other = (overlap & -overlap).bit_length() - 1
                    return AxiomCheck(
                        name, False, f"{kind} {element} and {other} share more than one incidence", (element, other)
                    )
        return AxiomCheck(name, False, f"{kind} {element} has inconsistent incidences", (element, element))
    return AxiomCheck(name, True, f"every pair of {kind} shares exactly one incidence")


# ============================================================================
# Construction
# ============================================================================


def normalize(gf: Field, triple: Sequence[int]) -> Triple:
    """Scale a nonzero triple so its last nonzero coordinate is 1."""
    if len(triple) != 3:
        raise PlaneParseError(f"homogeneous coordinates need 3 entries, got: {list(triple)}")
    for value in reversed(triple):
        if value:
            scale = gf.inv(value)
            a, b, c = (gf.mul(t, scale) for t in triple)
            return (a, b, c)
    raise PlaneParseError("the zero triple is not a projective point")


def coordinate_index(q: int, triple: Triple) -> int:
    """Canonical index of a normalized triple."""
    x, y, z = triple
    if z:
        return 1 + q + y * q + x
    if y:
        return 1 + x
    return 0


def canonical_triples(q: int) -> list[Triple]:
    """All normalized triples in index order."""
    triples: list[Triple] = [(1, 0, 0)]
    triples.extend((x, 1, 0) for x in range(q))
    triples.extend((x, y, 1) for y in range(q) for x in range(q))
    return triples


def build_pg2(gf: Field) -> IncidencePlane:
    """
    Build the Desarguesian plane PG(2, q) over `gf`.

    Each line's points are solved for directly rather than tested against
    every point, so construction is O(n q) field operations.
    """
    q = gf.q
    triples = canonical_triples(q)
    line_points: list[int] = []
    for a, b, c in triples:
        mask = 0
        # Affine points (x, y, 1): a x + b y + c = 0
        if b:
            neg_inv_b = gf.neg(gf.inv(b))
            for x in range(q):
                y = gf.mul(gf.add(gf.mul(a, x), c), neg_inv_b)
                mask |= 1 << (1 + q + y * q + x)
        elif a:
            x = gf.mul(gf.neg(c), gf.inv(a))
            for y in range(q):
                mask |= 1 << (1 + q + y * q + x)
        # Points at infinity (x, 1, 0): a x + b = 0
        if a:
            x = gf.mul(gf.neg(b), gf.inv(a))
            mask |= 1 << (1 + x)
        elif not b:
            for x in range(q):
                mask |= 1 << (1 + x)
        # (1, 0, 0): a = 0
        if not a:
            mask |= 1
        line_points.append(mask)
    plane = IncidencePlane(
        order=q,
        num_points=len(triples),
        line_points=tuple(line_points),
        gf=gf,
        point_coords=tuple(triples),
        line_coords=tuple(triples),
    )
    logger.debug("Built PG(2,%d): %d points", q, plane.num_points)
    return plane


def dual(plane: IncidencePlane) -> IncidencePlane:
    """Swap the roles of points and lines, keeping indices."""
    return IncidencePlane(
        order=plane.order,
        num_points=plane.num_lines,
        line_points=plane.point_lines,
        gf=plane.gf,
        point_coords=plane.line_coords,
        line_coords=plane.point_coords,
    )


# ============================================================================
# Arcs and General Position
# ============================================================================


def is_arc(plane: IncidencePlane, points: PointSet) -> bool:
    """True when no three points of the set are collinear."""
    bits = points.bits
    return all((mask & bits).bit_count() <= 2 for mask in plane.line_points)


def lines_in_general_position(plane: IncidencePlane, lines: Iterable[int]) -> bool:
    """True when no three of the lines are concurrent."""
    chosen = 0
    for line in lines:
        chosen |= 1 << line
    return all((mask & chosen).bit_count() <= 2 for mask in plane.point_lines)


def greedy_general_position_lines(plane: IncidencePlane, k: int, order: Sequence[int] | None = None) -> list[int]:
    """
    Pick k lines in general position greedily.

    Works on any plane. A line is admissible when it avoids every pairwise
    intersection of the lines chosen so far. A maximal family of m lines
    blocks at most C(m, 2)(q - 1) others, so at least r lines are found
    whenever r^2 < 2q.

    Args:
        plane: Any valid plane
        k: Number of lines wanted
        order: Candidate order, ascending line index when omitted

    Raises:
        TooManyError: If the greedy family is exhausted before k lines
    """
    chosen: list[int] = []
    blocked = 0  # intersection points of chosen lines
    for line in order if order is not None else range(plane.num_lines):
        if len(chosen) == k:
            break
        if plane.line_points[line] & blocked:
            continue
        for other in chosen:
            blocked |= plane.line_points[line] & plane.line_points[other]
        chosen.append(line)
    if len(chosen) < k:
        raise TooManyError(f"Greedy search found only {len(chosen)} lines in general position, {k} requested")
    return chosen


# ============================================================================
# Plane Files
# ============================================================================


def plane_to_dict(plane: IncidencePlane) -> dict[str, Any]:
    data: dict[str, Any] = {
        "q": plane.order,
        "points": plane.num_points,
        "lines": [list(points) for points in plane.points_of_line],
    }
    if plane.point_coords is not None:
        data["coordinates"] = [list(t) for t in plane.point_coords]
    return data


def save_plane(plane: IncidencePlane, destination: Path, repository: FileArtifactRepository | None = None) -> Path:
    """Write the plane JSON file atomically and return its path."""
    repository = repository or FileArtifactRepository()
    path = repository.write_json(destination, plane_to_dict(plane))
    logger.info("Saved plane of order %d to %s", plane.order, path)
    return path


def load_plane(source: Path, repository: FileArtifactRepository | None = None) -> IncidencePlane:
    """
    Read a plane JSON file and validate it.

    When the file carries point coordinates, the field is rebuilt, line
    coordinates are derived and every incidence is re-checked, so
    coordinate-dependent constructions work on the loaded plane.

    Raises:
        PlaneParseError: If the file cannot be read or does not follow the schema
        AxiomViolationError: If the structure is not a projective plane
    """
    repository = repository or FileArtifactRepository()
    try:
        data = repository.read_json(source)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise PlaneParseError(f"Cannot read plane file {source}: {e}") from e
    return plane_from_dict(data, str(source))


def plane_from_dict(data: Any, origin: str = "<dict>") -> IncidencePlane:
    """Build and validate a plane from the decoded file schema.

    Raises:
        PlaneParseError: If keys are missing or malformed
        AxiomViolationError: If the structure is not a projective plane
    """
    if not isinstance(data, dict):
        raise PlaneParseError(f"{origin}: top-level value must be an object")
    q = data.get("q")
    num_points = data.get("points")
    lines = data.get("lines")
    if not _is_int(q) or q < 2:
        raise PlaneParseError(f"{origin}: 'q' must be an integer >= 2")
    if not _is_int(num_points) or num_points < 1:
        raise PlaneParseError(f"{origin}: 'points' must be a positive integer")
    if not isinstance(lines, list):
        raise PlaneParseError(f"{origin}: 'lines' must be a list of point index lists")

    masks: list[int] = []
    for position, line in enumerate(lines):
        if not isinstance(line, list) or not all(_is_int(p) for p in line):
            raise PlaneParseError(f"{origin}: line {position} must be a list of integers")
        if any(not 0 <= p < num_points for p in line):
            raise PlaneParseError(f"{origin}: line {position} has a point index outside 0..{num_points - 1}")
        if any(a >= b for a, b in zip(line, line[1:], strict=False)):
            raise PlaneParseError(f"{origin}: line {position} must be sorted ascending without repeats")
        masks.append(sum(1 << p for p in line))

    candidate = IncidencePlane(order=q, num_points=num_points, line_points=tuple(masks))
    report = validate_axioms(candidate)
    if not report.passed:
        failed = ", ".join(check.name for check in report.failures())
        raise AxiomViolationError(f"{origin}: not a projective plane of order {q} ({failed})", report)

    coordinates = data.get("coordinates")
    if coordinates is None:
        return candidate
    return _attach_coordinates(candidate, coordinates, origin)


def _attach_coordinates(plane: IncidencePlane, coordinates: Any, origin: str) -> IncidencePlane:
    try:
        gf = make_field(plane.order)
    except PercolatorError as e:
        raise PlaneParseError(f"{origin}: coordinates given but q={plane.order} has no field") from e
    if not isinstance(coordinates, list) or len(coordinates) != plane.num_points:
        raise PlaneParseError(f"{origin}: 'coordinates' must list one triple per point")

    point_coords: list[Triple] = []
    for index, triple in enumerate(coordinates):
        if not isinstance(triple, list) or len(triple) != 3 or not all(_is_int(t) and 0 <= t < gf.q for t in triple):
            raise PlaneParseError(f"{origin}: coordinate {index} must be 3 field elements")
        normalized = normalize(gf, triple)
        if normalized != tuple(triple):
            raise PlaneParseError(f"{origin}: coordinate {index} is not normalized (last nonzero entry must be 1)")
        point_coords.append(normalized)
    if len(set(point_coords)) != len(point_coords):
        raise PlaneParseError(f"{origin}: coordinates are not distinct")

    line_coords: list[Triple] = []
    for line, points in enumerate(plane.points_of_line):
        line_triple = normalize(gf, _cross(gf, point_coords[points[0]], point_coords[points[1]]))
        for point in points:
            if _dot(gf, line_triple, point_coords[point]) != 0:
                raise PlaneParseError(f"{origin}: coordinates disagree with the incidences of line {line}")
        line_coords.append(line_triple)
    if len(set(line_coords)) != len(line_coords):
        raise PlaneParseError(f"{origin}: coordinates disagree with the listed incidences")

    return IncidencePlane(
        order=plane.order,
        num_points=plane.num_points,
        line_points=plane.line_points,
        gf=gf,
        point_coords=tuple(point_coords),
        line_coords=tuple(line_coords),
    )


# ============================================================================
# Private Helper Functions
# ============================================================================


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _cross(gf: Field, u: Triple, v: Triple) -> Triple:
    return (
        gf.sub(gf.mul(u[1], v[2]), gf.mul(u[2], v[1])),
        gf.sub(gf.mul(u[2], v[0]), gf.mul(u[0], v[2])),
        gf.sub(gf.mul(u[0], v[1]), gf.mul(u[1], v[0])),
    )


def _dot(gf: Field, u: Triple, v: Triple) -> int:
    return gf.add(gf.add(gf.mul(u[0], v[0]), gf.mul(u[1], v[1])), gf.mul(u[2], v[2]))
