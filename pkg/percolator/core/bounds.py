"""
Extremal Bounds
===============

Closed-form bounds for the minimum percolating size m_r, the maximum
non-percolating size M_r and the maximum percolation time T_r; the linear
program lower bound on m_r together with an exact vertex-enumeration
oracle; and the critical probability of the Bernoulli model.

The LP has variables (f_1, ..., f_j, g) and j+3 constraints:

    (1) 2 f_1 + f_2 + ... + f_j + g <= N (q+1)
    (2) f_k - f_(k-1) <= 0                      for 2 <= k <= j
    (3) -f_j <= 0
    (4) -g <= 0
    (5) sum k f_k + (j+1) g <= C(N, 2)

and objective h = N r - sum f_k - g. All LP arithmetic is exact.

Public API:
    BoundReport, LpPoint, LpEvaluation, OracleResult, RichLineEstimate, TableEntry
    m_r_bounds, M_r_bounds, T_r_bounds, p_c_bounds
    lp_h_min, lp_vertex, lp_vertex_oracle, lp_constraints, is_feasible
    critical_p, threshold_exponent, expected_rich_lines, reference_table
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, comb, sqrt
from typing import Any

from scipy.stats import binom
from sympy import Matrix, Rational

from common.exceptions import BadRangeError, DegenerateSystemError, VerificationError
from common.utils import validate_threshold

logger = logging.getLogger(__name__)

# Vertex enumeration stays tiny up to this j
ORACLE_MAX_J = 6

Row = tuple[tuple[Fraction, ...], Fraction]


# ============================================================================
# Reports
# ============================================================================


@dataclass(frozen=True)
class BoundReport:  # pylint: disable=too-many-instance-attributes
    """
    Lower and upper bound on one extremal parameter at (q, r).

    Attributes:
        parameter: m_r | M_r | T_r | p_c
        q: Plane order
        r: Threshold
        lower / lower_key: Lower bound and the result it comes from
        upper / upper_key: Upper bound and the result it comes from
        exact: True only when the cited exactness condition holds
        condition: Human-readable condition, e.g. "exact: r < sqrt(2q)"
        metadata: Comparison values that are reported but not used as bounds
    """

    parameter: str
    q: int
    r: int
    lower: int | float
    lower_key: str
    upper: int | float
    upper_key: str
    exact: bool = False
    condition: str = ""
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise VerificationError(
                f"{self.parameter}(q={self.q}, r={self.r}): lower {self.lower} exceeds upper {self.upper}"
            )
        if self.exact and self.lower != self.upper:
            raise VerificationError(f"{self.parameter}(q={self.q}, r={self.r}) flagged exact with a gap")

    @property
    def value(self) -> int | float | None:
        """The exact value, None while the bounds leave a gap."""
        return self.lower if self.exact else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameter": self.parameter,
            "q": self.q,
            "r": self.r,
            "lower": self.lower,
            "lower_key": self.lower_key,
            "upper": self.upper,
            "upper_key": self.upper_key,
            "exact": self.exact,
            "condition": self.condition,
            "metadata": self.metadata,
        }


# ============================================================================
# m_r
# ============================================================================


def m_r_bounds(q: int, r: int, desarguesian: bool = False) -> BoundReport:
    """
    Bounds on the smallest percolating set.

    lower = max(C(r+1, 2), best valid LP bound), upper = r^2 - r + 1 (an
    r-broom). Exact C(r+1, 2) when r^2 < 2q, or in PG(2, q) when
    r <= (q+1)/2. At r = q+1 only the full plane percolates.

    Raises:
        BadRangeError: If r is outside 1..q+1
    """
    validate_threshold(q, r)
    n = q * q + q + 1
    metadata: dict[str, Any] = {}
    alpha = 1 - r / q
    if 0 <= alpha < 1:
        metadata["alpha"] = alpha
        metadata["asymptotic_reference"] = (1 - 2 * sqrt(alpha) - 2 * alpha) * q * q

    if r == q + 1:
        return BoundReport("m_r", q, r, n, "full-threshold-exact", n, "full-threshold-exact", True, "exact: r = q+1")

    floor_value = comb(r + 1, 2)
    upper = r * r - r + 1
    if r * r < 2 * q:
        return BoundReport(
            "m_r", q, r, floor_value, "one-by-one-lower", floor_value, "general-position-exact", True,
            "exact: r < sqrt(2q)", metadata,
        )
    if desarguesian and r <= (q + 1) // 2:
        return BoundReport(
            "m_r", q, r, floor_value, "one-by-one-lower", floor_value, "general-position-exact", True,
            "exact: r <= floor((q+1)/2) in PG(2,q)", metadata,
        )

    lower, lower_key = floor_value, "one-by-one-lower"
    best = best_lp_bound(q, r)
    if best is not None:
        j, n_lines, value = best
        metadata.update({"lp_j": j, "lp_N": n_lines, "lp_value": str(value)})
        if ceil(value) > lower:
            lower, lower_key = ceil(value), "lp-lower"
    return BoundReport("m_r", q, r, lower, lower_key, upper, "broom-upper", False, "", metadata)


def best_lp_bound(q: int, r: int) -> tuple[int, int, Fraction] | None:
    """
    Best valid LP bound over j = 1..q-1.

    For each j the bound is concave in N, so besides N = (j+1)q the integers
    around the stationary point, clamped to the validity window, are tried.

    Returns:
        (j, N, value) of the largest valid bound, None if no pair is valid
    """
    n = q * q + q + 1
    best: tuple[int, int, Fraction] | None = None
    for j in range(1, max(q, 2)):
        window_low = j * (q + 1) + 1
        window_high = min(2 * (j + 1) * (q + 1) + 1, n)
        if window_low > window_high:
            continue
        slope = Fraction(r) - Fraction((q + 1) * j, j + 2)
        stationary = (slope * (j + 1) * (j + 2) + 1) / 2
        candidates = {(j + 1) * q, int(stationary), int(stationary) + 1, window_low, window_high}
        for n_lines in sorted(candidates):
            n_lines = min(max(n_lines, window_low), window_high)
            evaluation = lp_h_min(q, r, j, n_lines)
            if evaluation.valid and (best is None or evaluation.value > best[2]):
                best = (j, n_lines, evaluation.value)
    return best


# ============================================================================
# LP Lower Bound
# ============================================================================


@dataclass(frozen=True)
class LpEvaluation:
    """Closed-form LP minimum and whether the validity window holds."""

    value: Fraction
    valid: bool


@dataclass(frozen=True)
class LpPoint:
    """A point (f_1..f_j, g) of the LP with its objective value h."""

    j: int
    N: int
    f: tuple[Fraction, ...]
    g: Fraction
    h: Fraction

    def to_dict(self) -> dict[str, Any]:
        return {"j": self.j, "N": self.N, "f": [str(x) for x in self.f], "g": str(self.g), "h": str(self.h)}


@dataclass(frozen=True)
class OracleResult:
    """Minimum of h over all feasible vertices."""

    minimum: Fraction
    point: LpPoint
    vertices: int
    degenerate_count: int


def lp_h_min(q: int, r: int, j: int, N: int) -> LpEvaluation:  # noqa: N803
    """
    N r - N (q+1) j/(j+2) - N (N-1)/((j+1)(j+2)), valid when
    j (q+1) <= N-1 <= 2 (j+1)(q+1).

    Raises:
        BadRangeError: If j < 1 or N < 2
    """
    _check_lp_args(j, N)
    value = Fraction(N * r) - Fraction(N * (q + 1) * j, j + 2) - Fraction(N * (N - 1), (j + 1) * (j + 2))
    valid = j * (q + 1) <= N - 1 <= 2 * (j + 1) * (q + 1)
    return LpEvaluation(value=value, valid=valid)


def lp_vertex(q: int, r: int, j: int, N: int) -> LpPoint:  # noqa: N803
    """The vertex with f_1 = ... = f_j and equality in (1), (2) and (5)."""
    _check_lp_args(j, N)
    f = Fraction(2 * N * (q + 1), j + 2) - Fraction(N * (N - 1), (j + 2) * (j + 1))
    g = Fraction(N * (N - 1), j + 2) - Fraction(j * N * (q + 1), j + 2)
    return LpPoint(j=j, N=N, f=(f,) * j, g=g, h=N * r - j * f - g)


def lp_constraints(q: int, j: int, N: int) -> list[Row]:  # noqa: N803
    """The j+3 rows (coefficients, bound) of a.x <= b over x = (f_1..f_j, g)."""
    width = j + 1
    zero = Fraction(0)
    rows: list[Row] = []
    first = [Fraction(1)] * width
    first[0] = Fraction(2)
    rows.append((tuple(first), Fraction(N * (q + 1))))
    for k in range(1, j):
        coeffs = [zero] * width
        coeffs[k] = Fraction(1)
        coeffs[k - 1] = Fraction(-1)
        rows.append((tuple(coeffs), zero))
    last_f = [zero] * width
    last_f[j - 1] = Fraction(-1)
    rows.append((tuple(last_f), zero))
    neg_g = [zero] * width
    neg_g[j] = Fraction(-1)
    rows.append((tuple(neg_g), zero))
    rows.append((tuple(Fraction(k) for k in range(1, j + 2)), Fraction(comb(N, 2))))
    return rows


def is_feasible(q: int, point: LpPoint) -> bool:
    x = (*point.f, point.g)
    return all(sum((a * v for a, v in zip(coeffs, x, strict=True)), Fraction(0)) <= bound
               for coeffs, bound in lp_constraints(q, point.j, point.N))


def lp_vertex_oracle(q: int, r: int, j: int, N: int) -> OracleResult:  # noqa: N803
    """
    Minimize h over the LP polytope by enumerating every vertex.

    Each choice of j+1 of the j+3 rows is solved at equality in exact
    rationals; singular choices are counted as degenerate and skipped.
    The polytope contains 0 and is bounded, so a minimum always exists.

    Raises:
        BadRangeError: If j is outside 1..6 or N < 2
    """
    _check_lp_args(j, N)
    if j > ORACLE_MAX_J:
        raise BadRangeError(f"vertex oracle supports j <= {ORACLE_MAX_J}, got: {j}")
    rows = lp_constraints(q, j, N)
    best: LpPoint | None = None
    vertices = degenerate = 0
    for subset in itertools.combinations(range(len(rows)), j + 1):
        try:
            x = _solve_vertex([rows[i] for i in subset])
        except DegenerateSystemError as e:
            degenerate += 1
            logger.debug("skipping constraint subset %s: %s", subset, e)
            continue
        point = LpPoint(j=j, N=N, f=tuple(x[:j]), g=x[j], h=N * r - sum(x, Fraction(0)))
        if not is_feasible(q, point):
            continue
        vertices += 1
        if best is None or point.h < best.h:
            best = point
    if best is None:
        raise VerificationError(f"LP (q={q}, j={j}, N={N}) has no feasible vertex")
    return OracleResult(minimum=best.h, point=best, vertices=vertices, degenerate_count=degenerate)


# ============================================================================
# M_r and T_r
# ============================================================================


def M_r_bounds(q: int, r: int, desarguesian: bool = False) -> BoundReport:  # noqa: N802
    """
    Bounds on the largest non-percolating set: q(r-1)+1 <= M_r <= (q+1)(r-1).

    Exact q(r-1)+1 when r < q/2+2. In PG(2, q) with q even the upper bound
    is attained at r = q/2+2 (dual hyperoval) and r = q (hyperoval
    complement). The (k, n)-arc comparison value (r-1)q-q+r-1 is attached.

    Raises:
        BadRangeError: If r is outside 1..q+1
    """
    validate_threshold(q, r)
    lower = q * (r - 1) + 1
    upper = (q + 1) * (r - 1)
    metadata = {"arc_comparison": (r - 1) * q - q + r - 1}
    if r == 1:
        return BoundReport("M_r", q, r, 0, "empty-set-exact", 0, "empty-set-exact", True, "exact: r = 1", metadata)
    if r == q + 1:
        return BoundReport(
            "M_r", q, r, upper, "uninfected-point-upper", upper, "uninfected-point-upper", True,
            "exact: r = q+1", metadata,
        )
    if 2 * r < q + 4:
        return BoundReport(
            "M_r", q, r, lower, "broom-lower", lower, "closed-set-exact", True, "exact: r < q/2+2", metadata
        )
    if desarguesian and q % 2 == 0 and r == q // 2 + 2:
        return BoundReport(
            "M_r", q, r, upper, "dual-hyperoval-exact", upper, "uninfected-point-upper", True,
            "exact: q even, r = q/2+2 in PG(2,q)", metadata,
        )
    if desarguesian and q % 2 == 0 and r == q:
        return BoundReport(
            "M_r", q, r, upper, "hyperoval-complement-exact", upper, "uninfected-point-upper", True,
            "exact: q even, r = q in PG(2,q)", metadata,
        )
    return BoundReport("M_r", q, r, lower, "broom-lower", upper, "uninfected-point-upper", False, "", metadata)


def T_r_bounds(q: int, r: int) -> BoundReport:  # noqa: N802
    """
    Bounds on the slowest percolation time.

    T_1 = 1, T_2 = 2 and T_(q+1) = 0. T_3 = 3 for q >= 4 and T_4 = 4 for
    q >= 6; when r >= 5 and C(r, 2) <= q, T_r = r+1. Otherwise every
    percolating set contains a minimal one, which needs at least 2 rounds.

    Published table values only lift the lower bound. They are attached
    under metadata["published"] with their source, and never make the
    report exact.

    Raises:
        BadRangeError: If r is outside 1..q+1
    """
    validate_threshold(q, r)
    n = q * q + q + 1
    if r == q + 1:
        return BoundReport("T_r", q, r, 0, "full-threshold-exact", 0, "full-threshold-exact", True, "exact: r = q+1")
    if r in (1, 2):
        return BoundReport("T_r", q, r, r, "base-case", r, "base-case", True, f"exact: r = {r}")

    metadata: dict[str, Any] = {}
    published = _REFERENCE_INDEX.get((q, r))
    if published is not None:
        metadata["published"] = published.to_dict()

    if r == 3 and q >= 4:
        return BoundReport("T_r", q, r, 3, "small-r-exact", 3, "small-r-upper", True, "exact: r = 3, q >= 4", metadata)
    if r == 4 and q >= 6:
        return BoundReport("T_r", q, r, 4, "small-r-exact", 4, "small-r-upper", True, "exact: r = 4, q >= 6", metadata)
    if r >= 5 and comb(r, 2) <= q:
        return BoundReport(
            "T_r", q, r, r + 1, "slow-chain-lower", r + 1, "r-lines-upper", True, "exact: r >= 5 and C(r,2) <= q",
            metadata,
        )

    lower, lower_key = 2, "minimal-time-lower"
    if r == 3:
        upper, upper_key = 3, "small-r-upper"
    elif comb(r, 2) <= q:
        upper, upper_key = r + 1, "r-lines-upper"
    else:
        upper, upper_key = n, "round-progress-upper"
    if published is not None and published.time > lower:
        lower, lower_key = min(published.time, upper), "published-table"
    return BoundReport("T_r", q, r, lower, lower_key, upper, upper_key, False, "", metadata)


# ============================================================================
# Critical Probability
# ============================================================================


def threshold_exponent(r: int) -> Fraction:
    """-(r+2)/r as an exact rational."""
    if r < 1:
        raise BadRangeError(f"r must be at least 1, got: {r}")
    return Fraction(-(r + 2), r)


def critical_p(q: int, r: int) -> float:
    """q^(-(r+2)/r): Bernoulli sets well below this do not percolate, well above they do."""
    exponent = threshold_exponent(r)
    return float(q ** float(exponent))


def p_c_bounds(q: int, r: int) -> BoundReport:
    """Report the threshold function; only its order is determined, not a sharp constant."""
    validate_threshold(q, r)
    value = critical_p(q, r)
    return BoundReport(
        "p_c", q, r, value, "threshold-function", value, "threshold-function", False,
        "threshold up to a slowly growing factor",
        {"exponent": str(threshold_exponent(r))},
    )


@dataclass(frozen=True)
class RichLineEstimate:
    """Expected number of lines holding at least r points of a Bernoulli(p) set."""

    exact: float
    lower: float
    upper: float

    def to_dict(self) -> dict[str, float]:
        return {"exact": self.exact, "lower": self.lower, "upper": self.upper}


def expected_rich_lines(q: int, r: int, p: float) -> RichLineEstimate:
    """
    n P(Bin(q+1, p) >= r) with the estimates used for the threshold:
    n C(q+1, r) p^r (1-p)^(q+1-r) <= exact <= n C(q+1, r) p^r.

    Raises:
        BadRangeError: If p is outside [0, 1] or r outside 1..q+1
    """
    validate_threshold(q, r)
    if not 0.0 <= p <= 1.0:
        raise BadRangeError(f"p must be in [0, 1], got: {p}")
    n = q * q + q + 1
    exact = n * float(binom.sf(r - 1, q + 1, p))
    upper = n * comb(q + 1, r) * p**r
    lower = upper * (1 - p) ** (q + 1 - r)
    return RichLineEstimate(exact=exact, lower=lower, upper=upper)


# ============================================================================
# Published Maximum Times
# ============================================================================


@dataclass(frozen=True)
class TableEntry:
    """A published (q, r, T) entry; exact entries come from exhaustive search."""

    q: int
    r: int
    time: int
    exact: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "q": self.q,
            "r": self.r,
            "time": self.time,
            "exact": self.exact,
            "source": "published exhaustive search" if self.exact else "published heuristic search",
        }


_REFERENCE = (
    TableEntry(3, 2, 2, True),
    TableEntry(3, 3, 2, True),
    TableEntry(5, 3, 3, True),
    TableEntry(5, 4, 5, True),
    TableEntry(5, 5, 8, True),
    TableEntry(7, 5, 6, False),
    TableEntry(7, 6, 9, False),
    TableEntry(7, 7, 14, False),
    TableEntry(11, 9, 10, False),
    TableEntry(11, 10, 15, False),
    TableEntry(11, 11, 21, False),
    TableEntry(13, 13, 23, False),
    TableEntry(17, 17, 24, False),
    TableEntry(19, 19, 27, False),
)
_REFERENCE_INDEX = {(entry.q, entry.r): entry for entry in _REFERENCE}


def reference_table() -> tuple[TableEntry, ...]:
    return _REFERENCE


# ============================================================================
# Private Helper Functions
# ============================================================================


def _check_lp_args(j: int, N: int) -> None:  # noqa: N803
    if j < 1:
        raise BadRangeError(f"j must be at least 1, got: {j}")
    if N < 2:
        raise BadRangeError(f"N must be at least 2, got: {N}")


def _solve_vertex(rows: list[Row]) -> list[Fraction]:
    """Solve the rows at equality.

    Raises:
        DegenerateSystemError: If the rows are linearly dependent
    """
    matrix = Matrix([[Rational(c.numerator, c.denominator) for c in coeffs] for coeffs, _ in rows])
    if matrix.rank() < len(rows):
        raise DegenerateSystemError(f"rank {matrix.rank()} < {len(rows)}")
    rhs = Matrix([Rational(bound.numerator, bound.denominator) for _, bound in rows])
    solution = matrix.LUsolve(rhs)
    return [Fraction(int(v.p), int(v.q)) for v in solution]
