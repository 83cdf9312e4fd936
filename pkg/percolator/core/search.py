"""
Extremal Search
===============

Exact and heuristic searches for the three extremal parameters:

- find_min_percolating: iterative deepening on |A| from C(r+1, 2), with a
  depth-first ascending-index walk per size and a cover prune (a set inside
  r-1 lines never percolates, so neither does a prefix that can only
  complete inside r-1 lines).
- find_max_nonpercolating: depth-first search over closed sets only,
  every branch replaced by its closure, stopping at the proven upper bound.
- find_max_time: a walk over minimal percolating sets that stops at the
  proven upper bound, seeded random sampling, or hill climbing.

Every witness is re-verified through the engine before it is returned.
Searches stop on a node or wall-clock budget; an exhausted search returns
its best-so-far with exact=False.

On point-transitive planes (coordinatized PG(2, q)) the symmetry option
fixes the first chosen point to index 0.

Public API:
    SearchOutcome
    find_min_percolating, find_max_nonpercolating, find_max_time
    exhaustive_max_nonpercolating
    MinimalSetEnumeration, enumerate_minimal_percolating
"""

from __future__ import annotations

import logging
import time
from collections.abc import Iterator
from contextlib import closing
from dataclasses import dataclass
from math import comb
from typing import Any

import numpy as np

from common.bitset import PointSet, iter_bits, mask_of
from common.exceptions import (
    BadRangeError,
    BudgetExhaustedError,
    MissingSeedError,
    PercolatorError,
    VerificationError,
)
from common.types import BUDGET_CHECK_INTERVAL, Budget, SearchTarget, Strategy
from common.utils import make_rng, validate_threshold

from .bounds import T_r_bounds
from .constructions import dual_hyperoval_union, hyperoval_complement, min_percolating_from_general_position, r_broom
from .percolation import closure_mask, covered_by_k_lines, is_minimal_percolating, time_mask
from .plane import IncidencePlane
from .workers import iter_ordered

logger = logging.getLogger(__name__)

# Largest plane exhaustive_max_nonpercolating accepts (2^21 subsets)
EXHAUSTIVE_POINT_LIMIT = 21

# Hill climbing restarts after this many moves without strict improvement
DEFAULT_PATIENCE = 2_000

# Closed sets remembered by the max non-percolating search before the memo is reset
VISITED_LIMIT = 1 << 20


# ============================================================================
# Outcome
# ============================================================================


@dataclass(frozen=True)
class SearchOutcome:  # pylint: disable=too-many-instance-attributes
    """
    Result of one search.

    Attributes:
        target: min_perc | max_nonperc | max_time
        q / r: Plane order and threshold
        value: Best value found, None when nothing qualifying was seen
        exact: Only for completed exhaustive or bound-matching runs
        witness: A point set achieving `value`
        nodes: Subsets or closures examined
        seconds: Wall time
        strategy / seed: How the search ran
        budget_exhausted: The search stopped on its budget
    """

    target: SearchTarget
    q: int
    r: int
    value: int | None
    exact: bool
    witness: PointSet | None
    nodes: int
    seconds: float
    strategy: Strategy
    seed: int | None = None
    budget_exhausted: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "target": self.target.value,
            "q": self.q,
            "r": self.r,
            "value": self.value,
            "exact": self.exact,
            "witness": self.witness.indices() if self.witness is not None else None,
            "nodes": self.nodes,
            "seconds": round(self.seconds, 6),
            "strategy": self.strategy.value,
            "seed": self.seed,
            "budget_exhausted": self.budget_exhausted,
        }


class _Meter:
    """Counts nodes; enforces the node limit on every tick and the deadline every BUDGET_CHECK_INTERVAL."""

    def __init__(self, node_limit: int | None, deadline: float | None) -> None:
        self.node_limit = node_limit
        self.deadline = deadline
        self.nodes = 0

    @classmethod
    def from_budget(cls, budget: Budget) -> _Meter:
        return cls(budget.node_limit, _deadline(budget))

    def tick(self) -> None:
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            self.nodes -= 1
            raise BudgetExhaustedError(f"node limit {self.node_limit} reached")
        if self.nodes % BUDGET_CHECK_INTERVAL == 0:
            logger.info("%d nodes explored", self.nodes)
            if self.deadline is not None and time.time() > self.deadline:
                raise BudgetExhaustedError("time limit reached")


# ============================================================================
# Minimum Percolating Sets
# ============================================================================


@dataclass(frozen=True)
class _JobResult:
    witness: int | None
    nodes: int
    exhausted: bool


def find_min_percolating(
    plane: IncidencePlane, r: int, budget: Budget | None = None, threads: int = 1, start: int | None = None
) -> SearchOutcome:
    """
    Smallest percolating set by iterative deepening.

    Sizes run upward from C(r+1, 2) (or `start`). Within a size, subsets
    are visited depth-first in ascending lexicographic order and the first
    percolating one is the witness. A partial set that can only complete
    inside r-1 lines is pruned with its whole subtree. Work is split into
    disjoint prefixes, each running on the node allowance left when its
    size started; results are merged in prefix order against the total
    limit, so any thread count reports the same witness and node count.

    Args:
        plane: The plane
        r: Threshold
        budget: Node/time limits and the symmetry flag
        threads: Worker processes
        start: First size to try; sizes below C(r+1, 2) never percolate

    Raises:
        BadRangeError: If r is outside 1..q+1
        VerificationError: If the witness fails re-verification
    """
    validate_threshold(plane.order, r)
    budget = budget or Budget()
    began = time.perf_counter()
    deadline = _deadline(budget)
    n = plane.num_points
    floor_size = comb(r + 1, 2)
    first = floor_size if start is None else max(1, start)
    upper = min(r * r - r + 1, n)
    symmetric = budget.symmetry and plane.point_transitive
    used = _Meter(budget.node_limit, deadline)

    def jobs(k: int, allowance: int | None) -> list[tuple[Any, ...]]:
        return [(plane, r, prefix, k, allowance, deadline) for prefix in _prefixes(n, k, symmetric)]

    for k in range(first, upper + 1):
        allowance = None if budget.node_limit is None else budget.node_limit - used.nodes
        if allowance is not None and allowance <= 0:
            logger.warning("min search budget exhausted before size %d after %d nodes", k, used.nodes)
            return _min_fallback(plane, r, used.nodes, time.perf_counter() - began)
        logger.info("min search q=%d r=%d: trying size %d", plane.order, r, k)
        with closing(iter_ordered(_min_perc_job, jobs(k, allowance), threads)) as results:
            for result in results:
                used.nodes += result.nodes
                over = budget.node_limit is not None and used.nodes > budget.node_limit
                if result.witness is not None and not over:
                    witness = PointSet(n, result.witness)
                    _verify_percolating(plane, r, witness)
                    return SearchOutcome(
                        SearchTarget.MIN_PERC, plane.order, r, k, first <= floor_size, witness, used.nodes,
                        time.perf_counter() - began, Strategy.EXACT,
                    )
                if result.exhausted or over:
                    logger.warning("min search budget exhausted at size %d after %d nodes", k, used.nodes)
                    return _min_fallback(plane, r, used.nodes, time.perf_counter() - began)
    raise VerificationError(f"no percolating set of size <= {upper} found at q={plane.order}, r={r}")


def _min_perc_job(
    plane: IncidencePlane, r: int, prefix: tuple[int, ...], k: int, node_limit: int | None, deadline: float | None
) -> _JobResult:
    """Depth-first scan of the k-subsets extending `prefix` for the first percolating one."""
    meter = _Meter(node_limit, deadline)
    start = prefix[-1] + 1 if prefix else 0
    try:
        witness = _first_percolating(plane, r, mask_of(prefix), start, k - len(prefix), meter)
    except BudgetExhaustedError:
        return _JobResult(None, meter.nodes, True)
    return _JobResult(witness, meter.nodes, False)


def _first_percolating(plane: IncidencePlane, r: int, base: int, start: int, missing: int, meter: _Meter) -> int | None:
    """
    Lexicographically first percolating extension of `base` by `missing`
    points taken in ascending order from start..n-1.

    A partial set inside r-1-m lines is dropped when m points are still to
    be added: each added point needs at most one more line, so every
    completion lies inside r-1 lines and stays closed.
    """
    n = plane.num_points
    full = (1 << n) - 1
    stack = [(base, start, missing)]
    while stack:
        bits, next_point, left = stack.pop()
        meter.tick()
        if left == 0:
            if covered_by_k_lines(plane, PointSet(n, bits), r - 1):
                continue
            if closure_mask(plane, bits, r) == full:
                return bits
            continue
        if left < r - 1 and covered_by_k_lines(plane, PointSet(n, bits), r - 1 - left):
            continue
        for x in range(n - left, next_point - 1, -1):
            stack.append((bits | 1 << x, x + 1, left - 1))
    return None


def _prefixes(n: int, k: int, symmetric: bool) -> list[tuple[int, ...]]:
    if symmetric:
        if k == 1:
            return [(0,)]
        return [(0, b) for b in range(1, n - k + 2)]
    return [(a,) for a in range(n - k + 1)]


def _min_fallback(plane: IncidencePlane, r: int, nodes: int, seconds: float) -> SearchOutcome:
    """Best known percolating set when the search ran out of budget."""
    try:
        witness = min_percolating_from_general_position(plane, r).points
    except PercolatorError:
        witness = r_broom(plane, 0, r)
    _verify_percolating(plane, r, witness)
    return SearchOutcome(
        SearchTarget.MIN_PERC, plane.order, r, len(witness), False, witness, nodes, seconds, Strategy.EXACT,
        budget_exhausted=True,
    )


# ============================================================================
# Maximum Non-Percolating Sets
# ============================================================================


def find_max_nonpercolating(plane: IncidencePlane, r: int, budget: Budget | None = None) -> SearchOutcome:
    """
    Largest non-percolating set by depth-first search over closed sets.

    A maximum non-percolating set is closed, and every closed set is reached
    from the closure of one of its points by adding its other points one at
    a time and closing. The incumbent starts at the (r-1)-broom (and the
    hyperoval sets where they apply); the search stops as soon as it holds
    (q+1)(r-1) points.

    Only closed sets are remembered, at most VISITED_LIMIT of them. A full
    memo is cleared; children are strictly larger closed sets, so the search
    still terminates and only revisits work.

    Raises:
        BadRangeError: If r is outside 1..q+1
    """
    validate_threshold(plane.order, r)
    budget = budget or Budget()
    began = time.perf_counter()
    meter = _Meter.from_budget(budget)
    n = plane.num_points
    full = (1 << n) - 1
    upper = (plane.order + 1) * (r - 1)

    best = _max_nonperc_incumbent(plane, r)
    exact = best.bit_count() == upper
    exhausted = False
    if not exact:
        symmetric = budget.symmetry and plane.point_transitive
        seeds = [0] if symmetric else list(range(n))
        visited: set[int] = set()
        stack = [root for root in (closure_mask(plane, 1 << x, r) for x in reversed(seeds)) if root != full]
        try:
            while stack:
                current = stack.pop()
                if current in visited:
                    continue
                if len(visited) >= VISITED_LIMIT:
                    logger.debug("closed-set memo full at %d entries, resetting", len(visited))
                    visited.clear()
                visited.add(current)
                if current.bit_count() > best.bit_count():
                    best = current
                    logger.debug("max non-percolating: new incumbent of size %d", best.bit_count())
                    if best.bit_count() == upper:
                        break
                for x in sorted(iter_bits(full & ~current), reverse=True):
                    meter.tick()
                    child = closure_mask(plane, current | (1 << x), r)
                    if child != full and child not in visited:
                        stack.append(child)
            exact = True
        except BudgetExhaustedError:
            exhausted = True
            logger.warning("max non-percolating search exhausted its budget after %d nodes", meter.nodes)

    witness = PointSet(n, best)
    if closure_mask(plane, best, r) == full:
        raise VerificationError(f"max non-percolating witness of size {len(witness)} percolates")
    return SearchOutcome(
        SearchTarget.MAX_NONPERC, plane.order, r, len(witness), exact, witness, meter.nodes,
        time.perf_counter() - began, Strategy.EXACT, budget_exhausted=exhausted,
    )


def _max_nonperc_incumbent(plane: IncidencePlane, r: int) -> int:
    if r == 1:
        return 0
    candidates = [r_broom(plane, 0, r - 1).bits]
    q = plane.order
    if plane.has_coordinates and q % 2 == 0:
        if q // 2 + 2 <= r:
            candidates.append(dual_hyperoval_union(plane, r).points.bits)
        if q <= r:
            candidates.append(hyperoval_complement(plane, r).points.bits)
    return max(candidates, key=int.bit_count)


def exhaustive_max_nonpercolating(plane: IncidencePlane, r: int) -> SearchOutcome:
    """
    Brute force over all 2^n subsets; the oracle for the closed-set search.

    Raises:
        BadRangeError: If the plane has more than 21 points
    """
    validate_threshold(plane.order, r)
    n = plane.num_points
    if n > EXHAUSTIVE_POINT_LIMIT:
        raise BadRangeError(f"exhaustive search supports at most {EXHAUSTIVE_POINT_LIMIT} points, got: {n}")
    began = time.perf_counter()
    full = (1 << n) - 1
    best = 0
    nodes = 0
    for bits in range(1 << n):
        if bits.bit_count() <= best.bit_count():
            continue
        nodes += 1
        if closure_mask(plane, bits, r) != full:
            best = bits
    return SearchOutcome(
        SearchTarget.MAX_NONPERC, plane.order, r, best.bit_count(), True, PointSet(n, best), nodes,
        time.perf_counter() - began, Strategy.EXACT,
    )


# ============================================================================
# Maximum Percolation Time
# ============================================================================


def find_max_time(
    plane: IncidencePlane,
    r: int,
    strategy: Strategy = Strategy.EXACT,
    budget: Budget | None = None,
    seed: int | None = None,
    patience: int = DEFAULT_PATIENCE,
) -> SearchOutcome:
    """
    Slowest percolating set.

    exact walks the inclusion-minimal percolating sets (those containing
    point 0 under the symmetry option); adding points never slows
    percolation, so the slowest set is among them. It is exact when the
    walk completes or reaches the proven upper bound on T_r. random samples
    sets of size C(r+1, 2)..2 C(r+1, 2). hillclimb applies single-point
    swap/add/remove moves, accepts when the time does not drop, and
    restarts after `patience` moves without strict improvement. The
    heuristics run until the budget is spent and never claim exactness.

    Raises:
        MissingSeedError: If a heuristic strategy has no seed
        BadRangeError: If a heuristic strategy has no node or time limit
    """
    validate_threshold(plane.order, r)
    budget = budget or Budget()
    strategy = Strategy(strategy)
    if strategy is not Strategy.EXACT:
        if seed is None:
            raise MissingSeedError(f"{strategy.value} search requires an explicit seed")
        if budget.node_limit is None and budget.time_limit is None:
            raise BadRangeError(f"{strategy.value} search needs a node or time limit")
    began = time.perf_counter()
    meter = _Meter.from_budget(budget)
    tracker = _TimeTracker()
    exact = False
    exhausted = False
    try:
        if strategy is Strategy.EXACT:
            _max_time_minimal(plane, r, budget.symmetry and plane.point_transitive, meter, tracker)
            exact = True
        elif strategy is Strategy.RANDOM:
            _max_time_random(plane, r, make_rng(seed or 0, 0), meter, tracker)
        else:
            _max_time_hillclimb(plane, r, make_rng(seed or 0, 0), meter, tracker, patience)
    except BudgetExhaustedError:
        exhausted = True
        logger.info("max time search stopped on budget after %d nodes (best %s)", meter.nodes, tracker.time)

    witness = None
    if tracker.bits is not None:
        witness = PointSet(plane.num_points, tracker.bits)
        if time_mask(plane, tracker.bits, r) != tracker.time:
            raise VerificationError(f"max time witness does not percolate in {tracker.time} rounds")
    return SearchOutcome(
        SearchTarget.MAX_TIME, plane.order, r, tracker.time, exact, witness, meter.nodes,
        time.perf_counter() - began, strategy, seed, exhausted,
    )


class _TimeTracker:
    """Best (time, set) seen; ties keep the first."""

    def __init__(self) -> None:
        self.time: int | None = None
        self.bits: int | None = None

    def offer(self, bits: int, rounds: int | None) -> None:
        if rounds is not None and (self.time is None or rounds > self.time):
            self.time = rounds
            self.bits = bits
            logger.debug("new slowest set: %d rounds, %d points", rounds, bits.bit_count())


def _max_time_minimal(
    plane: IncidencePlane, r: int, anchored: bool, meter: _Meter, tracker: _TimeTracker
) -> None:
    n = plane.num_points
    if r == plane.order + 1:
        full = (1 << n) - 1
        tracker.offer(full, time_mask(plane, full, r))
        return
    ceiling = T_r_bounds(plane.order, r).upper
    for bits in _minimal_sets(plane, r, meter, n, anchored):
        tracker.offer(bits, time_mask(plane, bits, r))
        if tracker.time is not None and tracker.time >= ceiling:
            logger.info("max time search reached the upper bound %d", ceiling)
            return


def _size_window(plane: IncidencePlane, r: int) -> tuple[int, int]:
    n = plane.num_points
    low = min(comb(r + 1, 2), n)
    return low, max(low, min(2 * low, n - 1))


def _random_set(rng: np.random.Generator, n: int, low: int, high: int) -> int:
    size = int(rng.integers(low, high + 1))
    return mask_of(int(x) for x in rng.choice(n, size=size, replace=False))


def _max_time_random(
    plane: IncidencePlane, r: int, rng: np.random.Generator, meter: _Meter, tracker: _TimeTracker
) -> None:
    low, high = _size_window(plane, r)
    while True:
        meter.tick()
        bits = _random_set(rng, plane.num_points, low, high)
        tracker.offer(bits, time_mask(plane, bits, r))


def _max_time_hillclimb(
    plane: IncidencePlane, r: int, rng: np.random.Generator, meter: _Meter, tracker: _TimeTracker, patience: int
) -> None:
    n = plane.num_points
    low, high = _size_window(plane, r)
    restarts = 0
    while True:
        current, current_time = _percolating_start(plane, r, rng, meter, low, high)
        tracker.offer(current, current_time)
        stale = 0
        while stale < patience:
            meter.tick()
            candidate = _mutate(current, n, rng)
            rounds = time_mask(plane, candidate, r)
            if rounds is None or rounds < current_time:
                stale += 1
                continue
            stale = 0 if rounds > current_time else stale + 1
            current, current_time = candidate, rounds
            tracker.offer(current, current_time)
        restarts += 1
        logger.debug("hill climb restart %d (best %s)", restarts, tracker.time)


def _percolating_start(
    plane: IncidencePlane, r: int, rng: np.random.Generator, meter: _Meter, low: int, high: int
) -> tuple[int, int]:
    while True:
        meter.tick()
        bits = _random_set(rng, plane.num_points, low, high)
        rounds = time_mask(plane, bits, r)
        if rounds is not None:
            return bits, rounds


def _mutate(bits: int, n: int, rng: np.random.Generator) -> int:
    """One random swap, add or remove move; the set stays non-empty and proper."""
    members = list(iter_bits(bits))
    outside = list(iter_bits(((1 << n) - 1) & ~bits))
    move = int(rng.integers(3))
    if move == 1 and outside:
        return bits | 1 << outside[int(rng.integers(len(outside)))]
    if move == 2 and len(members) > 1:
        return bits & ~(1 << members[int(rng.integers(len(members)))])
    if not outside:
        return bits & ~(1 << members[int(rng.integers(len(members)))])
    removed = members[int(rng.integers(len(members)))]
    added = outside[int(rng.integers(len(outside)))]
    return (bits & ~(1 << removed)) | 1 << added


# ============================================================================
# Minimal Percolating Set Enumeration
# ============================================================================


class MinimalSetEnumeration:
    """
    Iterate every inclusion-minimal percolating set.

    Every proper subset of a minimal set is non-percolating, so the sets
    are walked depth-first in ascending index order, extending only
    non-percolating sets of at most `max_size` points. A set whose union
    with every later point still does not percolate is pruned. Sets come
    out in lexicographic order of their sorted points. With `anchored`
    only sets containing point 0 are walked, which loses nothing on a
    point-transitive plane. When the budget runs out the stream ends early
    and `truncated` is set.
    """

    def __init__(
        self,
        plane: IncidencePlane,
        r: int,
        budget: Budget | None = None,
        max_size: int | None = None,
        anchored: bool = False,
    ) -> None:
        validate_threshold(plane.order, r)
        self.plane = plane
        self.r = r
        self.budget = budget or Budget()
        self.max_size = plane.num_points if max_size is None else min(max_size, plane.num_points)
        self.anchored = anchored
        self.truncated = False
        self.nodes = 0

    def __iter__(self) -> Iterator[PointSet]:
        meter = _Meter.from_budget(self.budget)
        n = self.plane.num_points
        try:
            for bits in _minimal_sets(self.plane, self.r, meter, self.max_size, self.anchored):
                yield PointSet(n, bits)
        except BudgetExhaustedError:
            self.truncated = True
            logger.warning("minimal set enumeration truncated after %d nodes", meter.nodes)
        finally:
            self.nodes = meter.nodes


def enumerate_minimal_percolating(
    plane: IncidencePlane, r: int, budget: Budget | None = None, max_size: int | None = None, anchored: bool = False
) -> MinimalSetEnumeration:
    return MinimalSetEnumeration(plane, r, budget, max_size, anchored)


def _minimal_sets(plane: IncidencePlane, r: int, meter: _Meter, max_size: int, anchored: bool) -> Iterator[int]:
    """Depth-first walk over non-percolating prefixes; raises BudgetExhaustedError from the meter."""
    n = plane.num_points
    full = (1 << n) - 1
    stack = [(1, 0)] if anchored else [(1 << x, x) for x in reversed(range(n))]
    while stack:
        bits, last = stack.pop()
        meter.tick()
        if closure_mask(plane, bits, r) == full:
            if is_minimal_percolating(plane, PointSet(n, bits), r):
                yield bits
            continue
        if bits.bit_count() >= max_size or last == n - 1:
            continue
        later = full & ~((1 << (last + 1)) - 1)
        if closure_mask(plane, bits | later, r) != full:
            continue
        for x in range(n - 1, last, -1):
            stack.append((bits | 1 << x, x))


# ============================================================================
# Private Helper Functions
# ============================================================================


def _deadline(budget: Budget) -> float | None:
    return time.time() + budget.time_limit if budget.time_limit is not None else None


def _verify_percolating(plane: IncidencePlane, r: int, witness: PointSet) -> None:
    if closure_mask(plane, witness.bits, r) != (1 << plane.num_points) - 1:
        raise VerificationError(f"witness {witness.indices()} does not percolate at r={r}")
