"""
Random Point-Set Models
=======================

Monte Carlo experiments on random point sets:

- Bernoulli sets: every point independently with probability p.
- Uniform m-sets: a uniformly random m-subset.
- The permutation process: points revealed in uniformly random order;
  tau_r is the first prefix length with a line holding r revealed points,
  tau_perc the first prefix length that percolates.

Trial i always draws from the stream keyed by (seed, i), so results do not
depend on scheduling or worker count. A threshold scan reuses the same
streams at every p, which couples the samples: each trial's Bernoulli set
only grows with p.

Public API:
    TrialRecord, ProbabilityEstimate, BottleneckSummary
    sample_bernoulli, sample_uniform_m
    run_bernoulli_trials, percolation_probability, threshold_scan
    run_uniform_trials, uniform_percolation_probability
    bottleneck_trial, bottleneck_from_order, linear_scan_tau_perc
    run_bottleneck, summarize_bottleneck, wilson_interval
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import binomtest

from common.bitset import PointSet, mask_of
from common.exceptions import BadRangeError, VerificationError
from common.types import TrialModel
from common.utils import make_rng

from .percolation import closure_mask
from .plane import IncidencePlane
from .workers import run_ordered

logger = logging.getLogger(__name__)

# Trials handed to one worker job
TRIAL_BLOCK = 32

ESTIMATE_COLUMNS = ("p", "trials", "percolated", "estimate", "ci_low", "ci_high")
BOTTLENECK_COLUMNS = ("trial", "tau_r", "tau_perc", "equal")


# ============================================================================
# Records
# ============================================================================


@dataclass(frozen=True)
class TrialRecord:
    """
    One Monte Carlo trial.

    Attributes:
        trial: Trial index (the stream key)
        seed: Master seed
        model: bernoulli | uniform | permutation
        parameter: p for bernoulli, m for uniform, None for permutation
        size: Sampled set size (the tau_perc prefix for permutation trials)
        percolated: Whether the sampled set percolates
        tau_r / tau_perc: Permutation trials only
    """

    trial: int
    seed: int
    model: TrialModel
    parameter: float | None
    size: int
    percolated: bool
    tau_r: int | None = None
    tau_perc: int | None = None

    def __post_init__(self) -> None:
        if self.tau_r is not None and self.tau_perc is not None and self.tau_r > self.tau_perc:
            raise VerificationError(f"trial {self.trial}: tau_r={self.tau_r} exceeds tau_perc={self.tau_perc}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "model": self.model.value,
            "parameter": self.parameter,
            "size": self.size,
            "percolated": self.percolated,
            "tau_r": self.tau_r,
            "tau_perc": self.tau_perc,
        }


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Fraction of percolating trials with a 95% Wilson interval."""

    p: float
    trials: int
    percolated: int
    estimate: float
    ci_low: float
    ci_high: float
    m: int | None = None

    def row(self) -> list[Any]:
        return [self.p, self.trials, self.percolated, self.estimate, self.ci_low, self.ci_high]

    def to_dict(self) -> dict[str, Any]:
        data = dict(zip(ESTIMATE_COLUMNS, self.row(), strict=True))
        if self.m is not None:
            data["m"] = self.m
        return data


@dataclass(frozen=True)
class BottleneckSummary:
    trials: int
    equal: int
    equal_fraction: float
    mean_tau_r: float
    mean_tau_perc: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "trials": self.trials,
            "equal": self.equal,
            "equal_fraction": self.equal_fraction,
            "mean_tau_r": self.mean_tau_r,
            "mean_tau_perc": self.mean_tau_perc,
        }


# ============================================================================
# Sampling
# ============================================================================


def sample_bernoulli(plane: IncidencePlane, p: float, rng: np.random.Generator) -> PointSet:
    """Each point independently with probability p.

    Raises:
        BadRangeError: If p is outside [0, 1]
    """
    if not 0.0 <= p <= 1.0:
        raise BadRangeError(f"p must be in [0, 1], got: {p}")
    draws = rng.random(plane.num_points)
    return PointSet(plane.num_points, mask_of(int(i) for i in np.flatnonzero(draws < p)))


def sample_uniform_m(plane: IncidencePlane, m: int, rng: np.random.Generator) -> PointSet:
    """A uniformly random m-subset.

    Raises:
        BadRangeError: If m is outside 0..n
    """
    n = plane.num_points
    if not 0 <= m <= n:
        raise BadRangeError(f"m must be in 0..{n}, got: {m}")
    return PointSet(n, mask_of(int(i) for i in rng.choice(n, size=m, replace=False)))


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """95% Wilson score interval."""
    interval = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(interval.low), float(interval.high)


# ============================================================================
# Bernoulli and Uniform Models
# ============================================================================


def run_bernoulli_trials(
    plane: IncidencePlane,
    r: int,
    p: float,
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> list[TrialRecord]:
    """Bernoulli(p) trials 0..trials-1, in trial order."""
    return _run_trials(TrialModel.BERNOULLI, plane, r, p, trials, seed, threads, bit_generator)


def percolation_probability(
    plane: IncidencePlane,
    r: int,
    p: float,
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> ProbabilityEstimate:
    """
    Estimate P(Bernoulli(p) set percolates).

    Raises:
        BadRangeError: If trials < 1 or p is outside [0, 1]
    """
    records = run_bernoulli_trials(plane, r, p, trials, seed, threads, bit_generator)
    return _estimate(p, records)


def threshold_scan(
    plane: IncidencePlane,
    r: int,
    grid: Sequence[float],
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> list[ProbabilityEstimate]:
    """
    One percolation_probability row per grid point.

    A drop in the estimate along the grid is logged, not raised; a sampled
    curve need not be monotone.

    Raises:
        BadRangeError: If the grid is empty or not sorted ascending
    """
    if not grid or any(a > b for a, b in zip(grid, grid[1:], strict=False)):
        raise BadRangeError(f"grid must be non-empty and sorted ascending, got: {list(grid)}")
    curve = [percolation_probability(plane, r, p, trials, seed, threads, bit_generator) for p in grid]
    for before, after in zip(curve, curve[1:], strict=False):
        if after.estimate < before.estimate:
            logger.warning(
                "threshold curve drops from %.4f at p=%g to %.4f at p=%g",
                before.estimate, before.p, after.estimate, after.p,
            )
    return curve


def run_uniform_trials(
    plane: IncidencePlane,
    r: int,
    m: int,
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> list[TrialRecord]:
    """Uniform m-set trials 0..trials-1, in trial order."""
    return _run_trials(TrialModel.UNIFORM, plane, r, m, trials, seed, threads, bit_generator)


def uniform_percolation_probability(
    plane: IncidencePlane,
    r: int,
    m: int,
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> ProbabilityEstimate:
    """Estimate P(uniform m-set percolates); reported with p = m/n."""
    records = run_uniform_trials(plane, r, m, trials, seed, threads, bit_generator)
    estimate = _estimate(m / plane.num_points, records)
    return ProbabilityEstimate(
        estimate.p, estimate.trials, estimate.percolated, estimate.estimate, estimate.ci_low, estimate.ci_high, m
    )


# ============================================================================
# Permutation Process
# ============================================================================


def bottleneck_trial(plane: IncidencePlane, r: int, rng: np.random.Generator) -> tuple[int, int]:
    """(tau_r, tau_perc) for one uniformly random point order."""
    order = [int(x) for x in rng.permutation(plane.num_points)]
    return bottleneck_from_order(plane, r, order)


def bottleneck_from_order(plane: IncidencePlane, r: int, order: Sequence[int]) -> tuple[int, int]:
    """
    (tau_r, tau_perc) for a given point order.

    tau_r comes from per-line counters. Percolation is monotone in the
    prefix, so tau_perc is found by binary search on [tau_r, n] and then
    checked at the found length and the one before it.

    Raises:
        BadRangeError: If r < 1
        VerificationError: If the binary search result fails the check
    """
    if r < 1:
        raise BadRangeError(f"r must be at least 1, got: {r}")
    n = plane.num_points
    full = (1 << n) - 1
    counters = [0] * plane.num_lines
    prefixes = [0] * (n + 1)
    tau_r = n
    found = False
    for i, point in enumerate(order, start=1):
        prefixes[i] = prefixes[i - 1] | (1 << point)
        if not found:
            for line in plane.lines_of_point[point]:
                counters[line] += 1
                if counters[line] >= r:
                    found = True
            if found:
                tau_r = i

    def percolates_at(length: int) -> bool:
        return closure_mask(plane, prefixes[length], r) == full

    low, high = tau_r, n
    while low < high:
        middle = (low + high) // 2
        if percolates_at(middle):
            high = middle
        else:
            low = middle + 1
    if not percolates_at(low) or (low > 1 and percolates_at(low - 1)):
        raise VerificationError(f"binary search returned tau_perc={low}, which is not the first percolating prefix")
    return tau_r, low


def linear_scan_tau_perc(plane: IncidencePlane, r: int, order: Sequence[int]) -> int:
    """First percolating prefix length by scanning every prefix."""
    full = (1 << plane.num_points) - 1
    bits = 0
    for i, point in enumerate(order, start=1):
        bits |= 1 << point
        if closure_mask(plane, bits, r) == full:
            return i
    raise VerificationError("the full point set does not percolate")


def run_bottleneck(
    plane: IncidencePlane,
    r: int,
    trials: int,
    seed: int,
    threads: int = 1,
    bit_generator: str | None = None,
) -> list[TrialRecord]:
    """Permutation trials 0..trials-1, in trial order."""
    return _run_trials(TrialModel.PERMUTATION, plane, r, None, trials, seed, threads, bit_generator)


def summarize_bottleneck(records: Sequence[TrialRecord]) -> BottleneckSummary:
    tau_r = np.array([record.tau_r for record in records], dtype=float)
    tau_perc = np.array([record.tau_perc for record in records], dtype=float)
    equal = int(np.count_nonzero(tau_r == tau_perc))
    return BottleneckSummary(
        trials=len(records),
        equal=equal,
        equal_fraction=equal / len(records) if records else 0.0,
        mean_tau_r=float(tau_r.mean()) if records else 0.0,
        mean_tau_perc=float(tau_perc.mean()) if records else 0.0,
    )


# ============================================================================
# Private Helper Functions
# ============================================================================


def _run_trials(
    model: TrialModel,
    plane: IncidencePlane,
    r: int,
    parameter: float | None,
    trials: int,
    seed: int,
    threads: int,
    bit_generator: str | None,
) -> list[TrialRecord]:
    if trials < 1:
        raise BadRangeError(f"trials must be at least 1, got: {trials}")
    if model is TrialModel.BERNOULLI and parameter is not None and not 0.0 <= parameter <= 1.0:
        raise BadRangeError(f"p must be in [0, 1], got: {parameter}")
    if model is TrialModel.UNIFORM and parameter is not None and not 0 <= parameter <= plane.num_points:
        raise BadRangeError(f"m must be in 0..{plane.num_points}, got: {parameter}")
    jobs = [
        (model, plane, r, parameter, seed, start, min(start + TRIAL_BLOCK, trials), bit_generator)
        for start in range(0, trials, TRIAL_BLOCK)
    ]
    blocks = run_ordered(_trial_block, jobs, threads)
    records = [record for block in blocks for record in block]
    logger.info("%s: %d trials, %d percolated", model.value, len(records), sum(record.percolated for record in records))
    return records


def _trial_block(
    model: TrialModel,
    plane: IncidencePlane,
    r: int,
    parameter: float | None,
    seed: int,
    start: int,
    stop: int,
    bit_generator: str | None,
) -> list[TrialRecord]:
    full = (1 << plane.num_points) - 1
    records = []
    for trial in range(start, stop):
        rng = make_rng(seed, trial, bit_generator=bit_generator)
        if model is TrialModel.PERMUTATION:
            tau_r, tau_perc = bottleneck_trial(plane, r, rng)
            records.append(TrialRecord(trial, seed, model, None, tau_perc, True, tau_r, tau_perc))
            continue
        if model is TrialModel.BERNOULLI:
            sample = sample_bernoulli(plane, float(parameter or 0.0), rng)
        else:
            sample = sample_uniform_m(plane, int(parameter or 0), rng)
        percolated = closure_mask(plane, sample.bits, r) == full
        records.append(TrialRecord(trial, seed, model, parameter, len(sample), percolated))
    return records


def _estimate(p: float, records: Sequence[TrialRecord]) -> ProbabilityEstimate:
    hits = sum(1 for record in records if record.percolated)
    low, high = wilson_interval(hits, len(records))
    return ProbabilityEstimate(
        p=p, trials=len(records), percolated=hits, estimate=hits / len(records), ci_low=low, ci_high=high
    )
