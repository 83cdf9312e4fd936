import pytest

from common.exceptions import BadRangeError
from common.types import TrialModel
from common.utils import make_rng
from percolator.core.bounds import critical_p
from percolator.core.percolation import percolates
from percolator.core.random_models import (
    bottleneck_from_order,
    linear_scan_tau_perc,
    percolation_probability,
    run_bernoulli_trials,
    run_bottleneck,
    sample_bernoulli,
    sample_uniform_m,
    summarize_bottleneck,
    threshold_scan,
    uniform_percolation_probability,
    wilson_interval,
)


def test_bernoulli_extremes(pg5):
    rng = make_rng(1)
    assert len(sample_bernoulli(pg5, 0.0, rng)) == 0
    assert sample_bernoulli(pg5, 1.0, rng).is_full()
    with pytest.raises(BadRangeError):
        sample_bernoulli(pg5, -0.1, rng)


def test_uniform_sets_have_the_requested_size(pg5):
    rng = make_rng(2)
    for m in (0, 1, 17, 31):
        assert len(sample_uniform_m(pg5, m, rng)) == m
    with pytest.raises(BadRangeError):
        sample_uniform_m(pg5, 32, rng)


def test_wilson_interval_brackets_the_estimate():
    low, high = wilson_interval(30, 100)
    assert low < 0.3 < high
    low, high = wilson_interval(0, 50)
    assert low == pytest.approx(0.0)
    assert high > 0.0


def test_trials_are_reproducible_across_worker_counts(pg5):
    serial = run_bernoulli_trials(pg5, 3, 0.2, 70, seed=5)
    parallel = run_bernoulli_trials(pg5, 3, 0.2, 70, seed=5, threads=2)
    assert serial == parallel
    assert [record.trial for record in serial] == list(range(70))
    assert all(record.model is TrialModel.BERNOULLI for record in serial)


def test_bit_generator_changes_the_stream(pg5):
    pcg = run_bernoulli_trials(pg5, 3, 0.3, 40, seed=9, bit_generator="PCG64")
    philox = run_bernoulli_trials(pg5, 3, 0.3, 40, seed=9, bit_generator="Philox")
    assert [record.size for record in pcg] != [record.size for record in philox]


def test_probability_estimate(pg5):
    estimate = percolation_probability(pg5, 2, 1.0, 10, seed=0)
    assert estimate.estimate == 1.0
    assert estimate.percolated == 10
    assert estimate.ci_low <= 1.0 <= estimate.ci_high
    nothing = percolation_probability(pg5, 2, 0.0, 10, seed=0)
    assert nothing.estimate == 0.0


def test_threshold_scan_is_coupled(pg5):
    grid = [0.05, 0.1, 0.2, 0.4]
    curve = threshold_scan(pg5, 3, grid, 64, seed=3)
    assert [row.p for row in curve] == grid
    # Same stream per trial at every p, so each sample only grows along the grid
    assert [row.percolated for row in curve] == sorted(row.percolated for row in curve)


def test_threshold_scan_rejects_unsorted_grids(pg5):
    with pytest.raises(BadRangeError):
        threshold_scan(pg5, 3, [0.2, 0.1], 10, seed=0)
    with pytest.raises(BadRangeError):
        threshold_scan(pg5, 3, [], 10, seed=0)


def test_uniform_probability(pg5):
    estimate = uniform_percolation_probability(pg5, 2, 31, 5, seed=1)
    assert estimate.m == 31
    assert estimate.p == 1.0
    assert estimate.estimate == 1.0
    assert estimate.to_dict()["m"] == 31


def test_trial_count_must_be_positive(pg5):
    with pytest.raises(BadRangeError):
        run_bernoulli_trials(pg5, 3, 0.1, 0, seed=0)


# ============================================================================
# Permutation process
# ============================================================================


@pytest.mark.parametrize("q,r", [(3, 2), (5, 3), (7, 4)])
def test_binary_search_matches_linear_scan(pg, q, r):
    plane = pg(q)
    for trial in range(25):
        order = [int(x) for x in make_rng(17, trial).permutation(plane.num_points)]
        tau_r, tau_perc = bottleneck_from_order(plane, r, order)
        assert tau_r <= tau_perc
        assert tau_perc == linear_scan_tau_perc(plane, r, order)
        assert percolates(plane, plane.point_set(order[:tau_perc]), r)


def test_tau_r_on_a_hand_order(fano):
    # Points 0 and 1 share line 0; at r = 2 the second point already completes it
    assert bottleneck_from_order(fano, 2, [0, 1, 3, 2, 4, 5, 6]) == (2, 3)
    assert bottleneck_from_order(fano, 1, [6, 5, 4, 3, 2, 1, 0]) == (1, 1)


def test_bottleneck_summary(pg5):
    records = run_bottleneck(pg5, 2, 20, seed=4)
    summary = summarize_bottleneck(records)
    assert summary.trials == 20
    assert 0 <= summary.equal <= 20
    assert summary.mean_tau_r <= summary.mean_tau_perc
    assert all(record.tau_r <= record.tau_perc for record in records)


# ============================================================================
# Desk-scale runs at q = 101
# ============================================================================


@pytest.mark.slow
def test_threshold_window_at_q_101(pg):
    plane = pg(101)
    p_star = critical_p(101, 3)
    below = percolation_probability(plane, 3, p_star / 8, 200, seed=2024)
    above = percolation_probability(plane, 3, 8 * p_star, 200, seed=2024)
    assert below.estimate <= 0.05
    assert above.estimate >= 0.95


@pytest.mark.slow
def test_bottleneck_at_q_101(pg):
    records = run_bottleneck(pg(101), 3, 100, seed=2024)
    summary = summarize_bottleneck(records)
    assert summary.equal_fraction >= 0.9
    assert 21.6 / 4 <= summary.mean_tau_r <= 21.6 * 4
