import itertools
from math import comb

import pytest

from common.bitset import PointSet
from common.exceptions import BadRangeError, NotAPermutationError
from percolator.core.constructions import r_broom
from percolator.core.percolation import (
    InfectionState,
    closure,
    closure_mask,
    closure_points,
    closure_size,
    contains_r_broom,
    covered_by_k_lines,
    fully_infected_lines,
    greedy_percolating_sequence,
    is_minimal_percolating,
    one_by_one_verify,
    percolates,
    percolation_time,
    r_lines_complete_next,
    spread_round,
    time_mask,
)


def random_set(plane, rng, low=1, high=None):
    n = plane.num_points
    size = int(rng.integers(low, (high or n) + 1))
    return plane.point_set(int(x) for x in rng.choice(n, size=size, replace=False))


def mask_of_lines(plane, lines):
    bits = 0
    for line in lines:
        bits |= plane.line_points[line]
    return bits


# ============================================================================
# Hand-checked closures
# ============================================================================


def test_fano_triangle_percolates_in_two_rounds(fano):
    trace = closure(fano, fano.point_set([0, 1, 3]), 2)
    assert trace.percolates
    assert trace.time == 2
    assert trace.rounds[0].new_lines == (0, 1, 3)
    assert trace.rounds[0].new_points == (2, 4, 5)
    assert trace.rounds[1].new_points == (6,)


def test_fano_collinear_pair_stalls(fano):
    trace = closure(fano, fano.point_set([0, 1]), 2)
    assert not trace.percolates
    assert trace.time is None
    assert trace.closure.indices() == [0, 1, 2]
    assert trace.closure_rounds == 1


def test_full_line_is_closed_at_r_equal_3(fano):
    line = fano.point_set(fano.points_of_line[0])
    trace = closure(fano, line, 3)
    assert trace.closure == line
    assert trace.rounds == ()
    assert trace.infected_lines.indices() == [0]


def test_r_broom_percolates_in_one_round(pg5):
    broom = r_broom(pg5, 0, 3)
    assert len(broom) == 3 * 5 + 1
    assert percolation_time(pg5, broom, 3) == 1


@pytest.mark.parametrize("r", [2, 3, 4])
def test_smaller_broom_is_closed(pg5, r):
    broom = r_broom(pg5, 7, r - 1)
    assert closure_points(pg5, broom, r) == broom
    assert not percolates(pg5, broom, r)


def test_two_lines_never_percolate_at_r_3(pg3):
    for l1, l2 in itertools.combinations(range(pg3.num_lines), 2):
        union = PointSet(pg3.num_points, pg3.line_points[l1] | pg3.line_points[l2])
        assert not percolates(pg3, union, 3)


def test_full_threshold(pg3):
    full = pg3.full_points()
    assert percolation_time(pg3, full, 4) == 0
    assert not percolates(pg3, full.without_index(5), 4)


def test_empty_set(pg3):
    empty = PointSet.empty(pg3.num_points)
    assert closure_size(pg3, empty, 1) == 0
    assert not percolates(pg3, empty, 1)


def test_single_point_at_r_1(pg5):
    assert percolation_time(pg5, pg5.point_set([11]), 1) == 1


def test_spread_round_reports_fixpoint(fano):
    state = InfectionState.initial(fano, fano.point_set([0, 1]))
    state, delta = spread_round(fano, state, 2)
    assert not delta.fixpoint
    assert state.round == 1
    state, delta = spread_round(fano, state, 2)
    assert delta.fixpoint
    assert state.round == 1


def test_bad_threshold(pg3):
    with pytest.raises(BadRangeError):
        closure(pg3, pg3.point_set([0]), 0)


# ============================================================================
# Closure properties
# ============================================================================


@pytest.mark.parametrize("q", [3, 5, 7])
def test_closure_is_monotone_and_idempotent(pg, rng, q):
    plane = pg(q)
    for _ in range(170):
        r = int(rng.integers(1, q + 2))
        a = random_set(plane, rng, high=2 * q)
        b = a | random_set(plane, rng, high=q)
        closed_a = closure_mask(plane, a.bits, r)
        closed_b = closure_mask(plane, b.bits, r)
        assert closed_a & a.bits == a.bits
        assert closed_a & closed_b == closed_a
        assert closure_mask(plane, closed_a, r) == closed_a


@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_mask_layer_matches_traced_closure(pg, rng, q):
    plane = pg(q)
    for _ in range(100):
        r = int(rng.integers(1, q + 2))
        points = random_set(plane, rng, high=4 * q)
        if rng.random() < 0.5:
            points = points | r_broom(plane, int(rng.integers(plane.num_points)), int(rng.integers(1, r + 1)))
        trace = closure(plane, points, r)
        assert closure_mask(plane, points.bits, r) == trace.closure.bits
        assert time_mask(plane, points.bits, r) == trace.time


@pytest.mark.parametrize("q", [3, 5, 7])
def test_sets_inside_r_minus_1_lines_do_not_percolate(pg, rng, q):
    plane = pg(q)
    for _ in range(70):
        r = int(rng.integers(2, q + 2))
        lines = rng.choice(plane.num_lines, size=r - 1, replace=False)
        union = 0
        for line in lines:
            union |= plane.line_points[int(line)]
        subset = PointSet(plane.num_points, union) & random_set(plane, rng)
        assert covered_by_k_lines(plane, subset, r - 1) or r - 1 > 4
        assert not percolates(plane, subset, r)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_sets_containing_a_broom_percolate(pg, rng, q):
    plane = pg(q)
    for _ in range(70):
        r = int(rng.integers(1, q + 2))
        center = int(rng.integers(plane.num_points))
        points = r_broom(plane, center, r) | random_set(plane, rng, high=q)
        assert contains_r_broom(plane, points, r)
        assert percolates(plane, points, r)


@pytest.mark.parametrize("q", [5, 7, 11])
def test_r_infected_lines_complete_the_next_round(pg, rng, q):
    plane = pg(q)
    checked = 0
    for _ in range(70):
        r = int(rng.integers(2, q + 1))
        state = InfectionState.initial(plane, random_set(plane, rng, low=r, high=4 * q))
        while True:
            assert r_lines_complete_next(plane, state, r)
            if comb(r, 2) <= q and len(fully_infected_lines(plane, state.points)) >= r:
                checked += 1
            state, delta = spread_round(plane, state, r)
            if delta.fixpoint:
                break
    assert checked > 0


# ============================================================================
# Covers, minimality, one-by-one sequences
# ============================================================================


def test_exact_cover_agrees_with_brute_force(pg3, rng):
    for _ in range(200):
        points = random_set(pg3, rng, high=7)
        k = int(rng.integers(0, 4))
        expected = any(
            points.bits & ~mask_of_lines(pg3, combo) == 0
            for combo in itertools.combinations(range(pg3.num_lines), k)
        )
        assert covered_by_k_lines(pg3, points, k) == expected


def test_cover_with_negative_k(pg3):
    with pytest.raises(BadRangeError):
        covered_by_k_lines(pg3, pg3.point_set([0]), -1)


def test_minimality(fano):
    assert is_minimal_percolating(fano, fano.point_set([0, 1, 3]), 2)
    assert not is_minimal_percolating(fano, fano.point_set([0, 1, 3, 6]), 2)
    assert not is_minimal_percolating(fano, fano.point_set([0, 1]), 2)


@pytest.mark.parametrize("q", [3, 5])
def test_greedy_sequence_exists_iff_percolating(pg, rng, q):
    plane = pg(q)
    for _ in range(100):
        r = int(rng.integers(1, q + 2))
        points = random_set(plane, rng, high=3 * q)
        sequence = greedy_percolating_sequence(plane, points, r)
        assert (sequence is not None) == percolates(plane, points, r)
        if sequence is not None:
            assert one_by_one_verify(plane, points, r, sequence)


def test_one_by_one_rejects_bad_orders(fano):
    points = fano.point_set([0, 1, 3])
    assert not one_by_one_verify(fano, points, 2, [6, 5, 4, 3, 2, 1, 0])
    with pytest.raises(NotAPermutationError):
        one_by_one_verify(fano, points, 2, [0, 1, 2])
    with pytest.raises(NotAPermutationError):
        one_by_one_verify(fano, points, 2, [0, 0, 1, 2, 3, 4, 5])
