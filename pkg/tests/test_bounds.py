from fractions import Fraction

import pytest

from common.exceptions import BadRangeError, VerificationError
from percolator.core.bounds import (
    ORACLE_MAX_J,
    BoundReport,
    M_r_bounds,
    T_r_bounds,
    best_lp_bound,
    critical_p,
    expected_rich_lines,
    is_feasible,
    lp_h_min,
    lp_vertex,
    lp_vertex_oracle,
    m_r_bounds,
    p_c_bounds,
    reference_table,
    threshold_exponent,
)

# ============================================================================
# m_r
# ============================================================================


def test_m_r_exact_below_sqrt_2q():
    report = m_r_bounds(5, 3)
    assert report.exact
    assert report.value == 6
    assert report.upper_key == "general-position-exact"


def test_m_r_exact_in_desarguesian_planes():
    report = m_r_bounds(7, 4, desarguesian=True)
    assert report.exact
    assert report.value == 10


def test_m_r_gap_without_coordinates():
    report = m_r_bounds(7, 4)
    assert not report.exact
    assert report.value is None
    assert report.lower >= 10
    assert report.upper == 13
    assert report.upper_key == "broom-upper"


def test_m_r_lp_lower_bound_takes_over():
    report = m_r_bounds(11, 11)
    assert report.lower >= 77
    assert report.lower_key == "lp-lower"
    assert report.upper == 111
    assert report.metadata["alpha"] == 0


def test_m_r_full_threshold():
    report = m_r_bounds(5, 6)
    assert report.exact
    assert report.value == 31


@pytest.mark.parametrize("q,r", [(5, 0), (5, 7)])
def test_thresholds_out_of_range(q, r):
    for bound in (m_r_bounds, M_r_bounds, T_r_bounds, p_c_bounds):
        with pytest.raises(BadRangeError):
            bound(q, r)


# ============================================================================
# LP lower bound
# ============================================================================


def test_lp_closed_form_value():
    evaluation = lp_h_min(11, 11, 1, 22)
    assert evaluation.value == 77
    assert evaluation.valid


def test_lp_window():
    assert not lp_h_min(11, 11, 1, 12).valid
    assert lp_h_min(11, 11, 1, 13).valid
    assert lp_h_min(11, 11, 1, 49).valid
    assert not lp_h_min(11, 11, 1, 50).valid


@pytest.mark.parametrize("q", [7, 11, 13])
@pytest.mark.parametrize("offset", [2, 1, 0])
@pytest.mark.parametrize("j", [1, 2, 3])
def test_vertex_oracle_matches_closed_form(q, offset, j):
    r = q - offset
    n_lines = (j + 1) * q
    closed = lp_h_min(q, r, j, n_lines)
    assert closed.valid
    oracle = lp_vertex_oracle(q, r, j, n_lines)
    assert oracle.minimum == closed.value
    vertex = lp_vertex(q, r, j, n_lines)
    assert vertex.h == closed.value
    assert is_feasible(q, vertex)
    assert oracle.vertices >= 1


def test_best_lp_bound_is_valid():
    j, n_lines, value = best_lp_bound(11, 11)
    assert lp_h_min(11, 11, j, n_lines).valid
    assert value >= 77


def test_lp_argument_checks():
    with pytest.raises(BadRangeError):
        lp_h_min(7, 5, 0, 10)
    with pytest.raises(BadRangeError):
        lp_vertex(7, 5, 1, 1)
    with pytest.raises(BadRangeError):
        lp_vertex_oracle(7, 5, ORACLE_MAX_J + 1, 40)


# ============================================================================
# M_r and T_r
# ============================================================================


@pytest.mark.parametrize(
    "q,r,desarguesian,expected,key",
    [
        (5, 3, False, 11, "broom-lower"),
        (4, 4, True, 15, "dual-hyperoval-exact"),
        (8, 8, True, 63, "hyperoval-complement-exact"),
        (5, 1, False, 0, "empty-set-exact"),
        (5, 6, False, 30, "uninfected-point-upper"),
    ],
)
def test_M_r_exact_cases(q, r, desarguesian, expected, key):  # noqa: N802
    report = M_r_bounds(q, r, desarguesian)
    assert report.exact
    assert report.value == expected
    assert report.lower_key == key


def test_M_r_gap():  # noqa: N802
    report = M_r_bounds(7, 6)
    assert not report.exact
    assert (report.lower, report.upper) == (36, 40)
    assert report.metadata["arc_comparison"] == 33


def test_M_r_hyperoval_cases_need_coordinates():  # noqa: N802
    assert not M_r_bounds(8, 8).exact


@pytest.mark.parametrize(
    "q,r,expected,key",
    [
        (11, 5, 6, "slow-chain-lower"),
        (7, 3, 3, "small-r-exact"),
        (5, 3, 3, "small-r-exact"),
        (7, 4, 4, "small-r-exact"),
        (7, 1, 1, "base-case"),
        (7, 2, 2, "base-case"),
        (7, 8, 0, "full-threshold-exact"),
    ],
)
def test_T_r_exact_cases(q, r, expected, key):  # noqa: N802
    report = T_r_bounds(q, r)
    assert report.exact
    assert report.value == expected
    assert report.lower_key == key


@pytest.mark.parametrize("q,r,lower,upper", [(7, 7, 14, 57), (5, 5, 8, 31), (5, 4, 5, 31)])
def test_T_r_published_lower_bound(q, r, lower, upper):  # noqa: N802
    report = T_r_bounds(q, r)
    assert not report.exact
    assert report.value is None
    assert (report.lower, report.upper) == (lower, upper)
    assert report.lower_key == "published-table"


def test_T_r_published_entry_carries_source():  # noqa: N802
    published = T_r_bounds(5, 5).metadata["published"]
    assert published["exact"]
    assert published["source"] == "published exhaustive search"
    assert T_r_bounds(7, 7).metadata["published"]["source"] == "published heuristic search"


def test_T_r_small_threshold_window():  # noqa: N802
    report = T_r_bounds(3, 3)
    assert (report.lower, report.upper) == (2, 3)
    assert not report.exact


def test_T_r_r4_below_six_is_open():  # noqa: N802
    report = T_r_bounds(5, 4)
    assert not report.exact
    assert report.upper_key == "round-progress-upper"


def test_reference_table():
    table = reference_table()
    assert len(table) == 14
    exact = {(entry.q, entry.r): entry.time for entry in table if entry.exact}
    assert exact == {(3, 2): 2, (3, 3): 2, (5, 3): 3, (5, 4): 5, (5, 5): 8}


def test_report_rejects_inconsistent_bounds():
    with pytest.raises(VerificationError):
        BoundReport("m_r", 5, 3, 7, "a", 6, "b")
    with pytest.raises(VerificationError):
        BoundReport("m_r", 5, 3, 6, "a", 7, "b", exact=True)


# ============================================================================
# Critical probability
# ============================================================================


def test_threshold_exponent():
    assert threshold_exponent(3) == Fraction(-5, 3)
    assert threshold_exponent(2) == -2
    with pytest.raises(BadRangeError):
        threshold_exponent(0)


def test_critical_p():
    assert critical_p(101, 2) == pytest.approx(101**-2)
    assert critical_p(101, 3) == pytest.approx(101 ** (-5 / 3))
    report = p_c_bounds(101, 3)
    assert report.lower == report.upper == pytest.approx(critical_p(101, 3))
    assert report.metadata["exponent"] == "-5/3"


@pytest.mark.parametrize("p", [0.0, 0.001, 0.01, 0.1])
def test_rich_line_estimates_bracket_the_exact_value(p):
    estimate = expected_rich_lines(13, 3, p)
    assert estimate.lower <= estimate.exact + 1e-12
    assert estimate.exact <= estimate.upper + 1e-12


def test_rich_lines_probability_range():
    with pytest.raises(BadRangeError):
        expected_rich_lines(13, 3, 1.5)
