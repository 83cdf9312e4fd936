import json

import pytest

from common.exceptions import (
    AxiomViolationError,
    IdenticalArgumentsError,
    NoCoordinatesError,
    PlaneParseError,
    TooManyError,
)
from percolator.core.plane import (
    IncidencePlane,
    dual,
    greedy_general_position_lines,
    is_arc,
    lines_in_general_position,
    load_plane,
    plane_to_dict,
    save_plane,
    validate_axioms,
)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 7, 8, 9])
def test_pg2_satisfies_axioms(pg, q):
    plane = pg(q)
    n = q * q + q + 1
    assert plane.num_points == n
    assert plane.num_lines == n
    assert all(len(points) == q + 1 for points in plane.points_of_line)
    assert all(len(lines) == q + 1 for lines in plane.lines_of_point)
    report = validate_axioms(plane)
    assert report.passed, report.to_dict()


@pytest.mark.parametrize("q", [3, 4])
def test_dual_is_a_plane(pg, q):
    assert validate_axioms(dual(pg(q))).passed


def test_point_indexing(pg5):
    q = 5
    assert pg5.point_index((1, 0, 0)) == 0
    assert pg5.point_index((3, 1, 0)) == 1 + 3
    assert pg5.point_index((2, 4, 1)) == 1 + q + 4 * q + 2
    # Any nonzero multiple names the same point
    assert pg5.point_index((2, 4, 2)) == pg5.point_index((1, 2, 1)) == 17
    assert pg5.point_coords[17] == (1, 2, 1)


def test_incidence_follows_the_bilinear_form(pg):
    plane = pg(4)
    gf = plane.gf
    for line, (a, b, c) in enumerate(plane.line_coords):
        for point, (x, y, z) in enumerate(plane.point_coords):
            dot = gf.add(gf.add(gf.mul(a, x), gf.mul(b, y)), gf.mul(c, z))
            assert (dot == 0) == bool(plane.line_points[line] >> point & 1)


def test_joins_and_meets(pg5):
    for p1, p2 in [(0, 1), (3, 30), (12, 7)]:
        line = pg5.line_through(p1, p2)
        assert line == pg5.line_through(p2, p1)
        assert p1 in pg5.points_of_line[line]
        assert p2 in pg5.points_of_line[line]
    for l1, l2 in [(0, 1), (4, 22)]:
        point = pg5.meet(l1, l2)
        assert l1 in pg5.lines_of_point[point]
        assert l2 in pg5.lines_of_point[point]
    with pytest.raises(IdenticalArgumentsError):
        pg5.line_through(4, 4)
    with pytest.raises(IdenticalArgumentsError):
        pg5.meet(9, 9)


def test_fano_file(fano):
    assert fano.order == 2
    assert fano.num_points == 7
    assert not fano.has_coordinates
    assert not fano.point_transitive
    assert fano.line_through(3, 5) == 3
    with pytest.raises(NoCoordinatesError):
        fano.point_index((1, 0, 0))


def test_counts_failure_is_reported():
    lines = [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6]]
    candidate = IncidencePlane(order=2, num_points=7, line_points=tuple(sum(1 << p for p in line) for line in lines))
    report = validate_axioms(candidate)
    assert not report.passed
    assert not report.check("counts").passed


def test_regularity_failure_is_reported():
    lines = [[0, 1, 3], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]
    candidate = IncidencePlane(order=2, num_points=7, line_points=tuple(sum(1 << p for p in line) for line in lines))
    report = validate_axioms(candidate)
    assert not report.passed
    assert not report.check("point_regularity").passed


def test_broken_file_raises_with_report(tmp_path):
    path = tmp_path / "broken.json"
    lines = [[0, 1, 3], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]
    path.write_text(json.dumps({"q": 2, "points": 7, "lines": lines}))
    with pytest.raises(AxiomViolationError) as excinfo:
        load_plane(path)
    assert not excinfo.value.report.passed


@pytest.mark.parametrize(
    "content",
    [
        "not json",
        json.dumps([1, 2, 3]),
        json.dumps({"q": 2, "points": 7}),
        json.dumps({"q": 2, "points": 7, "lines": [[2, 1, 0]]}),
        json.dumps({"q": 2, "points": 7, "lines": [[0, 1, 9]]}),
        json.dumps({"q": 1, "points": 3, "lines": []}),
    ],
)
def test_malformed_files(tmp_path, content):
    path = tmp_path / "plane.json"
    path.write_text(content)
    with pytest.raises(PlaneParseError):
        load_plane(path)


def test_missing_file(tmp_path):
    with pytest.raises(PlaneParseError):
        load_plane(tmp_path / "absent.json")


def test_save_and_load_keep_coordinates(pg, tmp_path):
    plane = pg(4)
    path = save_plane(plane, tmp_path / "pg4.json")
    loaded = load_plane(path)
    assert loaded.line_points == plane.line_points
    assert loaded.has_coordinates
    assert loaded.point_coords == plane.point_coords
    assert loaded.line_coords == plane.line_coords
    assert loaded.line_index((1, 0, 0)) == plane.line_index((1, 0, 0))


def test_inconsistent_coordinates_rejected(pg, tmp_path):
    data = plane_to_dict(pg(2))
    data["coordinates"][0], data["coordinates"][1] = data["coordinates"][1], data["coordinates"][0]
    path = tmp_path / "swapped.json"
    path.write_text(json.dumps(data))
    with pytest.raises(PlaneParseError):
        load_plane(path)


def test_arcs_and_general_position(pg5):
    line = pg5.points_of_line[0]
    assert not is_arc(pg5, pg5.point_set(line[:3]))
    assert is_arc(pg5, pg5.point_set(line[:2]))
    through_zero = pg5.lines_of_point[0]
    assert not lines_in_general_position(pg5, through_zero[:3])
    assert lines_in_general_position(pg5, through_zero[:2])


def test_greedy_lines_on_fano(fano):
    lines = greedy_general_position_lines(fano, 4)
    assert lines == [0, 1, 3, 6]
    assert lines_in_general_position(fano, lines)
    with pytest.raises(TooManyError):
        greedy_general_position_lines(fano, 5)


@pytest.mark.parametrize("q", [5, 7, 11])
def test_greedy_lines_reach_sqrt_2q(pg, q):
    plane = pg(q)
    r = 1
    while (r + 1) ** 2 < 2 * q:
        r += 1
    lines = greedy_general_position_lines(plane, r)
    assert len(lines) == r
    assert lines_in_general_position(plane, lines)
