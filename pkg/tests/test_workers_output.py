import json

import pytest

from common.types import OutputFormat, RunConfig
from percolator.core.output import Artifact, emit, format_time_table, render
from percolator.core.workers import iter_ordered, run_ordered


def square_after(value, delay_rank):
    # Busy work so later jobs can finish before earlier ones
    total = 0
    for i in range(delay_rank * 20_000):
        total += i
    return value * value


@pytest.mark.parametrize("threads", [1, 2, 3])
def test_results_come_back_in_job_order(threads):
    jobs = [(value, 5 - value) for value in range(6)]
    assert run_ordered(square_after, jobs, threads) == [0, 1, 4, 9, 16, 25]


def test_inline_iteration_is_lazy():
    seen = []

    def record(value):
        seen.append(value)
        return value

    results = iter_ordered(record, [(1,), (2,), (3,)])
    assert next(results) == 1
    assert seen == [1]


# ============================================================================
# Rendering
# ============================================================================


@pytest.fixture
def config():
    return RunConfig(subcommand="bounds", q=5, r=3)


def test_json_wraps_the_result(config):
    text = render(Artifact({"value": 6}), OutputFormat.JSON, config)
    data = json.loads(text)
    assert data["result"] == {"value": 6}
    assert data["config"]["subcommand"] == "bounds"


def test_flat_json_keeps_the_data_schema(config):
    data = json.loads(render(Artifact({"q": 5, "points": 31}, flat=True), OutputFormat.JSON, config))
    assert data["q"] == 5
    assert data["config"]["q"] == 5
    assert "result" not in data


def test_csv_falls_back_to_key_value_rows(config):
    text = render(Artifact({"b": [1, 2], "a": 1}), OutputFormat.CSV, config)
    lines = text.splitlines()
    assert lines[0].startswith("# config: {")
    assert lines[1:] == ["key,value", "a,1", 'b,"[1, 2]"']


def test_text_falls_back_to_indented_json(config):
    text = render(Artifact({"a": 1}), OutputFormat.TEXT, config)
    assert "percolator bounds" in text
    assert '"a": 1' in text


def test_emit_writes_the_output_path(tmp_path):
    config = RunConfig(subcommand="bounds", q=5, output_path=tmp_path / "out" / "b.json")
    path = emit(Artifact({"value": 1}), config)
    assert path == (tmp_path / "out" / "b.json").resolve()
    assert json.loads(path.read_text())["result"] == {"value": 1}


def test_emit_defaults_to_stdout(config, capsys):
    assert emit(Artifact({"value": 1}), config) is None
    assert json.loads(capsys.readouterr().out)["result"] == {"value": 1}


def test_time_table_marks_exact_entries():
    table = format_time_table(
        [
            {"q": 3, "r": 2, "value": 2, "exact": True},
            {"q": 5, "r": 5, "value": 8, "exact": False},
            {"q": 7, "r": 7, "value": None, "exact": False},
        ]
    )
    rows = [[cell.strip() for cell in row.split(" | ")] for row in table.splitlines()]
    assert rows[1] == ["q=", "3", "5", "7"]
    assert rows[3] == ["T>=", "2*", "8", "-"]
