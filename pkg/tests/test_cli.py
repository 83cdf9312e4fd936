import json

import pytest

from common.exceptions import VerificationError
from percolator import cli


@pytest.fixture(autouse=True)
def _no_dotenv(monkeypatch, tmp_path):
    monkeypatch.setattr(cli, "ENV_FILE", tmp_path / "absent.env")


def run_json(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return json.loads(captured.out)


# ============================================================================
# Successful runs
# ============================================================================


def test_percolate_triangle(capsys):
    artifact = run_json(capsys, "percolate", "--q", "2", "--r", "2", "--points", "0,1,3")
    result = artifact["result"]
    assert result["percolates"]
    assert result["time"] == 2
    assert result["minimal"]
    assert len(result["line_sequence"]) == 7
    assert artifact["config"]["subcommand"] == "percolate"
    assert artifact["config"]["options"]["points"] == "0,1,3"


def test_search_min(capsys):
    result = run_json(capsys, "search", "min", "--q", "5", "--r", "3")["result"]
    assert result["value"] == 6
    assert result["exact"]
    assert len(result["witness"]) == 6


def test_search_minimal_on_fano(capsys):
    result = run_json(capsys, "search", "minimal", "--q", "2", "--r", "2")["result"]
    assert result["count"] == 28
    assert result["min_time"] == result["max_time"] == 2


def test_construct_slow(capsys):
    result = run_json(capsys, "construct", "slow", "--q", "11", "--r", "5")["result"]
    assert result["size"] == 15
    assert result["time"] == 6
    assert all(check["pass"] for check in result["checks"])


def test_construct_oval(capsys):
    result = run_json(capsys, "construct", "oval", "--q", "7")["result"]
    assert result["size"] == 8
    assert result["arc"]


def test_bounds_for_every_threshold(capsys):
    result = run_json(capsys, "bounds", "--q", "4")["result"]
    assert result["desarguesian"]
    assert len(result["reports"]) == 4 * 5
    assert {report["parameter"] for report in result["reports"]} == {"m_r", "M_r", "T_r", "p_c"}


def test_bounds_csv(capsys):
    assert cli.main(["bounds", "--q", "5", "--r", "3", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1] == "parameter,q,r,lower,upper,exact,lower_key,upper_key"
    assert len(lines) == 2 + 4
    assert lines[2].startswith("m_r,5,3,6,6,True")


def test_mc_probability(capsys):
    argv = ["mc", "probability", "--q", "5", "--r", "2", "--p", "1.0", "--trials", "8", "--seed", "1"]
    artifact = run_json(capsys, *argv)
    estimate = artifact["result"]["estimates"][0]
    assert estimate["estimate"] == 1.0
    assert artifact["config"]["rng"] == "PCG64"


def test_mc_bottleneck_csv(capsys):
    argv = ["mc", "bottleneck", "--q", "5", "--r", "3", "--trials", "5", "--seed", "2", "--format", "csv"]
    assert cli.main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "trial,tau_r,tau_perc,equal"
    assert len(lines) == 2 + 5


def test_table_text(capsys):
    assert cli.main(["table", "--seed", "1", "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "q=" in out
    assert "2*" in out
    assert "percolator table" in out


def test_table_small_orders_use_the_exact_walk(capsys):
    cells = run_json(capsys, "table", "--seed", "1")["result"]["cells"]
    assert [(cell["q"], cell["r"]) for cell in cells] == [(3, 2), (3, 3)]
    assert all(cell["strategy"] == "exact" and cell["exact"] for cell in cells)
    assert [cell["value"] for cell in cells] == [2, 2]


# ============================================================================
# Files and determinism
# ============================================================================


def test_plane_file_round_trip(capsys, tmp_path):
    path = tmp_path / "pg3.json"
    assert cli.main(["plane", "--q", "3", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert data["q"] == 3
    assert data["validation"]["pass"]
    assert data["config"]["subcommand"] == "plane"

    result = run_json(capsys, "percolate", "--plane", str(path), "--r", "2", "--points", "0,1,4")["result"]
    assert result["q"] == 3

    assert cli.main(["plane", "--plane", str(path), "--format", "text"]) == 0
    assert "axioms" in capsys.readouterr().out


def test_points_file_from_a_construct_artifact(capsys, tmp_path):
    path = tmp_path / "min.json"
    assert cli.main(["construct", "min", "--q", "5", "--r", "3", "--out", str(path)]) == 0
    result = run_json(capsys, "percolate", "--q", "5", "--r", "3", "--points-file", str(path))["result"]
    assert result["percolates"]
    assert result["minimal"]


def test_seeded_runs_are_byte_identical(tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        argv = ["mc", "threshold", "--q", "7", "--r", "2", "--trials", "16", "--seed", "9", "--out", str(path)]
        assert cli.main(argv) == 0
        outputs.append(path.read_bytes())
    assert outputs[0].replace(b"a.json", b"b.json") == outputs[1]


# ============================================================================
# Failures
# ============================================================================


@pytest.mark.parametrize(
    "argv",
    [
        ["percolate", "--q", "6", "--r", "2", "--points", "0"],
        ["percolate", "--q", "3", "--r", "9", "--points", "0"],
        ["percolate", "--q", "3", "--r", "2", "--points", "0,x"],
        ["percolate", "--q", "3", "--r", "2", "--points", "0,13"],
        ["percolate", "--q", "3", "--r", "2"],
        ["mc", "probability", "--q", "5", "--r", "2"],
        ["search", "max", "--q", "3", "--r", "3", "--strategy", "hillclimb", "--seed", "1"],
        ["construct", "hyperoval", "--q", "5"],
        ["construct", "t3", "--q", "7", "--r", "3"],
        ["bounds", "--r", "3"],
    ],
)
def test_bad_input_exits_with_2(capsys, argv):
    assert cli.main(argv) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error: ")


def test_unreadable_plane_file(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    assert cli.main(["plane", "--plane", str(path)]) == 2


def test_plane_order_mismatch(capsys, tmp_path):
    path = tmp_path / "pg2.json"
    assert cli.main(["plane", "--q", "2", "--out", str(path)]) == 0
    assert cli.main(["percolate", "--plane", str(path), "--q", "3", "--r", "2", "--points", "0"]) == 2


def test_failed_verification_exits_with_1(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise VerificationError("witness does not percolate")

    monkeypatch.setattr(cli.search, "find_min_percolating", broken)
    assert cli.main(["search", "min", "--q", "3", "--r", "2"]) == 1
    assert "witness does not percolate" in capsys.readouterr().err


def test_usage_errors_exit_through_argparse():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["construct", "pentagon", "--q", "5"])
    assert excinfo.value.code == 2
