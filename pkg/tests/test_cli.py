import json

import pytest
from click.testing import CliRunner

from gract.cli import main
from gract.movement import spiral_decode


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """gen -> build (both modes) once for the whole module."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    csv = root / "fleet.csv"
    res = runner.invoke(main, ["gen", "--objects", "15", "--instants", "120",
                               "--seed", "3", "--grid-w", "256",
                               "--grid-h", "256", "--out", str(csv)])
    assert res.exit_code == 0, res.output
    idx = root / "fleet.idx"
    res = runner.invoke(main, ["build", "--input", str(csv), "--period", "24",
                               "--mode", "gract", "--out", str(idx)])
    assert res.exit_code == 0, res.output
    return {"root": root, "csv": csv, "idx": idx}


@pytest.fixture()
def runner():
    return CliRunner()


def test_gen_is_deterministic(tmp_path, runner):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        res = runner.invoke(main, ["gen", "--objects", "5", "--instants", "40",
                                   "--seed", "9", "--out", str(out)])
        assert res.exit_code == 0
    assert out1.read_text() == out2.read_text()


def test_query_position(workspace, runner):
    res = runner.invoke(main, ["query", "position", "--index",
                               str(workspace["idx"]),
                               "--object", "o0003", "--t", "50"])
    assert res.exit_code == 0
    x, y = res.output.split()
    assert x.isdigit() and y.isdigit()


def test_query_position_reference_path(tmp_path, runner):
    # one object walking the reference path from (0, 2); instant 5 is (7, 7)
    csv = tmp_path / "one.csv"
    rows = ["objectId,timestamp,x,y"]
    pos = (0, 2)
    rows.append(f"ship,0,{pos[0] * 50 + 25},{pos[1] * 50 + 25}")
    for i, code in enumerate([8, 9, 8, 9, 8, 7, 9, 8, 7, 9]):
        dx, dy = spiral_decode(code)
        pos = (pos[0] + dx, pos[1] + dy)
        rows.append(f"ship,{(i + 1) * 60},{pos[0] * 50 + 25},{pos[1] * 50 + 25}")
    csv.write_text("\n".join(rows) + "\n")
    idx = tmp_path / "one.idx"
    res = runner.invoke(main, ["build", "--input", str(csv), "--period", "16",
                               "--grid-w", "16", "--grid-h", "16",
                               "--out", str(idx)])
    assert res.exit_code == 0, res.output
    res = runner.invoke(main, ["query", "position", "--index", str(idx),
                               "--object", "ship", "--t", "5"])
    assert res.exit_code == 0
    assert res.output.strip() == "7 7"


def test_query_trajectory_rows(workspace, runner):
    res = runner.invoke(main, ["query", "trajectory", "--index",
                               str(workspace["idx"]),
                               "--object", "o0001", "--ts", "10",
                               "--te", "14"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert len(lines) == 5
    assert lines[0].split()[0] == "10"


def test_query_slice_sorted(workspace, runner):
    res = runner.invoke(main, ["query", "slice", "--index",
                               str(workspace["idx"]),
                               "--rect", "0,0,255,255", "--t", "60"])
    assert res.exit_code == 0
    objs = [line.split()[0] for line in res.output.strip().splitlines()]
    assert objs == sorted(objs)
    assert len(objs) > 0


def test_query_interval_json(workspace, runner):
    res = runner.invoke(main, ["query", "interval", "--index",
                               str(workspace["idx"]),
                               "--rect", "0,0,255,255", "--ts", "5",
                               "--te", "20", "--json"])
    assert res.exit_code == 0
    rows = [json.loads(line) for line in res.output.strip().splitlines()]
    assert all("object" in r for r in rows)


def test_stats_output(workspace, runner):
    res = runner.invoke(main, ["stats", "--index", str(workspace["idx"])])
    assert res.exit_code == 0
    fields = dict(line.split() for line in res.output.strip().splitlines())
    assert fields["mode"] == "gract"
    assert int(fields["total_bytes"]) > 0
    res = runner.invoke(main, ["stats", "--index", str(workspace["idx"]),
                               "--json"])
    assert json.loads(res.output)["period"] == 24


def test_verify_passes(workspace, runner):
    res = runner.invoke(main, ["verify", "--input", str(workspace["csv"]),
                               "--period", "24", "--queries", "25",
                               "--seed", "5"])
    assert res.exit_code == 0, res.output
    assert "gract position: 25/25 match" in res.output
    assert "scdc interval: 25/25 match" in res.output


def test_bench_reports_counters(workspace, runner):
    res = runner.invoke(main, ["bench", "--index", str(workspace["idx"]),
                               "--workload", "position=10,trajectory=5",
                               "--threads", "2", "--json"])
    assert res.exit_code == 0, res.output
    rows = [json.loads(line) for line in res.output.strip().splitlines()]
    assert rows[0]["kind"] == "position"
    assert rows[1]["count"] == 5
    assert all("mean_ms" in r for r in rows)


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, runner):
        res = runner.invoke(main, ["gen", "--bogus"])
        assert res.exit_code == 2

    def test_unknown_object_is_domain_error(self, workspace, runner):
        res = runner.invoke(main, ["query", "position", "--index",
                                   str(workspace["idx"]),
                                   "--object", "ghost", "--t", "1"])
        assert res.exit_code == 1

    def test_instant_out_of_range_is_domain_error(self, workspace, runner):
        res = runner.invoke(main, ["query", "position", "--index",
                                   str(workspace["idx"]),
                                   "--object", "o0001", "--t", "99999"])
        assert res.exit_code == 1

    def test_missing_index_is_io_error(self, runner):
        res = runner.invoke(main, ["query", "position", "--index",
                                   "missing.idx", "--object", "x", "--t", "0"])
        assert res.exit_code == 3

    def test_corrupt_index_is_format_error(self, tmp_path, runner):
        bad = tmp_path / "bad.idx"
        bad.write_bytes(b"garbage")
        res = runner.invoke(main, ["stats", "--index", str(bad)])
        assert res.exit_code == 3

    def test_missing_target_is_usage_error(self, runner):
        res = runner.invoke(main, ["query", "position",
                                   "--object", "x", "--t", "0"])
        assert res.exit_code == 2
