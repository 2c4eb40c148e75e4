import csv
import json

import pytest

from itespec.cli import RunConfig, UsageError, build_parser, config_from_args, parse_grid, run
from itespec.counting import SpectrumSet


def run_ok(argv):
    assert run(argv) == 0


@pytest.fixture(scope="module")
def eigs(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "eigs.json"
    run_ok(["solve", "--index", "const:4", "--tmax", "10", "--out", str(path), "--threads", "1"])
    return path


def test_config_roundtrip_is_byte_identical():
    argv = ["trace-check", "--eigs", "e.json", "--mu", "0,1", "--p", "2",
            "--radii", "100,400,1600", "--out", "t.json"]
    cfg = config_from_args(build_parser().parse_args(argv))
    text = cfg.to_json()
    again = RunConfig.from_json(text)
    assert again == cfg
    assert again.to_json() == text


def test_config_rejects_unknown_keys_and_commands():
    with pytest.raises(UsageError):
        RunConfig.from_json('{"command": "solve", "bogus": 1}')
    with pytest.raises(UsageError):
        RunConfig("frobnicate")


def test_parse_grid():
    g = parse_grid("0:50:0.25")
    assert len(g) == 201 and g[0] == 0 and g[-1] == 50
    with pytest.raises(UsageError):
        parse_grid("0:1")
    with pytest.raises(UsageError):
        parse_grid("1:0:0.1")


def test_weyl_prints_alpha(capsys):
    run_ok(["weyl", "--index", "const:4", "--dim", "2"])
    out = capsys.readouterr().out
    value, err = out.split("±")
    assert float(value) == pytest.approx(1.25, rel=1e-13)
    assert float(err) < 1e-10


def test_degenerate_index_exit_code(tmp_path, capsys):
    assert run(["solve", "--index", "const:1", "--tmax", "5", "--out", str(tmp_path / "x")]) == 2
    assert "hypothesis violated" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_usage_errors_exit_one(capsys):
    assert run(["frobnicate"]) == 1
    assert run(["solve", "--index", "const:4"]) == 1
    assert run(["count", "--eigs", "missing.json", "--grid", "0:1:0.1", "--out", "x.csv"]) == 1
    err = capsys.readouterr()
    assert err.out == ""


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "solve" in capsys.readouterr().out


def test_solve_roundtrip_and_determinism(eigs, tmp_path):
    spec = SpectrumSet.load(eigs)
    assert spec.completeness_certificate and len(spec) > 0
    other = tmp_path / "again.json"
    run_ok(["solve", "--index", "const:4", "--tmax", "10", "--out", str(other), "--threads", "1"])
    assert other.read_bytes() == eigs.read_bytes()


def test_count(eigs, tmp_path):
    out = tmp_path / "counts.csv"
    run_ok(["count", "--eigs", str(eigs), "--grid", "0:10:0.5", "--alpha-ref", "auto",
            "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["t", "N", "alpha_ratio"]
    n = [int(r["N"]) for r in rows]
    assert n[0] == 0 and n == sorted(n)
    assert n[-1] == int(SpectrumSet.load(eigs).weights.sum())
    run_ok(["count", "--eigs", str(eigs), "--grid", "0:10:0.5", "--alpha-ref", "1.25",
            "--out", str(tmp_path / "c2.csv")])
    assert (tmp_path / "c2.csv").read_bytes() == out.read_bytes()
    assert run(["count", "--eigs", str(eigs), "--grid", "0:10:0.5", "--alpha-ref", "x",
                "--out", str(out)]) == 1


def test_count_on_empty_spectrum(tmp_path):
    eigs = tmp_path / "empty.json"
    run_ok(["solve", "--index", "const:4", "--tmax", "1", "--out", str(eigs)])
    assert json.loads(eigs.read_text())["records"] == []
    out = tmp_path / "counts.csv"
    run_ok(["count", "--eigs", str(eigs), "--grid", "0:1:0.25", "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 5 and all(r["N"] == "0" for r in rows)


def test_trace_check(eigs, tmp_path):
    out = tmp_path / "trace.json"
    run_ok(["trace-check", "--eigs", str(eigs), "--mu", "0,1", "--p", "2",
            "--radii", "10,20,40", "--out", str(out)])
    rep = json.loads(out.read_text())
    assert [r["r"] for r in rep["radii"]] == [10.0, 20.0, 40.0]
    assert out.with_suffix(".csv").exists()
    assert run(["trace-check", "--eigs", str(eigs), "--mu", "1,0", "--radii", "10",
                "--out", str(out)]) == 2
    assert run(["trace-check", "--eigs", str(eigs), "--mu", "1", "--out", str(out)]) == 1


def test_fd_verify(tmp_path):
    out = tmp_path / "fd.csv"
    run_ok(["fd-verify", "--index", "const:4", "--modes", "0", "--grid", "200", "--count", "2",
            "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 and "refine_ratio" in rows[0]


def test_report_merges_artifacts(eigs, tmp_path, capsys):
    folder = tmp_path / "out"
    folder.mkdir()
    (folder / "eigs.json").write_bytes(eigs.read_bytes())
    run_ok(["report", "--dir", str(folder)])
    summary = json.loads((folder / "summary.json").read_text())
    status = {c["id"]: c["status"] for c in summary["criteria"]}
    assert sorted(status) == list(range(1, 10))
    # a t_max=10 spectrum cannot serve the t=50 criteria
    assert status[1] == status[2] == status[3] == status[7] == "missing"
    assert status[4] == status[8] == status[9] == "pass"
    assert summary["all_passed"] is False
    assert "criterion 4 [PASS]" in capsys.readouterr().out
    assert run(["report", "--dir", str(tmp_path / "nope")]) == 1
