from __future__ import annotations

import json
from pathlib import Path

import pytest

from bergman_tube import cli
from bergman_tube.config import DEFAULT_SEED
from bergman_tube.lattice import read_lattice_csv


def _json_out(capsys: pytest.CaptureFixture[str]) -> dict:
    return json.loads(capsys.readouterr().out)


def test_opnorm_rejects_sequence_regime(capsys: pytest.CaptureFixture[str]) -> None:
    """p1 > p2 belongs to the sequence criterion: usage error."""
    code = cli.main(["opnorm", "--p1", "2", "--p2", "1", "--xi", "2"])
    assert code == 2
    assert "p1 <= p2" in capsys.readouterr().err


def test_verify_identity_divergent_regime(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["verify-identity", "--r", "2", "--s", "2", "--t", "-1.5"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_samples_floor(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["verify-identity", "--r", "2", "--s", "2", "--t", "0", "--samples", "10"])
    assert code == 2
    assert "--samples must be at least 1000" in capsys.readouterr().err


def test_bad_tube_point_is_argparse_error() -> None:
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify-identity", "--r", "2", "--s", "2", "--t", "0", "--z", "{not json"])
    assert exc.value.code == 2


def test_khinchine_json(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["khinchine", "--coeffs", "[1, -2, [0.5, 0.5]]", "--p", "2", "--format", "json"])
    assert code == 0
    out = _json_out(capsys)
    assert out["ratio"] == pytest.approx(1.0)
    assert out["exact"] is True
    assert out["header"]["seed"] == DEFAULT_SEED
    assert out["header"]["command"] == "khinchine"


def test_khinchine_csv(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["khinchine", "--coeffs", "1,1", "--p", "4", "--seed", "5"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert "# seed=5" in lines
    assert "field,value" in lines
    assert "ratio,2.0" in lines


def test_opnorm_atom(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["opnorm", "--p1", "2", "--p2", "2", "--xi", "2", "--probe-density", "300", "--format", "json"]
    code = cli.main(argv)
    assert code == 0
    out = _json_out(capsys)
    assert out["lower"] == pytest.approx(1.6875, abs=0.01)
    assert out["probe_count"] == 17
    assert out["lattice_size"] > 0
    assert out["carleson_surrogate"] > 0
    assert out["ratio"] == pytest.approx(out["lower"] / out["carleson_surrogate"])
    assert out["family_constant"] > 0
    assert out["header"]["measure"] == "atom"
    assert out["header"]["probe_density"] == 300


def test_carleson_zoo_atom(capsys: pytest.CaptureFixture[str]) -> None:
    code = cli.main(["carleson", "--zoo", "atom", "--format", "json"])
    assert code == 0
    out = _json_out(capsys)
    assert out["carleson"]["verdict"] == "Carleson-consistent"
    assert out["vanishing"]["verdict"] == "vanishing-consistent"
    assert out["header"]["lambda"] == 1.0


def test_carleson_measure_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    path = tmp_path / "two.json"
    path.write_text(json.dumps({"type": "discrete", "atoms": [{"x": [0.0], "y": [1.0], "w": 2.0}]}))
    code = cli.main(["carleson", "--measure", str(path), "--format", "json"])
    assert code == 0
    out = _json_out(capsys)
    # the axis point at rho = 10^{-3/4} still sees the atom: 2 / rho^2
    assert out["carleson"]["sup_ratio"] == pytest.approx(2.0 * 10**1.5)
    assert out["header"]["measure"] == "two.json"


def test_missing_measure_file(tmp_path: Path) -> None:
    assert cli.main(["carleson", "--measure", str(tmp_path / "absent.json")]) == 2


def test_lattice_csv_reads_back(tmp_path: Path) -> None:
    path = tmp_path / "lattice.csv"
    code = cli.main(["lattice", "--probe-density", "300", "--output", str(path)])
    assert code == 0
    with path.open() as f:
        lat = read_lattice_csv(f)
    assert len(lat) > 0
    assert lat.r == 0.5
    assert lat.region is not None
    assert lat.region.h_max == 10.0
    assert lat.separation_ok


def test_lattice_rejects_inverted_region() -> None:
    assert cli.main(["lattice", "--h-min", "5", "--h-max", "1", "--probe-density", "10"]) == 2


def test_logs_tail_without_file(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    monkeypatch.setenv("BERGMAN_TUBE_LOG_PATH", str(tmp_path / "none.jsonl"))
    assert cli.main(["logs", "tail"]) == 0
    assert "Log file not found" in capsys.readouterr().out


def test_run_log_records_and_show(
    monkeypatch: pytest.MonkeyPatch, tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    log = tmp_path / "runs.jsonl"
    monkeypatch.setenv("BERGMAN_TUBE_LOG_PATH", str(log))
    assert cli.main(["khinchine", "--coeffs", "1,2", "--p", "2"]) == 0
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert [r["event"] for r in records] == ["run_started", "check", "run_finished"]
    assert records[1]["name"] == "khinchine"
    assert records[2]["exit_code"] == 0
    run_id = records[0]["run_id"]
    capsys.readouterr()
    assert cli.main(["logs", "show", run_id]) == 0
    shown = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert shown == records
    assert cli.main(["logs", "show", "no-such-run"]) == 0
    assert capsys.readouterr().out == ""
    assert cli.main(["logs", "tail", "--n", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["event"] == "run_finished"


def test_verify_identity_stdout_is_reproducible(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["verify-identity", "--r", "2", "--s", "2", "--t", "0", "--samples", "2000"]
    first_code = cli.main(argv)
    first = capsys.readouterr().out
    second_code = cli.main(argv)
    second = capsys.readouterr().out
    assert first_code == second_code
    assert first_code in (0, 1)
    assert first.encode() == second.encode()
    assert first
