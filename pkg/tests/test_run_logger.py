from __future__ import annotations

from pathlib import Path

import pytest

from bergman_tube.utils import run_logger


def test_no_log_path_writes_nothing(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    run_id = run_logger.new_run_id()
    run_logger.log_run_start(run_id, "suite", {"seed": 1})
    run_logger.log_run_finish(run_id, 0)
    assert list(tmp_path.iterdir()) == []
    assert run_logger.read_run(run_id) == []


def test_run_events_roundtrip(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("BERGMAN_TUBE_LOG_PATH", str(tmp_path / "logs" / "runs.jsonl"))
    run_id = run_logger.new_run_id()
    other = run_logger.new_run_id()
    run_logger.log_run_start(run_id, "suite", {"seed": 1})
    run_logger.log_check(run_id, "kernel-diagonal", True, measured=0.0796, elapsed_ms=3)
    run_logger.log_check(other, "unrelated", False)
    run_logger.log_run_finish(run_id, 1, error="x" * 5000)
    records = run_logger.read_run(run_id)
    assert [r["event"] for r in records] == ["run_started", "check", "run_finished"]
    assert records[0]["header"] == {"seed": 1}
    assert records[1]["measured"] == 0.0796
    assert records[1]["pass"] is True
    assert len(records[2]["error"]) == run_logger.CAP_FIELD_CHARS
    assert records[2]["error"].endswith("...")


def test_rotation_keeps_tail(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    log = tmp_path / "runs.jsonl"
    monkeypatch.setenv("BERGMAN_TUBE_LOG_PATH", str(log))
    monkeypatch.setattr(run_logger, "MAX_LOG_BYTES", 100)
    monkeypatch.setattr(run_logger, "ROTATE_KEEP_LINES", 2)
    log.write_text("".join(f'{{"run_id": "old", "i": {i}}}\n' for i in range(10)))
    run_id = run_logger.new_run_id()
    run_logger.log_run_finish(run_id, 0)
    lines = log.read_text().splitlines()
    assert len(lines) == 3
    assert run_logger.read_run(run_id)[0]["exit_code"] == 0


def test_tail_lines(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    log = tmp_path / "runs.jsonl"
    monkeypatch.setenv("BERGMAN_TUBE_LOG_PATH", str(log))
    assert run_logger.tail_lines(5) == []
    log.write_text("".join(f'{{"run_id": "r", "i": {i}}}\n' for i in range(6)))
    assert run_logger.tail_lines(2) == ['{"run_id": "r", "i": 4}', '{"run_id": "r", "i": 5}']
    assert len(run_logger.tail_lines(100)) == 6
    assert run_logger.tail_lines(0) == []
