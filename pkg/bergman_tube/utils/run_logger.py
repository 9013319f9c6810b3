"""
Optional run event logging to JSONL (when BERGMAN_TUBE_LOG_PATH is set).

Writes run_started, one check event per suite row or subcommand result, and
run_finished. Rotation: when the file exceeds MAX_LOG_BYTES, keep the last
ROTATE_KEEP_LINES lines. Logging never raises.
"""

from __future__ import annotations

import json
import os
import uuid
from pathlib import Path
from typing import Any, Dict, List, Optional

MAX_LOG_BYTES = 5 * 1024 * 1024  # 5MB
ROTATE_KEEP_LINES = 10_000
CAP_FIELD_CHARS = 2000


def log_path() -> Optional[str]:
    """The JSONL destination, or None when BERGMAN_TUBE_LOG_PATH is unset."""
    return os.environ.get("BERGMAN_TUBE_LOG_PATH") or None


def _ensure_dir(path: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)


def _cap(text: str) -> str:
    return text if len(text) <= CAP_FIELD_CHARS else text[: CAP_FIELD_CHARS - 3] + "..."


def _rotate_if_needed(path: str) -> None:
    try:
        if not os.path.isfile(path):
            return
        if os.path.getsize(path) < MAX_LOG_BYTES:
            return
        with open(path, "r") as f:
            lines = f.readlines()
        if len(lines) <= ROTATE_KEEP_LINES:
            return
        keep = lines[-ROTATE_KEEP_LINES:]
        with open(path, "w") as f:
            f.writelines(keep)
    except Exception:
        pass


def _write_line(record: Dict[str, Any]) -> None:
    path = log_path()
    if not path:
        return
    try:
        _ensure_dir(path)
        _rotate_if_needed(path)
        line = json.dumps(record, sort_keys=True, default=str) + "\n"
        with open(path, "a") as f:
            f.write(line)
    except Exception:
        pass


def new_run_id() -> str:
    return uuid.uuid4().hex


def log_run_start(run_id: str, command: str, header: Dict[str, Any]) -> None:
    """Log run_started with the defaults the report header carries."""
    _write_line({"event": "run_started", "run_id": run_id, "command": command, "header": header})


def log_check(
    run_id: str,
    name: str,
    passed: bool,
    measured: Any = None,
    message: Optional[str] = None,
    elapsed_ms: Optional[int] = None,
) -> None:
    record: Dict[str, Any] = {"event": "check", "run_id": run_id, "name": name, "pass": bool(passed)}
    if measured is not None:
        record["measured"] = measured
    if message:
        record["message"] = _cap(message)
    if elapsed_ms is not None:
        record["elapsed_ms"] = elapsed_ms
    _write_line(record)


def log_run_finish(run_id: str, exit_code: int, error: Optional[str] = None) -> None:
    record: Dict[str, Any] = {"event": "run_finished", "run_id": run_id, "exit_code": exit_code}
    if error:
        record["error"] = _cap(error)
    _write_line(record)


def read_run(run_id: str) -> List[Dict[str, Any]]:
    """All records of one run, in file order; unreadable lines are skipped."""
    path = log_path()
    if not path or not os.path.isfile(path):
        return []
    records = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue
            if isinstance(rec, dict) and rec.get("run_id") == run_id:
                records.append(rec)
    return records


def tail_lines(n: int = 100) -> List[str]:
    """The last n raw lines of the run log; empty when there is no log file."""
    path = log_path()
    if not path or not os.path.isfile(path) or n <= 0:
        return []
    with open(path) as f:
        lines = f.readlines()
    return [line.rstrip("\n") for line in lines[-n:]]
