"""
Report emission shared by every subcommand.

CSV: `# key=value` comment lines carrying every default, then a header row and
data rows. JSON: one object with a `header` member. Floats are written with
repr precision so identical runs give byte-identical reports.
"""

from __future__ import annotations

import csv
import json
import sys
from contextlib import contextmanager
from typing import IO, Any, Dict, Iterator, List, Literal, Mapping, Optional, Sequence

from pydantic import BaseModel

from . import __version__
from .config import Settings, get_settings

ReportFormat = Literal["csv", "json"]


def report_header(settings: Optional[Settings] = None, **extra: Any) -> Dict[str, Any]:
    """Every default that can influence a result, plus command-specific parameters."""
    s = settings or get_settings()
    header: Dict[str, Any] = {
        "version": __version__,
        "seed": s.seed,
        "samples": s.samples,
        "chunk_size": s.chunk_size,
        "n": s.n,
        "alpha": s.alpha,
        "x_bound": s.x_bound,
        "yprime_bound": s.yprime_bound,
        "h_min": s.h_min,
        "h_max": s.h_max,
        "lattice_r": s.lattice_r,
        "probe_density": s.probe_density,
        "vanishing_epsilon": s.vanishing_epsilon,
        "growth_factor": s.growth_factor,
        "verdict_berezin_t": s.verdict_berezin_t,
    }
    header.update(extra)
    return header


def jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        # numpy scalars
        return value.item()
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (BaseModel, Mapping, list, tuple, complex)):
        return json.dumps(jsonable(value), sort_keys=True, separators=(",", ":"))
    return str(value)


def write_header(handle: IO[str], header: Mapping[str, Any]) -> None:
    for key in sorted(header):
        handle.write(f"# {key}={_cell(jsonable(header[key]))}\n")


def write_csv(
    handle: IO[str],
    rows: Sequence[Mapping[str, Any]],
    columns: Sequence[str],
    header: Mapping[str, Any],
) -> None:
    write_header(handle, header)
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])


def write_json(handle: IO[str], payload: Any, header: Mapping[str, Any]) -> None:
    body = jsonable(payload)
    if not isinstance(body, dict):
        body = {"result": body}
    handle.write(json.dumps({"header": jsonable(header), **body}, sort_keys=True, indent=2) + "\n")


@contextmanager
def open_output(path: Optional[str]) -> Iterator[IO[str]]:
    """stdout when path is None or '-'."""
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        yield f


def emit(
    fmt: ReportFormat,
    output: Optional[str],
    header: Mapping[str, Any],
    payload: Any,
    rows: Optional[Sequence[Mapping[str, Any]]] = None,
    columns: Optional[Sequence[str]] = None,
) -> None:
    """
    Write one report. CSV needs rows and columns; when absent the payload's
    top-level scalar fields become a single two-column (field, value) table.
    """
    with open_output(output) as handle:
        if fmt == "json":
            write_json(handle, payload, header)
            return
        if rows is None or columns is None:
            flat = jsonable(payload)
            if not isinstance(flat, dict):
                flat = {"result": flat}
            rows = [{"field": k, "value": v} for k, v in sorted(flat.items())]
            columns = ["field", "value"]
        write_csv(handle, rows, columns, header)


def profile_rows(profiles: Mapping[str, Sequence[Sequence[float]]]) -> List[Dict[str, Any]]:
    """Flatten {path kind: [(k, value), ...]} into CSV rows."""
    return [{"path": kind, "k": float(k), "value": float(v)} for kind, prof in profiles.items() for k, v in prof]
