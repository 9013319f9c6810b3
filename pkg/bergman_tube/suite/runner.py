"""
Suite runner: expand the catalogue into rows, run each check and score it.

A row that raises a BergmanTubeError is recorded as an error (pass = false)
and the run continues; anything else is a bug and propagates.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..config import Settings, get_settings
from ..errors import BergmanTubeError, CatalogError
from ..measures.carleson import AnyMeasure
from ..utils.run_logger import log_check
from .catalog import CheckSpec, load_checks
from .checks import CHECKS, MeasureCase, SuiteContext, measure_cases
from .matchers import score_case

logger = logging.getLogger("bergman-tube")

SUITE_COLUMNS = ("name", "measured", "expected", "tolerance", "pass", "message")


@dataclass(frozen=True)
class SuiteResult:
    rows: Tuple[Dict[str, Any], ...]
    summary: Dict[str, Any]

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(row["pass"] for row in self.rows)

    @property
    def failing(self) -> List[str]:
        return [row["name"] for row in self.rows if not row["pass"]]


def _expected_for(spec: CheckSpec, case: Optional[MeasureCase]) -> Tuple[bool, Any]:
    """(applicable, expected); zoo-derived expectations do not apply to user measures."""
    if spec.expected_from is None:
        return True, spec.expected
    entry = case[2] if case is not None else None
    if entry is None:
        return False, None
    return True, getattr(entry, spec.expected_from)


def _expected_cell(spec: CheckSpec, expected: Any) -> Any:
    if spec.matcher["type"] == "band":
        options = spec.matcher.get("options") or {}
        return [options.get("low"), options.get("high")]
    return expected


def expand_rows(ctx: SuiteContext, specs: Sequence[CheckSpec]) -> List[Tuple[str, CheckSpec, Optional[MeasureCase]]]:
    rows: List[Tuple[str, CheckSpec, Optional[MeasureCase]]] = []
    for spec in specs:
        if spec.kind not in CHECKS:
            raise CatalogError(f"check '{spec.check_id}' has unknown kind '{spec.kind}'")
        if not spec.per_measure:
            rows.append((spec.check_id, spec, None))
            continue
        for case in measure_cases(ctx, spec.params):
            if _expected_for(spec, case)[0]:
                rows.append((f"{spec.check_id}[{case[0]}]", spec, case))
    return rows


def run_row(ctx: SuiteContext, name: str, spec: CheckSpec, case: Optional[MeasureCase], run_id: Optional[str] = None) -> Dict[str, Any]:
    _, expected = _expected_for(spec, case)
    tolerance = ctx.tolerance(spec.tolerance)
    plan = ctx.plan(spec.samples)
    started = time.monotonic()
    try:
        measured = CHECKS[spec.kind](ctx, spec.params, plan, case)
        result = score_case(expected, measured, spec.matcher, tolerance)
    except BergmanTubeError as e:
        logger.warning("check %s errored: %s", name, e)
        measured = None
        result = {"status": "error", "score": 0.0, "message": str(e)[:500]}
    elapsed_ms = int((time.monotonic() - started) * 1000)
    row = {
        "name": name,
        "measured": measured,
        "expected": _expected_cell(spec, expected),
        "tolerance": tolerance,
        "pass": result["status"] == "passed",
        "message": result.get("message") or "",
    }
    if run_id is not None:
        log_check(run_id, name, row["pass"], measured=measured, message=row["message"], elapsed_ms=elapsed_ms)
    logger.info("check %s: %s in %d ms", name, result["status"], elapsed_ms)
    return row


def run_suite(
    *,
    quick: bool = False,
    extra_measures: Sequence[Tuple[str, AnyMeasure]] = (),
    settings: Optional[Settings] = None,
    only: Optional[Sequence[str]] = None,
    run_id: Optional[str] = None,
) -> SuiteResult:
    """
    Run every catalogue row (or the rows whose check_id is in `only`).

    Returns the rows in catalogue order and a summary with passed, failed,
    errored and pass_rate.
    """
    s = settings or get_settings()
    ctx = SuiteContext(settings=s, quick=quick, extra_measures=tuple(extra_measures), threads=s.threads)
    specs = [spec for spec in load_checks() if only is None or spec.check_id in only]
    rows: List[Dict[str, Any]] = []
    passed = failed = errored = 0
    for name, spec, case in expand_rows(ctx, specs):
        row = run_row(ctx, name, spec, case, run_id)
        rows.append(row)
        if row["pass"]:
            passed += 1
        elif row["measured"] is None:
            errored += 1
        else:
            failed += 1
    total = len(rows)
    summary = {
        "total_rows": total,
        "passed": passed,
        "failed": failed,
        "errored": errored,
        "pass_rate": passed / total if total > 0 else 0.0,
        "quick": quick,
    }
    return SuiteResult(rows=tuple(rows), summary=summary)
