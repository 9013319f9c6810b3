"""
Suite matchers: deterministic comparison of a measured value with its expected value.

Matcher types: abs_tol, rel_tol, upper, lower, band, exact, boolean.
`tolerance` is the row's (possibly quick-mode scaled) tolerance.
"""

from __future__ import annotations

import math
from typing import Any, Dict


def score_case(
    expected: Any,
    measured: Any,
    matcher: Dict[str, Any],
    tolerance: float = 0.0,
) -> Dict[str, Any]:
    """
    Score a single suite row. Returns {status, score, message}.

    status: "passed" | "failed" | "error"
    score: 1.0 for pass, 0.0 otherwise
    """
    matcher_type = (matcher.get("type") or "").strip().lower()
    options = matcher.get("options") or {}

    if matcher_type in ("exact", "boolean"):
        return _match_exact(expected if matcher_type == "exact" else bool(expected), measured)
    if matcher_type == "band":
        return _match_band(measured, options)

    if matcher_type not in ("abs_tol", "rel_tol", "upper", "lower"):
        return _result("error", f"Unknown matcher type: {matcher.get('type')}")
    value = _as_float(measured)
    target = _as_float(expected)
    if value is None or target is None:
        return _result("error", f"{matcher_type} needs numeric expected and measured values")
    if math.isnan(value):
        return _result("failed", "measured value is NaN")

    if matcher_type == "abs_tol":
        ok = abs(value - target) <= tolerance
        return _result("passed" if ok else "failed", f"|{value!r} - {target!r}| vs {tolerance!r}")
    if matcher_type == "rel_tol":
        ok = abs(value - target) <= tolerance * abs(target)
        return _result("passed" if ok else "failed", f"relative error vs {tolerance!r}")
    if matcher_type == "upper":
        ok = value - target <= tolerance
        return _result("passed" if ok else "failed", f"{value!r} <= {target!r} + {tolerance!r}")
    ok = target - value <= tolerance
    return _result("passed" if ok else "failed", f"{value!r} >= {target!r} - {tolerance!r}")


def _result(status: str, message: str) -> Dict[str, Any]:
    return {"status": status, "score": 1.0 if status == "passed" else 0.0, "message": message}


def _as_float(value: Any) -> Any:
    if isinstance(value, bool) or value is None:
        return None
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _match_exact(expected: Any, measured: Any) -> Dict[str, Any]:
    if type(expected) is bool or type(measured) is bool:
        ok = isinstance(measured, bool) and isinstance(expected, bool) and measured == expected
    else:
        ok = expected == measured
    if ok:
        return _result("passed", "Exact match")
    return _result("failed", f"expected {expected!r}, measured {measured!r}")


def _match_band(measured: Any, options: Dict[str, Any]) -> Dict[str, Any]:
    low, high = options.get("low"), options.get("high")
    if low is None or high is None:
        return _result("error", "band requires matcher.options.low and matcher.options.high")
    value = _as_float(measured)
    if value is None:
        return _result("error", "band needs a numeric measured value")
    if float(low) <= value <= float(high):
        return _result("passed", f"{value!r} in [{low!r}, {high!r}]")
    return _result("failed", f"{value!r} outside [{low!r}, {high!r}]")
