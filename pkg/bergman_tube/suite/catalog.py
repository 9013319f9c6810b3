"""
Check catalogue loader. checks.yaml is the source of truth for which rows the
suite emits, what they are compared with and how.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from jsonschema import Draft7Validator
from pydantic import BaseModel, ConfigDict, Field

from ..errors import CatalogError

_CATALOG_PATH = Path(__file__).parent / "checks.yaml"

MATCHER_TYPES = ("abs_tol", "rel_tol", "upper", "lower", "band", "exact", "boolean")

_CATALOG_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["checks"],
    "properties": {
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["check_id", "kind", "description", "matcher"],
                "additionalProperties": False,
                "properties": {
                    "check_id": {"type": "string", "pattern": "^[a-z0-9][a-z0-9.-]*$"},
                    "kind": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                    "matcher": {
                        "type": "object",
                        "required": ["type"],
                        "additionalProperties": False,
                        "properties": {
                            "type": {"enum": list(MATCHER_TYPES)},
                            "options": {"type": "object"},
                        },
                    },
                    "expected": {},
                    "expected_from": {"enum": ["carleson", "vanishing", "summable"]},
                    "tolerance": {"type": "number", "minimum": 0},
                    "samples": {"type": "integer", "minimum": 1000},
                    "per_measure": {"type": "boolean"},
                    "params": {"type": "object"},
                },
            },
        }
    },
}


class CheckSpec(BaseModel):
    """One catalogue row, before per-measure expansion."""

    model_config = ConfigDict(frozen=True)

    check_id: str
    kind: str
    description: str
    matcher: Dict[str, Any]
    expected: Any = None
    # Per-measure rows may take their expected value from the zoo entry instead.
    expected_from: Optional[str] = None
    tolerance: float = 0.0
    samples: Optional[int] = None
    per_measure: bool = False
    params: Dict[str, Any] = Field(default_factory=dict)


def validate_catalog(data: Any) -> List[CheckSpec]:
    errors = sorted(Draft7Validator(_CATALOG_SCHEMA).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        raise CatalogError(
            "checks.yaml: " + "; ".join(f"{'/'.join(str(p) for p in e.path) or '<root>'}: {e.message}" for e in errors)
        )
    specs: List[CheckSpec] = []
    seen = set()
    for i, raw in enumerate(data["checks"]):
        if raw["check_id"] in seen:
            raise CatalogError(f"checks[{i}]: duplicate check_id '{raw['check_id']}'")
        seen.add(raw["check_id"])
        if "expected" not in raw and "expected_from" not in raw:
            raise CatalogError(f"checks[{i}] ({raw['check_id']}) needs expected or expected_from")
        if raw.get("expected_from") and not raw.get("per_measure"):
            raise CatalogError(f"checks[{i}] ({raw['check_id']}): expected_from only applies to per_measure rows")
        specs.append(CheckSpec(**raw))
    return specs


@lru_cache(maxsize=1)
def load_checks() -> Tuple[CheckSpec, ...]:
    """Load and validate checks.yaml."""
    if not _CATALOG_PATH.exists():
        raise CatalogError(f"checks catalogue not found: {_CATALOG_PATH}")
    with _CATALOG_PATH.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return tuple(validate_catalog(data))
