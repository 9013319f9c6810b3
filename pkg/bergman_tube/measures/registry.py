"""
Density registry and measure files.

densities.yaml is the source of truth for which densities exist and what
parameters they take; the mathematics of each id lives in `resolve_density`.
Measure JSON is schema-checked (Draft 7) before model construction and all
diagnostics are reported together.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from jsonschema import Draft7Validator, SchemaError
from pydantic import TypeAdapter, ValidationError

from ..errors import CatalogError, MeasureLoadError
from ..geometry import BergmanBall, TubePoint
from .models import DensityMeasure, DiscreteMeasure, Measure

logger = logging.getLogger("bergman-tube")

_REGISTRY_PATH = Path(__file__).parent / "densities.yaml"

_REGISTRY_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["densities"],
    "properties": {
        "densities": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "description", "covariant", "params_schema"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                    "covariant": {"type": "boolean"},
                    "params_schema": {"type": "object"},
                },
            },
        }
    },
}

MEASURE_SCHEMA: Dict[str, Any] = {
    "oneOf": [
        {
            "type": "object",
            "required": ["type", "atoms"],
            "properties": {
                "type": {"const": "discrete"},
                "n": {"type": "integer", "minimum": 1},
                "atoms": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["x", "y", "w"],
                        "additionalProperties": False,
                        "properties": {
                            "x": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                            "y": {"type": "array", "minItems": 1, "items": {"type": "number"}},
                            "w": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
            },
            "additionalProperties": False,
        },
        {
            "type": "object",
            "required": ["type", "name"],
            "properties": {
                "type": {"const": "density"},
                "name": {"type": "string"},
                "params": {"type": "object"},
                "mplus_t": {"type": "number", "exclusiveMinimum": 0},
                "n": {"type": "integer", "minimum": 1},
                "scale": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    ]
}

_MEASURE_ADAPTER: TypeAdapter = TypeAdapter(Measure)


@dataclass(frozen=True)
class DensityEntry:
    id: str
    description: str
    covariant: bool
    params_schema: Dict[str, Any]


@dataclass(frozen=True)
class DensityProfile:
    """Resolved density: scale * rho^exponent dV, restricted to `support` when given."""

    exponent: float
    covariant: bool
    support: Optional[BergmanBall] = None
    scale: float = 1.0


@lru_cache(maxsize=1)
def load_density_registry() -> Dict[str, DensityEntry]:
    if not _REGISTRY_PATH.exists():
        raise CatalogError(f"density registry not found: {_REGISTRY_PATH}")
    with _REGISTRY_PATH.open("r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    errors = sorted(Draft7Validator(_REGISTRY_SCHEMA).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        raise CatalogError("densities.yaml: " + "; ".join(e.message for e in errors))
    entries: Dict[str, DensityEntry] = {}
    for i, raw in enumerate(data["densities"]):
        try:
            Draft7Validator.check_schema(raw["params_schema"])
        except SchemaError as e:
            raise CatalogError(f"densities[{i}].params_schema is not a valid schema: {e.message}") from e
        if raw["id"] in entries:
            raise CatalogError(f"densities[{i}]: duplicate id '{raw['id']}'")
        entries[raw["id"]] = DensityEntry(
            id=raw["id"],
            description=raw["description"],
            covariant=bool(raw["covariant"]),
            params_schema=raw["params_schema"],
        )
    return entries


def resolve_density(mu: DensityMeasure) -> DensityProfile:
    """Validate a density's params against its registry entry and resolve it."""
    registry = load_density_registry()
    entry = registry.get(mu.name)
    if entry is None:
        raise MeasureLoadError(f"unknown density '{mu.name}'; registered: {sorted(registry)}")
    errors = list(Draft7Validator(entry.params_schema).iter_errors(mu.params))
    if errors:
        raise MeasureLoadError(f"density '{mu.name}' params: " + "; ".join(e.message for e in errors))

    exponent = float(mu.params["exponent"])
    if mu.name == "weighted-volume":
        return DensityProfile(exponent=exponent, covariant=True, scale=mu.scale)
    if mu.name == "ball-restricted-volume":
        center = TubePoint(x=tuple(mu.params["center"]["x"]), y=tuple(mu.params["center"]["y"]))
        if center.n != mu.n:
            raise MeasureLoadError(f"density center has n={center.n}, measure has n={mu.n}")
        if not center.is_interior:
            raise MeasureLoadError("density center must be an interior point of T_B")
        support = BergmanBall(center=center, radius=float(mu.params["radius"]))
        return DensityProfile(exponent=exponent, covariant=False, support=support, scale=mu.scale)
    raise MeasureLoadError(f"density '{mu.name}' is registered but has no builder")


def weighted_volume(exponent: float, n: int = 1, *, mplus_t: Optional[float] = None, scale: float = 1.0) -> DensityMeasure:
    """V_exponent as a registered density; the declared moment exponent defaults to one that converges."""
    t = mplus_t if mplus_t is not None else exponent + n + 2.0
    return DensityMeasure(name="weighted-volume", params={"exponent": exponent}, mplus_t=t, n=n, scale=scale)


def measure_from_dict(data: Any) -> Union[DiscreteMeasure, DensityMeasure]:
    errors: List[str] = []
    for e in Draft7Validator(MEASURE_SCHEMA).iter_errors(data):
        errors.append(e.message)
        for sub in e.context or []:
            errors.append(f"{'/'.join(str(p) for p in sub.absolute_path) or '<root>'}: {sub.message}")
    if errors:
        raise MeasureLoadError("invalid measure: " + "; ".join(errors))
    try:
        mu = _MEASURE_ADAPTER.validate_python(data)
    except ValidationError as e:
        raise MeasureLoadError(f"invalid measure: {e}") from e
    if isinstance(mu, DensityMeasure):
        resolve_density(mu)
    return mu


def load_measure(path: Union[str, Path]) -> Union[DiscreteMeasure, DensityMeasure]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise MeasureLoadError(f"cannot read measure file {p}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MeasureLoadError(f"{p}: not valid JSON (line {e.lineno}, column {e.colno}): {e.msg}") from e
    mu = measure_from_dict(data)
    logger.info("loaded %s measure from %s", mu.type, p)
    return mu


def measure_to_dict(mu: Union[DiscreteMeasure, DensityMeasure]) -> Dict[str, Any]:
    if isinstance(mu, DiscreteMeasure):
        return {
            "type": "discrete",
            "n": mu.n,
            "atoms": [{"x": list(a.x), "y": list(a.y), "w": a.w} for a in mu.atoms],
        }
    out: Dict[str, Any] = {"type": "density", "name": mu.name, "params": dict(mu.params), "mplus_t": mu.mplus_t, "n": mu.n}
    if mu.scale != 1.0:
        out["scale"] = mu.scale
    return out
