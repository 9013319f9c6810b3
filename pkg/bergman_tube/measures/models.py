"""
Positive measures on T_B and the reports measured about them.

A measure is either a finite sum of weighted atoms or a registered density
(see densities.yaml) scaled by a positive constant. The empty discrete
measure is the zero measure.
"""

from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..geometry import TubePoint

Profile = List[Tuple[float, float]]
Verdict = Literal["bounded", "unbounded"]


class Atom(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    y: Tuple[float, ...]
    w: float = Field(gt=0.0)

    @property
    def point(self) -> TubePoint:
        return TubePoint(x=self.x, y=self.y)


class DiscreteMeasure(BaseModel):
    """sum_k w_k delta_{a_k} with w_k > 0 and interior a_k."""

    model_config = ConfigDict(frozen=True)

    type: Literal["discrete"] = "discrete"
    atoms: Tuple[Atom, ...] = ()
    n: int = Field(default=1, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _infer_dimension(cls, data: Any) -> Any:
        if isinstance(data, dict) and "n" not in data and data.get("atoms"):
            first = data["atoms"][0]
            x = first.x if isinstance(first, Atom) else first.get("x", ())
            data = {**data, "n": len(x)}
        return data

    @model_validator(mode="after")
    def _check_atoms(self) -> "DiscreteMeasure":
        for i, atom in enumerate(self.atoms):
            if len(atom.x) != self.n or len(atom.y) != self.n:
                raise ValueError(f"atoms[{i}] has dimension {len(atom.x)}, measure has n={self.n}")
            if not atom.point.is_interior:
                raise ValueError(f"atoms[{i}] is not an interior point of T_B")
        return self

    @classmethod
    def from_points(cls, points: List[TubePoint], weights: List[float]) -> "DiscreteMeasure":
        atoms = tuple(Atom(x=p.x, y=p.y, w=float(w)) for p, w in zip(points, weights))
        n = points[0].n if points else 1
        return cls(atoms=atoms, n=n)

    @classmethod
    def zero(cls, n: int = 1) -> "DiscreteMeasure":
        return cls(atoms=(), n=n)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(x, y, w) with x, y of shape (K, n)."""
        k = len(self.atoms)
        x = np.array([a.x for a in self.atoms], dtype=float).reshape(k, self.n)
        y = np.array([a.y for a in self.atoms], dtype=float).reshape(k, self.n)
        w = np.array([a.w for a in self.atoms], dtype=float)
        return x, y, w

    def scaled(self, factor: float) -> "DiscreteMeasure":
        if factor < 0:
            raise ValueError("measures scale by nonnegative factors only")
        if factor == 0:
            return DiscreteMeasure.zero(self.n)
        return self.model_copy(update={"atoms": tuple(a.model_copy(update={"w": a.w * factor}) for a in self.atoms)})

    def combined(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        if other.n != self.n and other.atoms and self.atoms:
            raise ValueError(f"cannot add measures on different dimensions ({self.n} and {other.n})")
        return DiscreteMeasure(atoms=self.atoms + other.atoms, n=self.n if self.atoms else other.n)

    def total_mass(self) -> float:
        return float(sum(a.w for a in self.atoms))


class DensityMeasure(BaseModel):
    """scale * (registered density) dV; mplus_t is the declared finite-moment exponent."""

    model_config = ConfigDict(frozen=True)

    type: Literal["density"] = "density"
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)
    mplus_t: float = Field(default=1.0, gt=0.0)
    n: int = Field(default=1, ge=1)
    scale: float = Field(default=1.0, gt=0.0)

    def scaled(self, factor: float) -> Union["DensityMeasure", DiscreteMeasure]:
        if factor < 0:
            raise ValueError("measures scale by nonnegative factors only")
        if factor == 0:
            return DiscreteMeasure.zero(self.n)
        return self.model_copy(update={"scale": self.scale * factor})


Measure = Annotated[Union[DiscreteMeasure, DensityMeasure], Field(discriminator="type")]


class CarlesonReport(BaseModel):
    """Sup of ball-mass ratios over a probe design, with path profiles when requested."""

    model_config = ConfigDict(frozen=True)

    sup_ratio: float
    argmax_center: TubePoint
    probe_count: int
    vanishing_profile: Optional[Dict[str, Profile]] = None
    verdict: Literal["Carleson-consistent", "not-Carleson"] = "Carleson-consistent"


class BerezinReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    sup: float
    argmax_center: Optional[TubePoint] = None
    trend: Dict[str, Profile] = Field(default_factory=dict)
    verdict: Verdict = "bounded"
    vanishing: bool = False


class VanishingReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    profiles: Dict[str, Profile]
    per_path: Dict[str, bool]
    verdict: Literal["vanishing-consistent", "not-vanishing"]


class CarlesonVerdict(BaseModel):
    """The three boundedness indicators and the two decay indicators for one measure."""

    model_config = ConfigDict(frozen=True)

    ratio_verdict: Verdict
    berezin_verdict: Verdict
    constant_verdict: Verdict
    vanishing_ratio: bool
    vanishing_berezin: bool

    @property
    def carleson(self) -> bool:
        return self.ratio_verdict == "bounded"

    @property
    def indicators_agree(self) -> bool:
        return self.ratio_verdict == self.berezin_verdict == self.constant_verdict

    @property
    def vanishing_agree(self) -> bool:
        return self.vanishing_ratio == self.vanishing_berezin


class DominationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    ratios: Tuple[float, ...]
    constant: float
