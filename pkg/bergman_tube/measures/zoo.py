"""Built-in measures with known Carleson and vanishing behaviour."""

from __future__ import annotations

from typing import List, Union

from pydantic import BaseModel, ConfigDict

from ..errors import HypothesisError
from ..geometry import TubePoint
from ..models import CarlesonParams
from .models import Atom, DensityMeasure, DiscreteMeasure
from .registry import weighted_volume

# (x_n offset, rho, weight) around (0', i).
CLOUD_LAYOUT = (
    (0.0, 1.0, 1.0),
    (0.1, 1.1, 0.5),
    (-0.1, 0.9, 0.5),
    (0.05, 1.2, 0.25),
    (-0.05, 0.85, 0.25),
)

# Density exponent offset below the matched exponent.
MISMATCH_OFFSET = 0.5


class ZooEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    measure: Union[DiscreteMeasure, DensityMeasure]
    carleson: bool
    vanishing: bool
    # Finite l^{1/(1-lambda)} ball-mass sequence over a lattice (lambda < 1 regime).
    summable: bool


def _point(n: int, xn: float, h: float) -> TubePoint:
    x = [0.0] * n
    y = [0.0] * n
    x[-1] = xn
    y[-1] = h
    return TubePoint(x=tuple(x), y=tuple(y))


def atom(n: int = 1) -> DiscreteMeasure:
    """delta at (0', i)."""
    return DiscreteMeasure.from_points([_point(n, 0.0, 1.0)], [1.0])


def atom_cloud(n: int = 1) -> DiscreteMeasure:
    atoms = tuple(Atom(x=_point(n, xn, h).x, y=_point(n, xn, h).y, w=w) for xn, h, w in CLOUD_LAYOUT)
    return DiscreteMeasure(atoms=atoms, n=n)


def measure_zoo(cp: CarlesonParams, n: int = 1) -> List[ZooEntry]:
    """Atom, atom cloud, matched density and mismatched density for the given (lambda, gamma)."""
    return zoo_for_exponent(cp.ball_exponent(n), n)


def zoo_for_exponent(ball_exponent: float, n: int = 1) -> List[ZooEntry]:
    """
    The zoo for a ball exponent L = (n+1+gamma) lambda; the densities are
    V_beta with n+1+beta = L (matched) and MISMATCH_OFFSET below it.
    """
    matched = ball_exponent - (n + 1.0)
    mismatched = matched - MISMATCH_OFFSET
    if not mismatched > -1:
        raise HypothesisError(
            f"the density zoo needs (n+1+gamma) lambda > n + {MISMATCH_OFFSET}, got {ball_exponent:g}"
        )
    return [
        ZooEntry(name="atom", measure=atom(n), carleson=True, vanishing=True, summable=True),
        ZooEntry(name="atom-cloud", measure=atom_cloud(n), carleson=True, vanishing=True, summable=True),
        ZooEntry(name="matched-density", measure=weighted_volume(matched, n), carleson=True, vanishing=False, summable=False),
        ZooEntry(name="mismatched-density", measure=weighted_volume(mismatched, n), carleson=False, vanishing=False, summable=False),
    ]
