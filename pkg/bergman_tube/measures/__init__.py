"""Positive measures on T_B and the Carleson-type quantities measured on them."""

from .carleson import (
    ball_mass,
    berezin_bounded_check,
    berezin_transform,
    carleson_constant,
    carleson_ratio,
    carleson_test,
    carleson_verdict,
    domination_check,
    integrate_measure,
    mplus_moment,
    vanishing_test,
)
from .models import Atom, DensityMeasure, DiscreteMeasure, Measure
from .registry import load_measure, measure_from_dict, weighted_volume
from .zoo import measure_zoo

__all__ = [
    "Atom",
    "DensityMeasure",
    "DiscreteMeasure",
    "Measure",
    "ball_mass",
    "berezin_bounded_check",
    "berezin_transform",
    "carleson_constant",
    "carleson_ratio",
    "carleson_test",
    "carleson_verdict",
    "domination_check",
    "integrate_measure",
    "load_measure",
    "measure_from_dict",
    "measure_zoo",
    "mplus_moment",
    "vanishing_test",
    "weighted_volume",
]
