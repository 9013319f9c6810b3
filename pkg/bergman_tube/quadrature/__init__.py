"""Seeded integration over T_B against dV_alpha."""

from .integrate import (
    TubeFunction,
    ball_volume,
    c1_constant,
    integrate_tube,
    norm_p_alpha,
    one_kernel_constant,
    one_kernel_integral,
    pointwise,
    verify_identity,
    volume_law,
)

__all__ = [
    "TubeFunction",
    "ball_volume",
    "c1_constant",
    "integrate_tube",
    "norm_p_alpha",
    "one_kernel_constant",
    "one_kernel_integral",
    "pointwise",
    "verify_identity",
    "volume_law",
]
