"""
Rademacher functions and an empirical check of Khinchine's inequality.

r_0(t) = +1 on [0, 1/2), -1 on [1/2, 1), extended with period 1;
r_k(t) = r_0(2^k t).
"""

from __future__ import annotations

import math
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import HypothesisError


class KhinchineReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float
    lhs: float  # (sum |c_j|^2)^{p/2}
    mid: float  # integral over [0, 1) of |sum c_j r_j(t)|^p
    ratio: float
    rhs_ratio_band: Tuple[float, float]
    in_band: bool
    exact: bool
    samples: int


def rademacher_values(k: int, t: np.ndarray) -> np.ndarray:
    if k < 0:
        raise ValueError(f"Rademacher index must be >= 0, got {k}")
    frac = np.mod(np.ldexp(np.asarray(t, dtype=float), k), 1.0)
    return np.where(frac < 0.5, 1, -1)


def rademacher(k: int, t: float) -> int:
    return int(rademacher_values(k, np.asarray(t))[()])


def khinchine_band(p: float) -> Tuple[float, float]:
    """Two-sided constants for E|sum c_j r_j|^p / (sum |c_j|^2)^{p/2}."""
    if p <= 2:
        return 3.0 ** ((p - 2.0) / 2.0), 1.0
    if p <= 4:
        return 1.0, 3.0 ** ((p - 2.0) / 2.0)
    return 1.0, (p - 1.0) ** (p / 2.0)


def _dyadic_signs(m: int) -> np.ndarray:
    """r_1..r_m at the 2^{m+1} dyadic midpoints; shape (2^{m+1}, m)."""
    idx = np.arange(2 ** (m + 1), dtype=np.int64)
    shifts = m - np.arange(1, m + 1)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return np.where(bits == 0, 1.0, -1.0)


def khinchine_check(c: Sequence[complex], p: float, samples: int, seed: int) -> KhinchineReport:
    """
    Average |sum_j c_j r_j(t)|^p over t and compare with (sum |c_j|^2)^{p/2}.

    The average is exact over dyadic midpoints whenever 2^{m+1} <= samples
    (each r_j is constant on dyadic intervals of length 2^{-(m+1)}).
    """
    coeffs = np.asarray(c, dtype=complex)
    if coeffs.size == 0:
        raise HypothesisError("khinchine_check needs at least one coefficient")
    if not p > 0:
        raise HypothesisError(f"requires p > 0, got p={p:g}")
    m = coeffs.size
    exact = m < 62 and 2 ** (m + 1) <= samples
    if exact:
        signs = _dyadic_signs(m)
        used = signs.shape[0]
    else:
        rng = np.random.Generator(np.random.Philox(key=seed))
        t = rng.random(samples)
        signs = np.stack([rademacher_values(k, t) for k in range(1, m + 1)], axis=-1).astype(float)
        used = samples
    sums = signs @ coeffs
    mid = float(np.mean(np.abs(sums) ** p))
    lhs = float(np.sum(np.abs(coeffs) ** 2)) ** (p / 2.0)
    ratio = mid / lhs if lhs > 0 else math.nan
    band = khinchine_band(p)
    slack = 1e-12
    in_band = band[0] * (1 - slack) <= ratio <= band[1] * (1 + slack)
    return KhinchineReport(
        p=p,
        lhs=lhs,
        mid=mid,
        ratio=ratio,
        rhs_ratio_band=band,
        in_band=bool(in_band),
        exact=exact,
        samples=used,
    )
