"""
Weighted Bergman kernel of T_B, kernel-section norms and the Bergman projection.

K_alpha(z, w) = c_alpha / rho(z, w)^{n+1+alpha}, c_alpha = Gamma(n+1+alpha) / (2^{n+1} pi^n Gamma(1+alpha)).
"""

from __future__ import annotations

import logging
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import gammaln

from .errors import DivergentRegimeError, HypothesisError
from .geometry import (
    BergmanBall,
    BoundaryPath,
    TubePoint,
    bergman_distance_xy,
    principal_power,
    require_interior,
    require_same_dimension,
    rho_pair_xy,
    sample_interior_points,
)
from .models import IntegralEstimate, NormEstimate, SamplingPlan, SpaceIndex, WeightParams
from .quadrature.integrate import (
    TubeFunction,
    ball_indicator,
    integrate_tube,
    norm_p_alpha,
    one_kernel_constant,
)

logger = logging.getLogger("bergman-tube")

NormMethod = Literal["closed-form", "quadrature"]


def kernel_constant(n: int, alpha: float) -> float:
    """c_alpha = Gamma(n+1+alpha) / (2^{n+1} pi^n Gamma(1+alpha))."""
    if alpha <= -1:
        raise HypothesisError(f"requires alpha > -1, got {alpha:g}")
    return float(math.exp(gammaln(n + 1.0 + alpha) - gammaln(1.0 + alpha)) / (2.0 ** (n + 1) * math.pi**n))


def kernel_xy(params: WeightParams, zx: np.ndarray, zy: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """K_alpha(z, w) over broadcast (..., n) arrays."""
    pair = rho_pair_xy(zx, zy, wx, wy)
    return kernel_constant(params.n, params.alpha) * principal_power(pair, -params.kernel_exponent)


def bergman_kernel(params: WeightParams, z: TubePoint, w: TubePoint) -> complex:
    require_same_dimension(z, w)
    require_interior(z, w)
    if z.n != params.n:
        raise HypothesisError(f"points have n={z.n} but params.n={params.n}")
    zx, zy = z.arrays()
    wx, wy = w.arrays()
    return complex(kernel_xy(params, zx, zy, wx, wy))


def kernel_section(params: WeightParams, a: TubePoint) -> TubeFunction:
    """w -> K_alpha(w, a), holomorphic in w."""
    require_interior(a)
    ax, ay = a.arrays()

    def _section(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return kernel_xy(params, x, y, ax, ay)

    return _section


def kernel_norm_constant(n: int, alpha: float, p: float) -> float:
    """kernel_norm(z) * rho(z)^{(n+1+alpha)/p'}, independent of z."""
    s = p * (n + 1.0 + alpha)
    if not s - alpha > n + 1:
        raise DivergentRegimeError(
            f"divergent: kernel sections are not p-integrable when p(n+1+alpha) - alpha <= n+1 "
            f"(p={p:g}, alpha={alpha:g}, n={n})"
        )
    return kernel_constant(n, alpha) * one_kernel_constant(n, s, alpha) ** (1.0 / p)


def kernel_norm(
    params: WeightParams,
    p: float,
    z: TubePoint,
    *,
    method: NormMethod = "closed-form",
    plan: Optional[SamplingPlan] = None,
) -> float:
    """||K_{alpha,z}||_{p,alpha}."""
    return kernel_norm_estimate(params, p, z, method=method, plan=plan).value


def kernel_norm_estimate(
    params: WeightParams,
    p: float,
    z: TubePoint,
    *,
    method: NormMethod = "closed-form",
    plan: Optional[SamplingPlan] = None,
) -> NormEstimate:
    if p <= 1:
        raise DivergentRegimeError(f"divergent: kernel-section norms need p > 1, got p={p:g}")
    require_interior(z)
    n, alpha = params.n, params.alpha
    constant = kernel_norm_constant(n, alpha, p)
    if method == "closed-form":
        conj = p / (p - 1.0)
        value = constant / z.rho ** (params.kernel_exponent / conj)
        return NormEstimate(value=value, std_error=0.0, samples=0, flags=("closed-form",))
    if plan is None:
        raise HypothesisError("quadrature kernel norms need a SamplingPlan")
    return norm_p_alpha(SpaceIndex(p=p, alpha=alpha), params, kernel_section(params, z), plan, center=z)


def bergman_project(
    params: WeightParams,
    f: TubeFunction,
    z: TubePoint,
    plan: SamplingPlan,
    *,
    threads: Optional[int] = None,
) -> IntegralEstimate:
    """P_alpha f(z) = integral of K_alpha(z, w) f(w) dV_alpha(w)."""
    require_interior(z)
    zx, zy = z.arrays()

    def _integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return kernel_xy(params, zx, zy, x, y) * np.asarray(f(x, y))

    return integrate_tube(params, _integrand, plan, center=z, threads=threads)


def constant_function(value: complex) -> TubeFunction:
    def _const(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], complex(value))

    return _const


def point_evaluation_bound_check(
    params: WeightParams,
    p: float,
    f: TubeFunction,
    z: TubePoint,
    r: float,
    plan: SamplingPlan,
    *,
    threads: Optional[int] = None,
) -> float:
    """|f(z)|^p rho(z)^{n+1+alpha} / integral over D(z, r) of |f|^p dV_alpha."""
    if not r > 0:
        raise HypothesisError(f"degenerate ball: radius must be positive, got r={r:g}")
    if not p > 0:
        raise HypothesisError(f"requires p > 0, got p={p:g}")
    require_interior(z)
    zx, zy = z.arrays()
    at_center = abs(complex(np.asarray(f(zx[None, :], zy[None, :]))[0])) ** p
    indicator = ball_indicator(BergmanBall(center=z, radius=r))

    def _local(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return indicator(x, y) * np.abs(np.asarray(f(x, y))) ** p

    local = integrate_tube(params, _local, plan, center=z, threads=threads, expect_real=True)
    if local.value_re <= 0:
        raise HypothesisError("no sampled mass inside D(z, r); raise the sample count or the radius")
    return at_center * z.rho**params.kernel_exponent / local.value_re


class ComparabilityReport(BaseModel):
    """Measured c with |rho(z,u)| / |rho(z,v)| in [1/c, c] whenever beta(u, v) < r."""

    model_config = ConfigDict(frozen=True)

    radius: float
    band: float
    pairs: int
    centers: int


def comparability_band(
    z_points: Sequence[TubePoint],
    r: float,
    *,
    pairs: int = 1000,
    seed: int = 0,
) -> ComparabilityReport:
    """Sup of max(q, 1/q), q = |rho(z,u)|/|rho(z,v)|, over random (u, v) with beta(u, v) < r."""
    if not z_points:
        raise HypothesisError("comparability_band needs at least one z")
    n = require_same_dimension(*z_points)
    rng = np.random.default_rng(seed)
    ux, uy = sample_interior_points(rng, pairs, n)
    # Neighbours of u, scaled by rho(u) so beta(u, v) stays of order one.
    hu = uy[:, -1] - np.sum(uy[:, :-1] ** 2, axis=-1)
    vx = ux + rng.uniform(-0.5, 0.5, size=ux.shape) * np.sqrt(hu)[:, None]
    vx[:, -1] = ux[:, -1] + rng.uniform(-0.5, 0.5, size=pairs) * hu
    vyp = uy[:, :-1] + rng.uniform(-0.3, 0.3, size=(pairs, n - 1)) * np.sqrt(hu)[:, None]
    hv = hu * np.exp(rng.uniform(-0.5, 0.5, size=pairs))
    vy = np.concatenate([vyp, (np.sum(vyp * vyp, axis=-1) + hv)[:, None]], axis=-1)
    keep = bergman_distance_xy(ux, uy, vx, vy) < r
    ux, uy, vx, vy = ux[keep], uy[keep], vx[keep], vy[keep]

    band = 1.0
    for z in z_points:
        require_interior(z)
        zx, zy = z.arrays()
        q = np.abs(rho_pair_xy(zx, zy, ux, uy)) / np.abs(rho_pair_xy(zx, zy, vx, vy))
        if q.size:
            band = max(band, float(np.max(q)), float(np.max(1.0 / q)))
    return ComparabilityReport(radius=r, band=band, pairs=int(np.count_nonzero(keep)), centers=len(z_points))


def normalized_kernel_decay(
    params: WeightParams,
    p: float,
    w: TubePoint,
    path: BoundaryPath,
) -> List[Tuple[float, float]]:
    """(k, |K_alpha(z_k, w)| / ||K_{alpha,z_k}||_{p,alpha}) along a boundary path."""
    profile = []
    for k, z in path.points():
        value = abs(bergman_kernel(params, z, w)) / kernel_norm(params, p, z)
        profile.append((k, value))
    return profile
