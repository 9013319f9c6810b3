"""
Integration over T_B against dV_alpha and the two-kernel integral identity.

The chart z = (x, y', |y'|^2 + h), h > 0, has unit Jacobian and rho(z) = h, so
dV_alpha = h^alpha dx dy' dh. Stochastic estimates are importance-sampled
(see sampling.py); for n = 1 an adaptive deterministic rule is available
through strategy="adaptive".
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate as sp_integrate
from scipy.special import gammaln

from ..config import get_settings
from ..errors import DivergentRegimeError, HypothesisError, IntegrandError
from ..geometry import (
    BergmanBall,
    TubePoint,
    axis_point,
    principal_power,
    require_interior,
    require_same_dimension,
    rho_pair_xy,
    within_distance_xy,
)
from ..models import IdentityReport, IntegralEstimate, NormEstimate, SamplingPlan, SpaceIndex, WeightParams
from .sampling import Proposal, chunk_bounds, chunk_generator

logger = logging.getLogger("bergman-tube")

# Vectorized integrand: x, y of shape (N, n) -> values of shape (N,).
TubeFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

IMAGINARY_RESIDUAL = 1e-10


def pointwise(fn: Callable[[TubePoint], complex]) -> TubeFunction:
    """Adapt a TubePoint -> complex function to the vectorized integrand interface."""

    def _vectorized(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.array([fn(TubePoint.from_arrays(xi, yi)) for xi, yi in zip(x, y)])

    return _vectorized


def zero_function(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.zeros(x.shape[0])


def _chunk_moments(
    params: WeightParams,
    f: TubeFunction,
    plan: SamplingPlan,
    proposal: Proposal,
    chunk_index: int,
) -> Tuple[complex, float]:
    n_chunks, size = chunk_bounds(plan)
    start = chunk_index * size
    count = min(size, plan.samples - start)
    draw = proposal.draw(chunk_generator(plan, chunk_index), start, count, plan.samples)
    if not np.all(np.isfinite(draw.inv_density)):
        raise IntegrandError("proposal density vanished at a sampled point")
    values = np.broadcast_to(np.asarray(f(draw.x, draw.y)), (count,))
    if not np.all(np.isfinite(values[draw.valid])):
        bad = int(np.count_nonzero(~np.isfinite(values[draw.valid])))
        raise IntegrandError(f"integrand returned {bad} non-finite value(s) at sampled points")
    weights = np.where(draw.valid, draw.h**params.alpha * draw.inv_density, 0.0)
    contrib = np.where(draw.valid, values * weights, 0.0)
    total = np.sum(contrib)
    squares = np.sum(np.real(contrib) ** 2 + np.imag(contrib) ** 2)
    return complex(total), float(squares)


def _run_chunks(
    params: WeightParams,
    f: TubeFunction,
    plan: SamplingPlan,
    center: Optional[TubePoint],
    threads: Optional[int],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-chunk (sum, sum of squares, count); order fixed by chunk index."""
    proposal = Proposal.for_center(params.n, plan, center)
    n_chunks, size = chunk_bounds(plan)
    workers = threads if threads is not None else get_settings().threads
    indices = range(n_chunks)
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            moments = list(pool.map(lambda c: _chunk_moments(params, f, plan, proposal, c), indices))
    else:
        moments = [_chunk_moments(params, f, plan, proposal, c) for c in indices]
    sums = np.array([m[0] for m in moments], dtype=complex)
    squares = np.array([m[1] for m in moments], dtype=float)
    counts = np.array([min(size, plan.samples - c * size) for c in indices], dtype=float)
    return sums, squares, counts


def _estimate_from(sums: np.ndarray, squares: np.ndarray, count: float) -> Tuple[complex, float]:
    # numpy reduces float arrays pairwise, in index order.
    total = complex(np.sum(sums))
    sq = float(np.sum(squares))
    mean = total / count
    if count < 2:
        return mean, 0.0
    centered = sq - (total.real * total.real + total.imag * total.imag) / count
    variance = max(centered, 0.0) / (count - 1.0)
    return mean, math.sqrt(variance / count)


def integrate_tube(
    params: WeightParams,
    f: TubeFunction,
    plan: SamplingPlan,
    center: Optional[TubePoint] = None,
    *,
    threads: Optional[int] = None,
    expect_real: bool = False,
) -> IntegralEstimate:
    """
    Estimate the integral of f over T_B against dV_alpha.

    center is the integrand's reference point (default (0', i)); the
    proposal is centered and scaled there.
    """
    if center is not None:
        require_interior(center)
        if center.n != params.n:
            require_same_dimension(center, axis_point(1.0, params.n))
    if plan.strategy == "adaptive":
        return _integrate_adaptive(params, f, plan, center, expect_real=expect_real)

    sums, squares, counts = _run_chunks(params, f, plan, center, threads)
    mean, std_error = _estimate_from(sums, squares, float(plan.samples))
    flags: List[str] = []
    if plan.samples < 2:
        flags.append("single-sample")
    if expect_real and abs(mean.imag) > IMAGINARY_RESIDUAL * abs(mean):
        flags.append("imaginary-residual")
        logger.warning("imaginary residual %.3e on a real integrand (|value|=%.3e)", abs(mean.imag), abs(mean))
    return IntegralEstimate(
        value_re=mean.real,
        value_im=mean.imag,
        std_error=std_error,
        samples=plan.samples,
        seed=plan.seed,
        flags=tuple(flags),
    )


def _integrate_adaptive(
    params: WeightParams,
    f: TubeFunction,
    plan: SamplingPlan,
    center: Optional[TubePoint],
    *,
    expect_real: bool,
) -> IntegralEstimate:
    """Nested adaptive quadrature for n = 1 after x = x0 + h0 u, h = h0 v."""
    if params.n != 1:
        raise HypothesisError("the adaptive rule covers n = 1 only; use a sampling strategy for n > 1")
    ref = center if center is not None else axis_point(1.0, 1)
    x0 = ref.x[0]
    h0 = ref.rho
    alpha = params.alpha

    def _value(u: float, v: float) -> complex:
        h = h0 * v
        out = complex(np.asarray(f(np.array([[x0 + h0 * u]]), np.array([[h]])))[0])
        if not np.isfinite(out):
            raise IntegrandError(f"integrand non-finite at x={x0 + h0 * u!r}, h={h!r}")
        return out * h**alpha * h0 * h0

    re, re_err = sp_integrate.dblquad(
        lambda u, v: _value(u, v).real, 0.0, np.inf, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-10
    )
    im, im_err = (0.0, 0.0)
    if not expect_real:
        im, im_err = sp_integrate.dblquad(
            lambda u, v: _value(u, v).imag, 0.0, np.inf, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-10
        )
    return IntegralEstimate(
        value_re=float(re),
        value_im=float(im),
        std_error=float(math.hypot(re_err, im_err)),
        samples=0,
        seed=plan.seed,
        flags=("deterministic",),
    )


# --- the two-kernel identity -----------------------------------------------


def check_identity_regime(n: int, r: float, s: float, t: float) -> None:
    if not (r > 0 and s > 0):
        raise HypothesisError(f"requires r > 0 and s > 0, got r={r:g}, s={s:g}")
    if not t > -1:
        raise DivergentRegimeError(f"divergent: requires t > -1, got t={t:g}; the integral is infinite otherwise")
    if not r + s - t > n + 1:
        raise DivergentRegimeError(
            f"divergent: requires r + s - t > n + 1, got {r + s - t:g} <= {n + 1}; the integral is infinite otherwise"
        )


def c1_constant(n: int, r: float, s: float, t: float) -> float:
    """2^{n+1} pi^n Gamma(1+t) Gamma(r+s-t-n-1) / (Gamma(r) Gamma(s))."""
    check_identity_regime(n, r, s, t)
    log_gamma = gammaln(1.0 + t) + gammaln(r + s - t - n - 1.0) - gammaln(r) - gammaln(s)
    return float(2.0 ** (n + 1) * math.pi**n * math.exp(log_gamma))


def one_kernel_constant(n: int, s: float, t: float) -> float:
    """
    Constant of the integral of rho(w)^t / |rho(z, w)|^s.

    |rho(z,w)|^s = rho(z,w)^{s/2} rho(w,z)^{s/2} on the principal branch, so the
    two-kernel constant applies with r = s/2 for every real s.
    """
    return c1_constant(n, s / 2.0, s / 2.0, t)


def one_kernel_integral(n: int, s: float, t: float, z: TubePoint) -> float:
    """Integral of rho(w)^t |rho(z,w)|^{-s} dV(w) = C / rho(z)^{s-t-n-1}."""
    require_interior(z)
    return one_kernel_constant(n, s, t) / z.rho ** (s - t - n - 1.0)


def predicted_identity(n: int, r: float, s: float, t: float, z: TubePoint, u: TubePoint) -> complex:
    zx, zy = z.arrays()
    ux, uy = u.arrays()
    pair = rho_pair_xy(zx, zy, ux, uy)
    return complex(c1_constant(n, r, s, t) * principal_power(pair, -(r + s - t - n - 1.0)))


def identity_integrand(r: float, s: float, z: TubePoint, u: TubePoint) -> TubeFunction:
    """w -> rho(z, w)^{-r} rho(w, u)^{-s}; the rho(w)^t factor is the dV_t weight."""
    zx, zy = z.arrays()
    ux, uy = u.arrays()

    def _f(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return principal_power(rho_pair_xy(zx, zy, x, y), -r) * principal_power(rho_pair_xy(x, y, ux, uy), -s)

    return _f


def verify_identity(
    n: int,
    r: float,
    s: float,
    t: float,
    z: TubePoint,
    u: TubePoint,
    plan: SamplingPlan,
    *,
    threads: Optional[int] = None,
) -> IdentityReport:
    """Measure the two-kernel integral by quadrature and compare with its closed form."""
    check_identity_regime(n, r, s, t)
    require_interior(z, u)
    if z.n != n or u.n != n:
        require_same_dimension(z, u, axis_point(1.0, n))
    predicted = predicted_identity(n, r, s, t, z, u)
    est = integrate_tube(WeightParams(n=n, alpha=t), identity_integrand(r, s, z, u), plan, center=z, threads=threads)
    diff = abs(est.value - predicted)
    if est.std_error > 0:
        sigma = diff / est.std_error
    else:
        sigma = 0.0 if diff == 0 else math.inf
    logger.info("identity n=%d r=%g s=%g t=%g: measured=%s predicted=%s sigma=%.3f", n, r, s, t, est.value, predicted, sigma)
    return IdentityReport(
        n=n,
        r=r,
        s=s,
        t=t,
        value_re=est.value_re,
        value_im=est.value_im,
        std_error=est.std_error,
        samples=est.samples,
        seed=est.seed,
        predicted_re=predicted.real,
        predicted_im=predicted.imag,
        sigma_distance=sigma,
    )


# --- norms and volumes -----------------------------------------------------


def norm_p_alpha(
    space: SpaceIndex,
    params: WeightParams,
    f: TubeFunction,
    plan: SamplingPlan,
    center: Optional[TubePoint] = None,
    *,
    threads: Optional[int] = None,
) -> NormEstimate:
    """(integral of |f|^p dV_alpha)^{1/p} with a divergence heuristic over sample doublings."""
    if space.alpha != params.alpha:
        raise HypothesisError(f"weight mismatch: space alpha={space.alpha:g}, params alpha={params.alpha:g}")
    p = space.p

    def _abs_p(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(f(x, y))) ** p

    if plan.strategy == "adaptive":
        est = integrate_tube(params, _abs_p, plan, center, expect_real=True)
        integral, se, flags = est.value_re, est.std_error, ["deterministic"]
    else:
        if center is not None:
            require_interior(center)
        sums, squares, counts = _run_chunks(params, _abs_p, plan, center, threads)
        mean, se = _estimate_from(sums, squares, float(plan.samples))
        integral = mean.real
        flags = []
        if _looks_divergent(sums, squares, counts, integral, se):
            flags.append("likely-non-integrable")
            logger.warning("norm estimate keeps growing across sample doublings (p=%g, alpha=%g)", p, params.alpha)

    integral = max(integral, 0.0)
    value = integral ** (1.0 / p)
    std_error = se * value / (p * integral) if integral > 0 else 0.0
    return NormEstimate(value=value, std_error=std_error, samples=plan.samples, seed=plan.seed, flags=tuple(flags))


def _looks_divergent(
    sums: np.ndarray, squares: np.ndarray, counts: np.ndarray, integral: float, se: float
) -> bool:
    """Running estimates at 1/4, 1/2 and all chunks rise by > 10% each step, or the error dominates."""
    if integral <= 0:
        return False
    if se > 0.5 * integral:
        return True
    k = len(sums)
    if k < 4:
        return False
    running = []
    for stop in (k // 4, k // 2, k):
        mean, _ = _estimate_from(sums[:stop], squares[:stop], float(np.sum(counts[:stop])))
        running.append(mean.real)
    return running[0] > 0 and running[1] > 1.1 * running[0] and running[2] > 1.1 * running[1]


def ball_indicator(ball: BergmanBall) -> TubeFunction:
    cx, cy = ball.center.arrays()

    def _f(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return within_distance_xy(x, y, cx, cy, ball.radius).astype(float)

    return _f


def ball_volume(
    params: WeightParams,
    ball: BergmanBall,
    plan: SamplingPlan,
    *,
    threads: Optional[int] = None,
) -> IntegralEstimate:
    """V_alpha(D(z, r)) by quadrature centered at z."""
    return integrate_tube(params, ball_indicator(ball), plan, center=ball.center, threads=threads, expect_real=True)


def volume_law(
    params: WeightParams,
    radius: float,
    heights: Sequence[float],
    plan: SamplingPlan,
    *,
    threads: Optional[int] = None,
) -> List[float]:
    """V_alpha(D(z, r)) / rho(z)^{n+1+alpha} for axis points with the given rho values."""
    ratios = []
    for h in heights:
        z = axis_point(h, params.n)
        vol = ball_volume(params, BergmanBall(center=z, radius=radius), plan, threads=threads)
        ratios.append(vol.value_re / h**params.kernel_exponent)
    return ratios


def relative_spread(values: Sequence[float]) -> float:
    """(max - min) / mean of positive values."""
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    if mean == 0:
        return 0.0
    return float((np.max(arr) - np.min(arr)) / abs(mean))
