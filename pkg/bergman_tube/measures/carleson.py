"""
Ball masses, Carleson ratios, Berezin-type transforms and the Carleson
constant of positive measures, with verdicts read off boundary-path profiles.

Discrete measures are handled by exact finite sums. Covariant densities
(rho^beta dV) use closed forms: V_beta(D(a, r)) = rho(a)^{n+1+beta} V_beta(D(i, r))
and the one-kernel integral. Other densities go through quadrature.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..config import get_settings
from ..errors import DivergentRegimeError, HypothesisError
from ..geometry import (
    PATH_KINDS,
    BergmanBall,
    BoundaryPath,
    TubePoint,
    axis_point,
    require_interior,
    rho_pair_xy,
    within_distance_xy,
)
from ..kernel import kernel_constant
from ..models import CarlesonParams, IntegralEstimate, SamplingPlan, WeightParams
from ..quadrature.integrate import (
    TubeFunction,
    ball_indicator,
    ball_volume,
    integrate_tube,
    one_kernel_integral,
)
from .models import (
    BerezinReport,
    CarlesonReport,
    CarlesonVerdict,
    DensityMeasure,
    DiscreteMeasure,
    DominationReport,
    Profile,
    VanishingReport,
    Verdict,
)
from .registry import resolve_density

logger = logging.getLogger("bergman-tube")

AnyMeasure = Union[DiscreteMeasure, DensityMeasure]


def _check_dimension(mu: AnyMeasure, z: TubePoint) -> None:
    if isinstance(mu, DiscreteMeasure) and not mu.atoms:
        return
    if mu.n != z.n:
        raise HypothesisError(f"point has n={z.n} but the measure lives on n={mu.n}")


def integrate_measure(
    mu: AnyMeasure,
    g: TubeFunction,
    plan: SamplingPlan,
    center: Optional[TubePoint] = None,
    *,
    threads: Optional[int] = None,
) -> IntegralEstimate:
    """Integral of g against mu: exact sum for atoms, quadrature for densities."""
    if isinstance(mu, DiscreteMeasure):
        if not mu.atoms:
            return IntegralEstimate.exact(0.0, seed=plan.seed)
        x, y, w = mu.arrays()
        values = np.asarray(g(x, y))
        return IntegralEstimate.exact(complex(np.sum(w * values)), terms=len(w), seed=plan.seed)
    profile = resolve_density(mu)
    integrand = g
    if profile.support is not None:
        indicator = ball_indicator(profile.support)

        def integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
            return indicator(x, y) * np.asarray(g(x, y))

        center = profile.support.center
    params = WeightParams(n=mu.n, alpha=profile.exponent)
    return integrate_tube(params, integrand, plan, center=center, threads=threads).scaled(profile.scale)


@lru_cache(maxsize=256)
def unit_ball_mass(n: int, exponent: float, radius: float, plan: SamplingPlan) -> float:
    """V_exponent(D((0', i), radius)) by quadrature; every other ball follows by covariance."""
    return ball_volume(WeightParams(n=n, alpha=exponent), BergmanBall(center=axis_point(1.0, n), radius=radius), plan).value_re


def ball_mass(mu: AnyMeasure, ball: BergmanBall, plan: SamplingPlan) -> float:
    """mu(D(a, r))."""
    a = ball.center
    _check_dimension(mu, a)
    if isinstance(mu, DiscreteMeasure):
        if not mu.atoms:
            return 0.0
        x, y, w = mu.arrays()
        ax, ay = a.arrays()
        inside = within_distance_xy(x, y, ax, ay, ball.radius)
        return float(np.sum(w[inside]))
    profile = resolve_density(mu)
    if profile.covariant:
        unit = unit_ball_mass(mu.n, profile.exponent, ball.radius, plan)
        return profile.scale * a.rho ** (mu.n + 1.0 + profile.exponent) * unit
    ball_ind = ball_indicator(ball)
    support_ind = ball_indicator(profile.support)

    def _both(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return ball_ind(x, y) * support_ind(x, y)

    est = integrate_tube(WeightParams(n=mu.n, alpha=profile.exponent), _both, plan, center=a, expect_real=True)
    return max(est.value_re, 0.0) * profile.scale


def kernel_moment(mu: AnyMeasure, z: TubePoint, exponent: float, plan: SamplingPlan) -> float:
    """Integral of |rho(z, w)|^{-exponent} dmu(w)."""
    require_interior(z)
    _check_dimension(mu, z)
    zx, zy = z.arrays()
    if isinstance(mu, DiscreteMeasure):
        if not mu.atoms:
            return 0.0
        x, y, w = mu.arrays()
        return float(np.sum(w * np.abs(rho_pair_xy(zx, zy, x, y)) ** (-exponent)))
    profile = resolve_density(mu)
    if profile.covariant:
        if not exponent - profile.exponent > mu.n + 1:
            raise DivergentRegimeError(
                f"divergent: the kernel moment of rho^{profile.exponent:g} dV needs exponent - {profile.exponent:g} > n+1, "
                f"got exponent={exponent:g}"
            )
        return profile.scale * one_kernel_integral(mu.n, exponent, profile.exponent, z)

    def _modulus(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(rho_pair_xy(zx, zy, x, y)) ** (-exponent)

    est = integrate_measure(mu, _modulus, plan)
    return max(est.value_re, 0.0)


def carleson_ratio(mu: AnyMeasure, cp: CarlesonParams, a: TubePoint, r: float, plan: SamplingPlan) -> float:
    """mu(D(a, r)) / rho(a)^{(n+1+gamma) lambda}."""
    require_interior(a)
    mass = ball_mass(mu, BergmanBall(center=a, radius=r), plan)
    return mass / a.rho ** cp.ball_exponent(a.n)


def berezin_transform(
    mu: AnyMeasure, alpha: float, s: float, t: float, z: TubePoint, plan: SamplingPlan
) -> float:
    """B_{s,t}(mu)(z) = rho(z)^t * integral of |rho(z, w)|^{-((n+1+alpha)s + t)} dmu(w)."""
    if not (s > 0 and t > 0):
        raise HypothesisError(f"requires s > 0 and t > 0, got s={s:g}, t={t:g}")
    require_interior(z)
    exponent = (z.n + 1.0 + alpha) * s + t
    return z.rho**t * kernel_moment(mu, z, exponent, plan)


def carleson_family_value(mu: AnyMeasure, lam: float, alpha: float, a: TubePoint, plan: SamplingPlan) -> float:
    """
    Integral of |g_a|^q dmu for the unit-norm test function g_a of A^p_alpha, q/p = lam.

    |g_a(w)|^p = c_alpha rho(a)^{n+1+alpha} / |rho(w, a)|^{2(n+1+alpha)}, which makes
    the value c_alpha^lam * B_{lam, (n+1+alpha) lam}(mu)(a).
    """
    big = (a.n + 1.0 + alpha) * lam
    return kernel_constant(a.n, alpha) ** lam * berezin_transform(mu, alpha, lam, big, a, plan)


def carleson_constant(
    mu: AnyMeasure,
    p: float,
    q: float,
    alpha: float,
    family: Sequence[TubePoint],
    plan: SamplingPlan,
) -> float:
    """Lower estimate of ||mu||_{q/p, alpha}: sup over the test family of the integral of |g_a|^q dmu."""
    if not family:
        raise HypothesisError("carleson_constant needs a non-empty test family")
    if not (p > 0 and q > 0):
        raise HypothesisError(f"requires p > 0 and q > 0, got p={p:g}, q={q:g}")
    lam = q / p
    return max(carleson_family_value(mu, lam, alpha, a, plan) for a in family)


def mplus_moment(mu: AnyMeasure, t: Optional[float], plan: SamplingPlan) -> IntegralEstimate:
    """
    Spot check of the M_+ moment: integral of |rho(w, i)|^{-t} dmu(w).

    Densities are checked at their declared exponent; divergence is flagged and
    logged, not raised.
    """
    if t is None:
        if not isinstance(mu, DensityMeasure):
            raise HypothesisError("discrete measures need an explicit moment exponent")
        t = mu.mplus_t
    n = mu.n
    i = axis_point(1.0, n)
    try:
        value = kernel_moment(mu, i, t, plan)
    except DivergentRegimeError as e:
        logger.warning("M_+ moment diverges: %s", e)
        return IntegralEstimate(value_re=math.inf, std_error=0.0, samples=0, seed=plan.seed, flags=("divergent",))
    return IntegralEstimate.exact(value, seed=plan.seed)


# --- profiles and verdicts --------------------------------------------------


def default_paths(n: int = 1, parameters: Optional[Sequence[float]] = None) -> List[BoundaryPath]:
    params = tuple(parameters if parameters is not None else get_settings().path_parameters)
    return [BoundaryPath(kind=kind, n=n, parameters=params) for kind in PATH_KINDS]


def profile_unbounded(values: Sequence[float], growth_factor: float) -> bool:
    """Last three values strictly increase and the last exceeds growth_factor x the first nonzero value."""
    vals = [float(v) for v in values]
    if len(vals) < 3:
        return False
    a, b, c = vals[-3:]
    if not (a < b < c):
        return False
    first = next((v for v in vals if v != 0.0), 0.0)
    if first == 0.0:
        return False
    return c > growth_factor * abs(first)


def profile_vanishing(values: Sequence[float], epsilon: float) -> bool:
    """Last three values non-increasing and all <= epsilon x the profile max."""
    vals = [float(v) for v in values]
    if not vals:
        return True
    top = max(vals)
    if top <= 0.0:
        return True
    tail = vals[-3:]
    monotone = all(x >= y for x, y in zip(tail, tail[1:]))
    return monotone and all(v <= epsilon * top for v in tail)


def ratio_profile(mu: AnyMeasure, cp: CarlesonParams, r: float, path: BoundaryPath, plan: SamplingPlan) -> Profile:
    return [(k, carleson_ratio(mu, cp, a, r, plan)) for k, a in path.points()]


def berezin_profile(
    mu: AnyMeasure, alpha: float, lam: float, t: float, path: BoundaryPath, plan: SamplingPlan
) -> Profile:
    return [(k, berezin_transform(mu, alpha, lam, t, z, plan)) for k, z in path.points()]


def family_profile(mu: AnyMeasure, lam: float, alpha: float, path: BoundaryPath, plan: SamplingPlan) -> Profile:
    return [(k, carleson_family_value(mu, lam, alpha, a, plan)) for k, a in path.points()]


def _verdict(profiles: Dict[str, Profile], growth_factor: float) -> Verdict:
    if any(profile_unbounded([v for _, v in prof], growth_factor) for prof in profiles.values()):
        return "unbounded"
    return "bounded"


def carleson_test(
    mu: AnyMeasure,
    cp: CarlesonParams,
    r: float,
    probes: Sequence[TubePoint],
    plan: SamplingPlan,
    *,
    paths: Optional[Sequence[BoundaryPath]] = None,
    growth_factor: Optional[float] = None,
) -> CarlesonReport:
    """Sup of carleson_ratio over probe centers and path points; path growth decides the verdict."""
    centers = list(probes)
    paths = list(paths or [])
    if not centers and not paths:
        raise HypothesisError("carleson_test needs a non-empty probe set")
    gf = growth_factor if growth_factor is not None else get_settings().growth_factor

    best, best_center, count = -1.0, None, 0
    for a in centers:
        value = carleson_ratio(mu, cp, a, r, plan)
        count += 1
        if value > best:
            best, best_center = value, a
    profiles: Dict[str, Profile] = {}
    for path in paths:
        prof = []
        for k, a in path.points():
            value = carleson_ratio(mu, cp, a, r, plan)
            prof.append((k, value))
            count += 1
            if value > best:
                best, best_center = value, a
        profiles[path.kind] = prof
    verdict = "not-Carleson" if _verdict(profiles, gf) == "unbounded" else "Carleson-consistent"
    return CarlesonReport(
        sup_ratio=max(best, 0.0),
        argmax_center=best_center,
        probe_count=count,
        vanishing_profile=profiles or None,
        verdict=verdict,
    )


def berezin_bounded_check(
    mu: AnyMeasure,
    alpha: float,
    lam: float,
    t: float,
    grid: Sequence[TubePoint],
    plan: SamplingPlan,
    *,
    paths: Optional[Sequence[BoundaryPath]] = None,
    growth_factor: Optional[float] = None,
    epsilon: Optional[float] = None,
) -> BerezinReport:
    """Sup of B_{lam,t}(mu) over a grid, and its trend along boundary paths."""
    if lam < 1:
        raise HypothesisError(f"requires lambda >= 1, got {lam:g}")
    settings = get_settings()
    gf = growth_factor if growth_factor is not None else settings.growth_factor
    eps = epsilon if epsilon is not None else settings.vanishing_epsilon

    best, best_z = 0.0, None
    for z in grid:
        value = berezin_transform(mu, alpha, lam, t, z, plan)
        if best_z is None or value > best:
            best, best_z = value, z
    trend: Dict[str, Profile] = {}
    for path in paths or []:
        prof = berezin_profile(mu, alpha, lam, t, path, plan)
        trend[path.kind] = prof
        for (k, value), (_, z) in zip(prof, path.points()):
            if best_z is None or value > best:
                best, best_z = value, z
    vanishing = bool(trend) and all(profile_vanishing([v for _, v in prof], eps) for prof in trend.values())
    return BerezinReport(sup=best, argmax_center=best_z, trend=trend, verdict=_verdict(trend, gf), vanishing=vanishing)


def vanishing_test(
    mu: AnyMeasure,
    cp: CarlesonParams,
    r: float,
    paths: Sequence[BoundaryPath],
    plan: SamplingPlan,
    *,
    epsilon: Optional[float] = None,
) -> VanishingReport:
    """Carleson-ratio profiles per path; vanishing iff every tail decays below epsilon x max."""
    eps = epsilon if epsilon is not None else get_settings().vanishing_epsilon
    profiles: Dict[str, Profile] = {}
    per_path: Dict[str, bool] = {}
    for path in paths:
        prof = ratio_profile(mu, cp, r, path, plan)
        profiles[path.kind] = prof
        per_path[path.kind] = profile_vanishing([v for _, v in prof], eps)
    verdict = "vanishing-consistent" if per_path and all(per_path.values()) else "not-vanishing"
    return VanishingReport(profiles=profiles, per_path=per_path, verdict=verdict)


def carleson_verdict(
    mu: AnyMeasure,
    cp: CarlesonParams,
    plan: SamplingPlan,
    *,
    r: float = 1.0,
    paths: Optional[Sequence[BoundaryPath]] = None,
    berezin_t: Optional[float] = None,
) -> CarlesonVerdict:
    """The ball-ratio, Berezin and test-family indicators, plus both decay indicators."""
    settings = get_settings()
    paths = list(paths) if paths is not None else default_paths(mu.n)
    t = berezin_t if berezin_t is not None else settings.verdict_berezin_t
    gf, eps = settings.growth_factor, settings.vanishing_epsilon

    ratios = {path.kind: ratio_profile(mu, cp, r, path, plan) for path in paths}
    berezin = {path.kind: berezin_profile(mu, cp.gamma, cp.lam, t, path, plan) for path in paths}
    family = {path.kind: family_profile(mu, cp.lam, cp.gamma, path, plan) for path in paths}
    verdict = CarlesonVerdict(
        ratio_verdict=_verdict(ratios, gf),
        berezin_verdict=_verdict(berezin, gf),
        constant_verdict=_verdict(family, gf),
        vanishing_ratio=all(profile_vanishing([v for _, v in p], eps) for p in ratios.values()),
        vanishing_berezin=all(profile_vanishing([v for _, v in p], eps) for p in berezin.values()),
    )
    logger.info("carleson verdict %s", verdict.model_dump())
    return verdict


def domination_check(
    mu: AnyMeasure,
    cp: CarlesonParams,
    p: float,
    centers: Sequence[TubePoint],
    plan: SamplingPlan,
    *,
    b: Optional[float] = None,
) -> DominationReport:
    """
    Ratios of the integral of |f|^p dmu to the integral of |f|^p rho^{L-(n+1)} dV,
    L = (n+1+gamma) lambda, for kernel-type f = rho(., a)^{-b}.
    """
    if not centers:
        raise HypothesisError("domination_check needs at least one test function center")
    n = centers[0].n
    big = cp.ball_exponent(n)
    weight = big - (n + 1.0)
    if not weight > -1:
        raise HypothesisError(f"requires (n+1+gamma) lambda > n for an integrable comparison weight, got {big:g}")
    bb = b if b is not None else 2.0 * big / p
    if not bb * p > big:
        raise HypothesisError(f"requires b p > (n+1+gamma) lambda, got b={bb:g}, p={p:g}")
    ratios = []
    for a in centers:
        lhs = kernel_moment(mu, a, bb * p, plan)
        rhs = one_kernel_integral(n, bb * p, weight, a)
        ratios.append(lhs / rhs)
    return DominationReport(ratios=tuple(ratios), constant=max(ratios))


def lattice_measure(points: Sequence[TubePoint], cp: CarlesonParams) -> DiscreteMeasure:
    """sum_k rho(a_k)^{(n+1+gamma) lambda} delta_{a_k}: a Carleson measure supported on a separated set."""
    if not points:
        return DiscreteMeasure.zero()
    weights = [a.rho ** cp.ball_exponent(a.n) for a in points]
    return DiscreteMeasure.from_points(list(points), weights)

