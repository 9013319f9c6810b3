"""
Toeplitz operators T_mu^xi and Berezin-type operators B_mu^xi, their norm
estimates between weighted Bergman spaces, and the lattice sequence criteria.

T_mu^xi f(z) = integral of f(w) / rho(z, w)^{n+1+xi} dmu(w)
B_mu^xi f(z) = integral of |f(w)| / |rho(z, w)|^{n+1+xi} dmu(w)

For a KernelSum f the image T_mu^xi f is again a KernelSum when mu is discrete
(one term per atom) or a covariant density (two-kernel integral), so its norms
are exact in the cases KernelSum.norm covers.
"""

from __future__ import annotations

import hashlib
import logging
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import brentq

from ..config import get_settings
from ..errors import HypothesisError, RegimeError
from ..geometry import BergmanBall, BoundaryPath, TubePoint, abs_power, axis_point, principal_power, require_interior, rho_pair_xy
from ..lattice import Lattice, extend_lattice, generate_lattice
from ..measures.carleson import AnyMeasure, ball_mass, carleson_constant, carleson_ratio, integrate_measure
from ..measures.models import DiscreteMeasure, Profile
from ..measures.registry import resolve_density, weighted_volume
from ..models import IntegralEstimate, NormEstimate, Region, SamplingPlan, SpaceIndex, SpacePair, WeightParams
from ..quadrature.integrate import TubeFunction, c1_constant, norm_p_alpha
from .test_functions import KernelSum, kernel_type, normalized_kernel

logger = logging.getLogger("bergman-tube")

SequenceVerdict = Literal["finite", "unbounded"]


class OperatorNormReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    lower: float
    carleson_surrogate: float
    ratio: Optional[float]
    family_constant: float
    argmax_probe: Optional[TubePoint] = None
    argmax_center: Optional[TubePoint] = None
    probe_count: int
    lattice_size: int


class SequenceRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    ball_mass: float
    rho: float
    summand: float


class SequenceReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    norm: float
    exponent: float
    summand_profile: Tuple[SequenceRow, ...]


class CrossoverReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta_star: float
    predicted: float
    threshold: float
    bracket: Tuple[float, float]
    evaluations: int


def _kernel_exponent(z: TubePoint, xi: float) -> float:
    if not xi > -1:
        raise HypothesisError(f"requires xi > -1, got xi={xi:g}")
    return z.n + 1.0 + xi


def toeplitz_estimate(
    mu: AnyMeasure, xi: float, f: TubeFunction, z: TubePoint, plan: SamplingPlan, *, threads: Optional[int] = None
) -> IntegralEstimate:
    require_interior(z)
    b = _kernel_exponent(z, xi)
    zx, zy = z.arrays()

    def _integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.asarray(f(x, y)) * principal_power(rho_pair_xy(zx, zy, x, y), -b)

    return integrate_measure(mu, _integrand, plan, center=z, threads=threads)


def toeplitz_apply(mu: AnyMeasure, xi: float, f: TubeFunction, z: TubePoint, plan: SamplingPlan) -> complex:
    """T_mu^xi f(z): exact for atoms, quadrature for densities."""
    return toeplitz_estimate(mu, xi, f, z, plan).value


def berezin_op_apply(mu: AnyMeasure, xi: float, f: TubeFunction, z: TubePoint, plan: SamplingPlan) -> float:
    """B_mu^xi f(z) >= |T_mu^xi f(z)|."""
    require_interior(z)
    b = _kernel_exponent(z, xi)
    zx, zy = z.arrays()

    def _integrand(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(f(x, y))) * abs_power(rho_pair_xy(zx, zy, x, y), -b)

    return max(integrate_measure(mu, _integrand, plan, center=z).value_re, 0.0)


def toeplitz_image(mu: AnyMeasure, xi: float, f: KernelSum) -> Optional[KernelSum]:
    """T_mu^xi f as a KernelSum, or None when mu needs quadrature."""
    n = f.n
    b_out = n + 1.0 + xi
    if isinstance(mu, DiscreteMeasure):
        if not mu.atoms:
            return KernelSum(b=b_out, coeffs=np.zeros(0, dtype=complex), x=np.zeros((0, n)), y=np.zeros((0, n)))
        x, y, w = mu.arrays()
        return KernelSum(b=b_out, coeffs=w * f(x, y), x=x, y=y)
    profile = resolve_density(mu)
    if not profile.covariant:
        return None
    beta = profile.exponent
    # integral of rho(w, a_j)^{-b} rho(z, w)^{-b_out} rho(w)^beta dV(w) = C1 / rho(z, a_j)^{b_out + b - beta - n - 1}
    constant = c1_constant(n, b_out, f.b, beta)
    return KernelSum(
        b=b_out + f.b - beta - n - 1.0,
        coeffs=profile.scale * constant * f.coeffs,
        x=f.x,
        y=f.y,
    )


def _node_stream(seed: int, x: np.ndarray, y: np.ndarray) -> int:
    digest = hashlib.blake2b(digest_size=8)
    digest.update(int(seed).to_bytes(8, "little"))
    digest.update(np.ascontiguousarray(x, dtype="<f8").tobytes())
    digest.update(np.ascontiguousarray(y, dtype="<f8").tobytes())
    return int.from_bytes(digest.digest(), "little")


def nested_toeplitz(mu: AnyMeasure, xi: float, f: TubeFunction, plan: SamplingPlan) -> TubeFunction:
    """T_mu^xi f at outer quadrature nodes, each by an inner estimate of sqrt(outer) samples on its own stream."""
    inner_samples = max(1, math.isqrt(plan.samples))

    def _outer(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0], dtype=complex)
        for i in range(x.shape[0]):
            inner = plan.with_samples(inner_samples).derive(_node_stream(plan.seed, x[i], y[i]))
            node = TubePoint.from_arrays(x[i], y[i])
            out[i] = toeplitz_estimate(mu, xi, f, node, inner, threads=1).value
        return out

    return _outer


def toeplitz_image_norm(
    mu: AnyMeasure, sp: SpacePair, f: KernelSum, plan: SamplingPlan, *, threads: Optional[int] = None
) -> NormEstimate:
    """||T_mu^xi f||_{p2, alpha2}."""
    target = SpaceIndex(p=sp.p2, alpha=sp.alpha2)
    image = toeplitz_image(mu, sp.xi, f)
    if image is not None:
        return image.norm(target, plan, threads=threads)
    params = WeightParams(n=f.n, alpha=sp.alpha2)
    return norm_p_alpha(target, params, nested_toeplitz(mu, sp.xi, f, plan), plan, threads=threads)


def axis_probes(n: int = 1, levels: int = 17, low: float = 1e-2, high: float = 1e2) -> List[TubePoint]:
    """Axis points with rho log-spaced in [low, high]; doubling-refinement keeps every old point."""
    return [axis_point(float(h), n) for h in np.logspace(math.log10(low), math.log10(high), levels)]


def refined_levels(levels: int) -> int:
    """Level count of the next nested refinement of axis_probes."""
    return 2 * levels - 1


def operator_norm_estimate(
    mu: AnyMeasure,
    sp: SpacePair,
    probes: Sequence[TubePoint],
    plan: SamplingPlan,
    *,
    lattice: Optional[Lattice] = None,
    region: Optional[Region] = None,
) -> OperatorNormReport:
    """
    lower = sup over probes a of ||T f_a||_{p2,alpha2} / ||f_a||_{p1,alpha1} for kernel-type f_a;
    carleson_surrogate = sup of carleson_ratio over the lattice points, at the lattice radius.

    Without a lattice, one is generated over `region` (default: the settings' region)
    at the settings' radius and probe density. The (lambda, gamma) test-family
    constant over the probes is reported alongside as family_constant.
    """
    if not probes:
        raise HypothesisError("operator_norm_estimate needs at least one probe")
    if sp.p1 > sp.p2:
        raise RegimeError(
            f"requires p1 <= p2 (bounded-operator regime), got p1={sp.p1:g}, p2={sp.p2:g}; "
            "use the sequence criterion when p2 < p1"
        )
    n = probes[0].n
    sp.check_hypothesis(n)
    cp = sp.carleson_params()
    if lattice is None:
        s = get_settings()
        box = region or Region(x_bound=s.x_bound, yprime_bound=s.yprime_bound, h_min=s.h_min, h_max=s.h_max)
        lattice = generate_lattice(box, s.lattice_r, s.probe_density, plan.seed, n=n)
    if lattice.n != n or len(lattice) == 0:
        raise HypothesisError(f"operator_norm_estimate needs a non-empty lattice in dimension n={n}")
    source = SpaceIndex(p=sp.p1, alpha=sp.alpha1)

    lower, argmax = 0.0, None
    for a in probes:
        f = kernel_type(a, sp.xi, p=sp.p1, alpha=sp.alpha1).kernel_sum()
        ratio = toeplitz_image_norm(mu, sp, f, plan).value / f.norm(source).value
        if argmax is None or ratio > lower:
            lower, argmax = ratio, a
    surrogate, argmax_center = 0.0, None
    for a in lattice.points:
        value = carleson_ratio(mu, cp, a, lattice.r, plan)
        if argmax_center is None or value > surrogate:
            surrogate, argmax_center = value, a
    family = carleson_constant(mu, 1.0, cp.lam, cp.gamma, probes, plan)
    ratio = lower / surrogate if surrogate > 0 else None
    logger.info("operator norm: lower=%.6g surrogate=%.6g ratio=%s over %d lattice points", lower, surrogate, ratio, len(lattice))
    return OperatorNormReport(
        lower=lower,
        carleson_surrogate=surrogate,
        ratio=ratio,
        family_constant=family,
        argmax_probe=argmax,
        argmax_center=argmax_center,
        probe_count=len(probes),
        lattice_size=len(lattice),
    )


def _require_sequence_regime(sp: SpacePair, n: int) -> None:
    if not sp.p2 < sp.p1:
        raise RegimeError(f"requires p2 < p1 (sequence-criterion regime), got p1={sp.p1:g}, p2={sp.p2:g}")
    sp.check_hypothesis(n)


def _lq_norm(summands: np.ndarray, q: float) -> float:
    if summands.size == 0:
        return 0.0
    top = float(np.max(summands))
    if top == 0.0:
        return 0.0
    return top * float(np.sum((summands / top) ** q)) ** (1.0 / q)


def sequence_criterion(mu: AnyMeasure, sp: SpacePair, lat: Lattice, plan: SamplingPlan) -> SequenceReport:
    """l^{1/(1-lambda)} norm of mu(D(a_k, r)) / rho(a_k)^{(n+1+gamma) lambda} over the lattice."""
    _require_sequence_regime(sp, lat.n)
    q = sp.sequence_exponent
    big = (lat.n + 1.0 + sp.gamma) * sp.lam
    rows = []
    for k, a in enumerate(lat.points):
        mass = ball_mass(mu, BergmanBall(center=a, radius=lat.r), plan)
        rows.append(SequenceRow(k=k, ball_mass=mass, rho=a.rho, summand=mass / a.rho**big))
    summands = np.array([row.summand for row in rows])
    return SequenceReport(norm=_lq_norm(summands, q), exponent=q, summand_profile=tuple(rows))


def operator_sequence(mu: AnyMeasure, sp: SpacePair, lat: Lattice, plan: SamplingPlan) -> SequenceReport:
    """l^{1/(1-lambda)} norm of rho(a_k)^{(n+1+alpha2)/p2} |T_mu^xi f_k(a_k)| for the normalized kernels f_k."""
    _require_sequence_regime(sp, lat.n)
    q = sp.sequence_exponent
    out_power = (lat.n + 1.0 + sp.alpha2) / sp.p2
    rows = []
    for k, a in enumerate(lat.points):
        f = normalized_kernel(a, sp.xi, sp.p1, sp.alpha1).kernel_sum()
        image = toeplitz_image(mu, sp.xi, f)
        value = image.evaluate(a) if image is not None else toeplitz_apply(mu, sp.xi, f, a, plan)
        rows.append(SequenceRow(k=k, ball_mass=math.nan, rho=a.rho, summand=a.rho**out_power * abs(value)))
    summands = np.array([row.summand for row in rows])
    return SequenceReport(norm=_lq_norm(summands, q), exponent=q, summand_profile=tuple(rows))


def stability_verdict(before: float, after: float, tolerance: float = 0.05) -> SequenceVerdict:
    """Finite iff the truncated norm moves by at most `tolerance` (relative) under region growth."""
    if not math.isfinite(after):
        return "unbounded"
    if before == 0.0:
        return "finite" if after == 0.0 else "unbounded"
    return "finite" if abs(after - before) / abs(before) <= tolerance else "unbounded"


def sequence_consistency(
    mu: AnyMeasure,
    sp: SpacePair,
    lat: Lattice,
    plan: SamplingPlan,
    *,
    factor: float = 2.0,
    tolerance: float = 0.05,
) -> Tuple[SequenceVerdict, SequenceVerdict]:
    """(ball-mass sequence verdict, operator-side verdict), each by stability under region growth."""
    if lat.region is None:
        raise HypothesisError("sequence_consistency needs a lattice generated over a region")
    grown = extend_lattice(lat, lat.region.scaled(factor))
    seq = stability_verdict(
        sequence_criterion(mu, sp, lat, plan).norm, sequence_criterion(mu, sp, grown, plan).norm, tolerance
    )
    op = stability_verdict(
        operator_sequence(mu, sp, lat, plan).norm, operator_sequence(mu, sp, grown, plan).norm, tolerance
    )
    return seq, op


def locate_crossover(
    sp: SpacePair,
    n: int,
    region: Region,
    r: float,
    plan: SamplingPlan,
    *,
    probe_density: Optional[int] = None,
    extension: float = 1000.0,
    threshold: float = 1.05,
) -> CrossoverReport:
    """
    Smallest beta at which the V_beta sequence norm grows by more than `threshold`
    when the region is extended upward by `extension`; predicted (n+1+gamma) lambda - (n+1).
    """
    _require_sequence_regime(sp, n)
    density = probe_density if probe_density is not None else get_settings().probe_density
    base = generate_lattice(region, r, density, plan.seed, n=n)
    upper = extend_lattice(
        base, Region(x_bound=region.x_bound, yprime_bound=region.yprime_bound, h_min=region.h_min, h_max=region.h_max * extension)
    )
    predicted = (n + 1.0 + sp.gamma) * sp.lam - (n + 1.0)
    calls = 0

    def _growth(beta: float) -> float:
        nonlocal calls
        calls += 1
        mu = weighted_volume(beta, n)
        small = sequence_criterion(mu, sp, base, plan).norm
        large = sequence_criterion(mu, sp, upper, plan).norm
        return large / small - threshold

    lo = max(-0.99, predicted - 2.0)
    if _growth(lo) > 0:
        return CrossoverReport(beta_star=lo, predicted=predicted, threshold=threshold, bracket=(lo, lo), evaluations=calls)
    step, hi = 1.0, lo + 1.0
    while _growth(hi) <= 0:
        lo, hi = hi, hi + step
        step *= 2.0
        if hi > predicted + 64.0:
            raise HypothesisError("no crossover found below predicted + 64")
    beta_star = brentq(_growth, lo, hi, xtol=1e-3)
    logger.info("crossover beta*=%.4f (predicted %.4f) after %d evaluations", beta_star, predicted, calls)
    return CrossoverReport(beta_star=float(beta_star), predicted=predicted, threshold=threshold, bracket=(lo, hi), evaluations=calls)


def compactness_profile(mu: AnyMeasure, sp: SpacePair, path: BoundaryPath, plan: SamplingPlan) -> Profile:
    """||T_mu^xi f_k||_{p2,alpha2} for the normalized kernels f_k at the path points; decay indicates compactness."""
    profile = []
    for k, a in path.points():
        f = normalized_kernel(a, sp.xi, sp.p1, sp.alpha1).kernel_sum()
        profile.append((k, toeplitz_image_norm(mu, sp, f, plan).value))
    return profile
