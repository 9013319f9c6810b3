"""
Implementations of the suite's check kinds.

Each kind is a function (ctx, params, plan, case) -> measured value, where
`case` is the (name, measure, zoo entry) of a per-measure row and None
otherwise. Expensive shared inputs (the default lattice, identity runs,
Carleson verdicts) are memoized on the context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..config import Settings
from ..errors import HypothesisError
from ..geometry import (
    TubePoint,
    arrays_to_points,
    axis_point,
    ball_metric_distance,
    bergman_distance,
    cayley,
    inverse_cayley,
    sample_interior_points,
)
from ..kernel import bergman_kernel, kernel_norm
from ..lattice import Lattice, check_covering_xy, extend_lattice, generate_lattice, min_separation, overlap_consistent, region_candidates
from ..measures.carleson import AnyMeasure, berezin_transform, carleson_ratio, carleson_verdict
from ..measures.models import CarlesonVerdict, DiscreteMeasure
from ..measures.registry import weighted_volume
from ..measures.zoo import ZooEntry, atom, atom_cloud, zoo_for_exponent
from ..models import CarlesonParams, IdentityReport, Region, SamplingPlan, SpacePair, WeightParams
from ..operators.rademacher import khinchine_check
from ..operators.test_functions import KernelSum
from ..operators.toeplitz import (
    axis_probes,
    berezin_op_apply,
    locate_crossover,
    operator_norm_estimate,
    refined_levels,
    sequence_consistency,
    sequence_criterion,
    toeplitz_apply,
)
from ..quadrature.integrate import relative_spread, verify_identity, volume_law

MeasureCase = Tuple[str, AnyMeasure, Optional[ZooEntry]]
CheckFn = Callable[["SuiteContext", Dict[str, Any], SamplingPlan, Optional[MeasureCase]], Any]

CHECKS: Dict[str, CheckFn] = {}


def check(kind: str) -> Callable[[CheckFn], CheckFn]:
    def _register(fn: CheckFn) -> CheckFn:
        CHECKS[kind] = fn
        return fn

    return _register


@dataclass
class SuiteContext:
    settings: Settings
    quick: bool = False
    extra_measures: Tuple[Tuple[str, AnyMeasure], ...] = ()
    threads: Optional[int] = None
    _memo: Dict[Any, Any] = field(default_factory=dict, repr=False)

    def plan(self, samples: Optional[int] = None) -> SamplingPlan:
        count = samples if samples is not None else self.settings.samples
        if self.quick:
            count = max(1000, count // self.settings.quick_sample_divisor)
        return SamplingPlan(samples=count, seed=self.settings.seed, chunk_size=self.settings.chunk_size)

    def tolerance(self, base: float) -> float:
        return base * self.settings.quick_tolerance_factor if self.quick else base

    def memo(self, key: Any, compute: Callable[[], Any]) -> Any:
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    @property
    def region(self) -> Region:
        s = self.settings
        return Region(x_bound=s.x_bound, yprime_bound=s.yprime_bound, h_min=s.h_min, h_max=s.h_max)

    def lattice(self) -> Lattice:
        s = self.settings
        return self.memo(
            ("lattice", s.lattice_r),
            lambda: generate_lattice(self.region, s.lattice_r, s.probe_density, s.seed, n=s.n),
        )


def _space_pair(params: Dict[str, Any]) -> SpacePair:
    return SpacePair(
        p1=float(params["p1"]),
        p2=float(params["p2"]),
        alpha1=float(params.get("alpha1", 0.0)),
        alpha2=float(params.get("alpha2", 0.0)),
        xi=float(params.get("xi", 0.0)),
    )


def _carleson_params(params: Dict[str, Any]) -> CarlesonParams:
    return CarlesonParams(lam=float(params.get("lambda", 1.0)), gamma=float(params.get("gamma", 0.0)))


def measure_cases(ctx: SuiteContext, params: Dict[str, Any]) -> List[MeasureCase]:
    """The zoo matching a row's exponents, followed by any user measures."""
    n = ctx.settings.n
    if "p1" in params:
        sp = _space_pair(params)
        exponent = (n + 1.0 + sp.gamma) * sp.lam
    else:
        exponent = _carleson_params(params).ball_exponent(n)
    cases: List[MeasureCase] = [(e.name, e.measure, e) for e in zoo_for_exponent(exponent, n)]
    cases.extend((name, mu, None) for name, mu in ctx.extra_measures)
    return cases


def _require_case(case: Optional[MeasureCase]) -> MeasureCase:
    if case is None:
        raise HypothesisError("per-measure check called without a measure")
    return case


def _rng(ctx: SuiteContext, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=ctx.settings.seed + stream))


# --- integral identity and kernel ------------------------------------------


def _identity(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan) -> IdentityReport:
    n, r, s, t = int(params["n"]), float(params["r"]), float(params["s"]), float(params["t"])
    z = axis_point(1.0, n)
    return ctx.memo(
        ("identity", n, r, s, t, plan.samples),
        lambda: verify_identity(n, r, s, t, z, z, plan, threads=ctx.threads),
    )


@check("identity-sigma")
def identity_sigma(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    return _identity(ctx, params, plan).sigma_distance


@check("identity-value")
def identity_value(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    return _identity(ctx, params, plan).value_re


@check("kernel-diagonal")
def kernel_diagonal(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    n = int(params.get("n", 1))
    i = axis_point(1.0, n)
    return bergman_kernel(WeightParams(n=n, alpha=float(params.get("alpha", 0.0))), i, i).real


@check("kernel-norm-quadrature")
def kernel_norm_quadrature(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    wp = WeightParams(n=int(params.get("n", 1)), alpha=float(params.get("alpha", 0.0)))
    return kernel_norm(wp, float(params["p"]), axis_point(1.0, wp.n), method="quadrature", plan=plan)


@check("kernel-norm-scaling")
def kernel_norm_scaling(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    """Relative spread of ||K_z||_{p,alpha} rho(z)^{(n+1+alpha)/p'} by quadrature."""
    wp = WeightParams(n=int(params.get("n", 1)), alpha=float(params.get("alpha", 0.0)))
    p = float(params["p"])
    conj = p / (p - 1.0)
    products = [
        kernel_norm(wp, p, axis_point(h, wp.n), method="quadrature", plan=plan) * h ** (wp.kernel_exponent / conj)
        for h in params["heights"]
    ]
    return relative_spread(products)


# --- geometry ---------------------------------------------------------------


def _random_points(ctx: SuiteContext, count: int, n: int, stream: int) -> List[TubePoint]:
    x, y = sample_interior_points(_rng(ctx, stream), count, n)
    return arrays_to_points(x, y)


@check("isometry")
def isometry(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    """max |beta(z, w) - beta_ball(Phi^{-1} z, Phi^{-1} w)| over random pairs."""
    n, pairs = int(params.get("n", 2)), int(params["pairs"])
    zs = _random_points(ctx, pairs, n, stream=1)
    ws = _random_points(ctx, pairs, n, stream=2)
    worst = 0.0
    for z, w in zip(zs, ws):
        diff = abs(bergman_distance(z, w) - ball_metric_distance(inverse_cayley(z), inverse_cayley(w)))
        worst = max(worst, diff)
    return worst


@check("cayley-roundtrip")
def cayley_roundtrip(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    n, count = int(params.get("n", 2)), int(params["points"])
    worst = 0.0
    for z in _random_points(ctx, count, n, stream=3):
        back = cayley(inverse_cayley(z))
        err = float(np.max(np.abs(back.complex_vector() - z.complex_vector())))
        worst = max(worst, err / max(1.0, float(np.max(np.abs(z.complex_vector())))))
    return worst


@check("volume-law")
def volume_law_spread(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    wp = WeightParams(n=int(params.get("n", 1)), alpha=float(params.get("alpha", 0.0)))
    ratios = volume_law(wp, float(params["radius"]), [float(h) for h in params["heights"]], plan, threads=ctx.threads)
    return relative_spread(ratios)


# --- lattice ----------------------------------------------------------------


@check("lattice-separation")
def lattice_separation(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    lat = ctx.lattice()
    return min_separation(lat.x, lat.y)


@check("lattice-covering")
def lattice_covering(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    lat = ctx.lattice()
    px, py = region_candidates(ctx.region, lat.n, int(params["probes"]), ctx.settings.seed + 1)
    return check_covering_xy(lat, px, py).covered_fraction


@check("lattice-overlap-stable")
def lattice_overlap_stable(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    lat = ctx.lattice()
    grown = extend_lattice(lat, ctx.region.scaled(float(params.get("factor", 2.0))))
    return bool(overlap_consistent(lat, grown))


# --- Carleson zoo -------------------------------------------------------------


def _verdict(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: MeasureCase) -> CarlesonVerdict:
    name, mu, _ = case
    cp = _carleson_params(params)
    return ctx.memo(
        ("verdict", name, cp.lam, cp.gamma, plan.samples),
        lambda: carleson_verdict(mu, cp, plan, r=float(params.get("r", 1.0))),
    )


@check("carleson-indicators-agree")
def carleson_indicators_agree(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    return _verdict(ctx, params, plan, _require_case(case)).indicators_agree


@check("vanishing-indicators-agree")
def vanishing_indicators_agree(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    return _verdict(ctx, params, plan, _require_case(case)).vanishing_agree


@check("carleson-verdict")
def carleson_verdict_row(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    return _verdict(ctx, params, plan, _require_case(case)).carleson


@check("vanishing-verdict")
def vanishing_verdict_row(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    return bool(_verdict(ctx, params, plan, _require_case(case)).vanishing_ratio)


@check("matched-ratio-spread")
def matched_ratio_spread(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    n = ctx.settings.n
    cp = _carleson_params(params)
    mu = weighted_volume(cp.ball_exponent(n) - (n + 1.0), n)
    r = float(params.get("r", 1.0))
    return relative_spread([carleson_ratio(mu, cp, axis_point(h, n), r, plan) for h in params["heights"]])


# --- operators ----------------------------------------------------------------


def _opnorm_ratio(ctx: SuiteContext, mu: AnyMeasure, params: Dict[str, Any], plan: SamplingPlan, levels: int) -> Optional[float]:
    sp = _space_pair(params)
    probes = axis_probes(ctx.settings.n, levels=levels)
    return operator_norm_estimate(mu, sp, probes, plan, lattice=ctx.lattice()).ratio


@check("opnorm-homogeneity")
def opnorm_homogeneity(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    mu = atom(ctx.settings.n)
    levels = int(params.get("levels", 17))
    base = _opnorm_ratio(ctx, mu, params, plan, levels)
    scaled = _opnorm_ratio(ctx, mu.scaled(float(params.get("factor", 10.0))), params, plan, levels)
    if base is None or scaled is None:
        return math.inf
    return abs(scaled - base) / abs(base)


@check("opnorm-refinement")
def opnorm_refinement(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    mu = atom(ctx.settings.n)
    levels = int(params.get("levels", 17))
    base = _opnorm_ratio(ctx, mu, params, plan, levels)
    fine = _opnorm_ratio(ctx, mu, params, plan, refined_levels(levels))
    if base is None or fine is None:
        return math.inf
    return abs(fine - base) / abs(base)


@check("opnorm-ratio")
def opnorm_ratio(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    _, mu, _ = _require_case(case)
    ratio = _opnorm_ratio(ctx, mu, params, plan, int(params.get("levels", 17)))
    return math.nan if ratio is None else ratio


@check("domination")
def domination_violations(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> int:
    """Count of random (mu, f, z) draws with |T_mu^xi f(z)| > B_mu^xi f(z)."""
    n, draws = int(params.get("n", 1)), int(params["draws"])
    rng = _rng(ctx, stream=4)
    violations = 0
    for _ in range(draws):
        ax, ay = sample_interior_points(rng, 3, n)
        mu = DiscreteMeasure.from_points(arrays_to_points(ax, ay), list(rng.uniform(0.1, 2.0, size=3)))
        cx, cy = sample_interior_points(rng, 2, n)
        coeffs = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = KernelSum(b=float(rng.uniform(1.0, 4.0)), coeffs=coeffs, x=cx, y=cy)
        zx, zy = sample_interior_points(rng, 1, n)
        z = TubePoint.from_arrays(zx[0], zy[0])
        xi = float(rng.uniform(-0.5, 3.0))
        lhs = abs(toeplitz_apply(mu, xi, f, z, plan))
        rhs = berezin_op_apply(mu, xi, f, z, plan)
        if lhs > rhs * (1.0 + 1e-12):
            violations += 1
    return violations


@check("sequence-cloud-stability")
def sequence_cloud_stability(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    sp = _space_pair(params)
    lat = ctx.lattice()
    grown = extend_lattice(lat, ctx.region.scaled(float(params.get("factor", 2.0))))
    mu = atom_cloud(ctx.settings.n)
    before = sequence_criterion(mu, sp, lat, plan).norm
    after = sequence_criterion(mu, sp, grown, plan).norm
    return abs(after - before) / before if before > 0 else abs(after)


def _sequence_verdicts(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: MeasureCase) -> Tuple[str, str]:
    name, mu, _ = case
    sp = _space_pair(params)
    return ctx.memo(
        ("sequence", name, sp.p1, sp.p2, sp.xi, plan.samples),
        lambda: sequence_consistency(mu, sp, ctx.lattice(), plan, tolerance=float(params.get("stability", 0.05))),
    )


@check("sequence-agree")
def sequence_agree(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    seq, op = _sequence_verdicts(ctx, params, plan, _require_case(case))
    return seq == op


@check("sequence-summable")
def sequence_summable(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    seq, _ = _sequence_verdicts(ctx, params, plan, _require_case(case))
    return seq == "finite"


@check("crossover-monotone")
def crossover_monotone(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    """The V_beta crossover exponent increases with gamma (raised through xi)."""
    s = ctx.settings
    stars = []
    for xi in params["xis"]:
        sp = SpacePair(p1=float(params["p1"]), p2=float(params["p2"]), xi=float(xi))
        report = locate_crossover(sp, s.n, ctx.region, s.lattice_r, plan, probe_density=s.probe_density)
        stars.append(report.beta_star)
    return all(a < b for a, b in zip(stars, stars[1:]))


# --- Khinchine ------------------------------------------------------------------


def _coefficient_draws(ctx: SuiteContext, params: Dict[str, Any]) -> List[np.ndarray]:
    rng = _rng(ctx, stream=5)
    size = int(params.get("size", 8))
    return [rng.normal(size=size) + 1j * rng.normal(size=size) for _ in range(int(params.get("draws", 10)))]


@check("khinchine-ratio")
def khinchine_ratio(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    c = _coefficient_draws(ctx, params)[0]
    return khinchine_check(c, float(params["p"]), plan.samples, ctx.settings.seed).ratio


@check("khinchine-scale")
def khinchine_scale(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    """max relative change of the ratio under c -> 2c."""
    p = float(params["p"])
    worst = 0.0
    for c in _coefficient_draws(ctx, params):
        base = khinchine_check(c, p, plan.samples, ctx.settings.seed).ratio
        doubled = khinchine_check(2.0 * c, p, plan.samples, ctx.settings.seed).ratio
        worst = max(worst, abs(doubled - base) / base)
    return worst


@check("khinchine-band")
def khinchine_band_row(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> bool:
    p = float(params["p"])
    return all(khinchine_check(c, p, plan.samples, ctx.settings.seed).in_band for c in _coefficient_draws(ctx, params))


@check("berezin-atom-peak")
def berezin_atom_peak(ctx: SuiteContext, params: Dict[str, Any], plan: SamplingPlan, case: Optional[MeasureCase]) -> float:
    """B_{s,t}(delta_i)(i) = 1 for every s, t."""
    i = axis_point(1.0, ctx.settings.n)
    return berezin_transform(atom(ctx.settings.n), float(params.get("alpha", 0.0)), float(params["s"]), float(params["t"]), i, plan)
