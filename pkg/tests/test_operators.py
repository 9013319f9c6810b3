"""
Tests for Toeplitz and Berezin-type operators, test-function families and the sequence criteria.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from pydantic import ValidationError

from bergman_tube.errors import DivergentRegimeError, HypothesisError, RegimeError
from bergman_tube.geometry import BoundaryPath, axis_point, rho_pair_xy
from bergman_tube.lattice import Lattice, extend_lattice, generate_lattice
from bergman_tube.measures.carleson import carleson_ratio
from bergman_tube.measures.models import DiscreteMeasure
from bergman_tube.measures.registry import weighted_volume
from bergman_tube.measures.zoo import atom, atom_cloud
from bergman_tube.models import Region, SamplingPlan, SpaceIndex, SpacePair
from bergman_tube.operators.test_functions import (
    KernelSum,
    TestFunction,
    kernel_type,
    normalized_kernel,
    superposition,
    superposition_check,
    test_function_eval,
)
from bergman_tube.operators.toeplitz import (
    axis_probes,
    berezin_op_apply,
    compactness_profile,
    locate_crossover,
    operator_norm_estimate,
    operator_sequence,
    refined_levels,
    sequence_criterion,
    stability_verdict,
    toeplitz_apply,
    toeplitz_image,
)
from bergman_tube.quadrature.integrate import c1_constant, one_kernel_constant

PLAN = SamplingPlan(samples=1, seed=0)
# lambda = 1, gamma = 2
SQUARE = SpacePair(p1=2.0, p2=2.0, xi=2.0)
# lambda = 1/2, gamma = 4, sequence exponent 2
SHRINK = SpacePair(p1=2.0, p2=1.0, xi=2.0)


def _ones(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.ones(x.shape[0])


def test_toeplitz_of_atom() -> None:
    """T_{delta_i}^0 1 (2i) = rho(2i, i)^{-2} = 1 / 1.5^2."""
    value = toeplitz_apply(atom(), 0.0, _ones, axis_point(2.0), PLAN)
    assert value == pytest.approx(1.0 / 2.25)


def test_berezin_operator_dominates_toeplitz() -> None:
    """B_mu^xi f >= |T_mu^xi f| pointwise."""
    f = KernelSum.single(axis_point(2.0), 2.0)
    z = axis_point(0.7).model_copy(update={"x": (0.4,)})
    t = toeplitz_apply(atom_cloud(), 0.5, f, z, PLAN)
    b = berezin_op_apply(atom_cloud(), 0.5, f, z, PLAN)
    assert b >= abs(t) - 1e-15


def test_image_matches_pointwise_application() -> None:
    """The kernel-sum image of a discrete measure evaluates to T_mu^xi f."""
    f = KernelSum.single(axis_point(2.0), 3.0, coeff=0.5 - 0.25j)
    z = axis_point(1.3).model_copy(update={"x": (-0.6,)})
    image = toeplitz_image(atom_cloud(), 1.0, f)
    assert image is not None
    assert len(image) == 5
    assert image.evaluate(z) == pytest.approx(toeplitz_apply(atom_cloud(), 1.0, f, z, PLAN))


def test_image_of_covariant_density() -> None:
    """T_{V_0}^0 rho(., i)^{-3} = C1(1, 2, 3, 0) rho(., i)^{-3} = 4 pi rho(., i)^{-3}."""
    image = toeplitz_image(weighted_volume(0.0), 0.0, KernelSum.single(axis_point(1.0), 3.0))
    assert image is not None
    assert image.b == pytest.approx(3.0)
    assert image.coeffs[0] == pytest.approx(4.0 * math.pi)


def test_image_of_zero_measure_is_empty() -> None:
    image = toeplitz_image(atom().scaled(0.0), 0.0, KernelSum.single(axis_point(1.0), 3.0))
    assert image is not None
    assert len(image) == 0
    assert image.evaluate(axis_point(2.0)) == 0


def test_toeplitz_requires_xi_above_minus_one() -> None:
    with pytest.raises(HypothesisError, match="xi > -1"):
        toeplitz_apply(atom(), -1.0, _ones, axis_point(2.0), PLAN)


# Axis lattice around i: D(a, 1/2) holds i for h in {0.5, 1, 2} but not 4.
AXIS_LATTICE = Lattice.from_points([axis_point(h) for h in (0.5, 1.0, 2.0, 4.0)], r=0.5)


def test_operator_norm_of_atom() -> None:
    """
    For kernel-type f_a the atom gives 16 h^3 / (1 + h)^4 with h = rho(a), maximal
    (27/16) at h = 3; the surrogate is the lattice sup of 1 / rho(a)^4, reached at h = 1/2.
    """
    report = operator_norm_estimate(atom(), SQUARE, axis_probes(), PLAN, lattice=AXIS_LATTICE)
    assert 1.68 < report.lower <= 1.6875 + 1e-12
    assert report.carleson_surrogate == pytest.approx(16.0)
    assert report.argmax_center is not None
    assert report.argmax_center.rho == pytest.approx(0.5)
    assert report.ratio == pytest.approx(report.lower / 16.0)
    assert report.family_constant == pytest.approx(3.0 / (4.0 * math.pi))
    assert report.argmax_probe is not None
    assert report.argmax_probe.rho == pytest.approx(10**0.5)
    assert report.probe_count == 17
    assert report.lattice_size == 4


def test_operator_norm_surrogate_is_lattice_sup_of_carleson_ratio() -> None:
    lat = generate_lattice(Region(x_bound=1.0, yprime_bound=1.0, h_min=0.25, h_max=4.0), 0.5, 300, 11)
    cp = SQUARE.carleson_params()
    report = operator_norm_estimate(atom_cloud(), SQUARE, axis_probes(levels=5), PLAN, lattice=lat)
    expected = max(carleson_ratio(atom_cloud(), cp, a, lat.r, PLAN) for a in lat.points)
    assert expected > 0
    assert report.carleson_surrogate == expected
    assert report.ratio == pytest.approx(report.lower / expected)
    assert report.lattice_size == len(lat)


def test_operator_norm_of_zero_measure() -> None:
    report = operator_norm_estimate(DiscreteMeasure.zero(), SQUARE, axis_probes(levels=3), PLAN, lattice=AXIS_LATTICE)
    assert report.lower == 0.0
    assert report.carleson_surrogate == 0.0
    assert report.ratio is None


def test_operator_norm_is_homogeneous() -> None:
    """Scaling the measure scales both estimates."""
    probes = axis_probes(levels=5)
    base = operator_norm_estimate(atom(), SQUARE, probes, PLAN, lattice=AXIS_LATTICE)
    double = operator_norm_estimate(atom().scaled(2.0), SQUARE, probes, PLAN, lattice=AXIS_LATTICE)
    assert double.lower == pytest.approx(2.0 * base.lower)
    assert double.carleson_surrogate == pytest.approx(2.0 * base.carleson_surrogate)
    assert double.ratio == pytest.approx(base.ratio)


def test_operator_norm_regime_errors() -> None:
    with pytest.raises(RegimeError, match="p1 <= p2"):
        operator_norm_estimate(atom(), SpacePair(p1=3.0, p2=2.0, xi=2.0), axis_probes(levels=3), PLAN, lattice=AXIS_LATTICE)
    with pytest.raises(HypothesisError, match="kernel-exponent"):
        operator_norm_estimate(atom(), SpacePair(p1=2.0, p2=2.0, alpha1=5.0), axis_probes(levels=3), PLAN, lattice=AXIS_LATTICE)
    with pytest.raises(HypothesisError):
        operator_norm_estimate(atom(), SQUARE, [], PLAN, lattice=AXIS_LATTICE)
    with pytest.raises(HypothesisError, match="lattice"):
        operator_norm_estimate(atom(2), SQUARE, axis_probes(n=2, levels=3), PLAN, lattice=AXIS_LATTICE)


def test_refined_probes_are_nested() -> None:
    """Each refinement keeps the previous probes."""
    coarse = {round(p.rho, 12) for p in axis_probes(levels=5)}
    fine = {round(p.rho, 12) for p in axis_probes(levels=refined_levels(5))}
    assert coarse <= fine
    assert len(fine) == 9


def test_kernel_sum_norms() -> None:
    """Single term closed form; the Gram form agrees and handles several terms."""
    i = axis_point(1.0)
    single = KernelSum.single(i, 2.0)
    est = single.norm(SpaceIndex(p=2.0))
    assert est.flags == ("closed-form",)
    assert est.value == pytest.approx(math.sqrt(4.0 * math.pi))
    assert single.gram_norm(0.0) == pytest.approx(est.value)
    pair = KernelSum.from_points([i, axis_point(2.0)], 2.0, [1.0, -1.0])
    two = pair.norm(SpaceIndex(p=2.0))
    assert two.flags == ("gram-exact",)
    assert 0.0 < two.value < est.value + KernelSum.single(axis_point(2.0), 2.0).norm(SpaceIndex(p=2.0)).value


def test_kernel_sum_norm_errors() -> None:
    i = axis_point(1.0)
    with pytest.raises(DivergentRegimeError):
        KernelSum.single(i, 1.0).norm(SpaceIndex(p=2.0))
    with pytest.raises(HypothesisError, match="SamplingPlan"):
        KernelSum.from_points([i, axis_point(3.0)], 2.0, [1.0, 1.0]).norm(SpaceIndex(p=3.0))
    with pytest.raises(ValueError):
        KernelSum.from_points([i], 2.0, [1.0, 2.0])


def test_kernel_test_function_value() -> None:
    """rho(z, i)^{-2} at z = 2i."""
    assert test_function_eval(kernel_type(axis_point(1.0), 0.0), axis_point(2.0)) == pytest.approx(1.0 / 2.25)


def test_normalized_kernels_share_a_norm() -> None:
    """||f_a||_{p,alpha} does not depend on a."""
    norms = [
        normalized_kernel(axis_point(h), 0.5, 2.0, 0.0).kernel_sum().norm(SpaceIndex(p=2.0)).value
        for h in (0.1, 1.0, 30.0)
    ]
    assert norms == pytest.approx([norms[0]] * 3)


def test_test_function_validation() -> None:
    i, j = axis_point(1.0), axis_point(2.0)
    with pytest.raises(ValidationError):
        TestFunction(kind="kernel", centers=(i, j))
    with pytest.raises(ValidationError):
        TestFunction(kind="superposition", centers=(i, j), weights=(1.0,))
    with pytest.raises(HypothesisError):
        kernel_type(i, 0.0, p=1.0, alpha=0.5).kernel_sum()


def test_superposition_has_one_term_per_center() -> None:
    f = superposition([axis_point(1.0), axis_point(4.0)], [1.0, 0.5], 0.0, 2.0, 0.0, rademacher_t=0.3).kernel_sum()
    assert len(f) == 2
    assert f.b == 2.0


def test_superposition_check() -> None:
    """One center gives C1(1, 2, 2, 0) = 4 pi exactly."""
    assert superposition_check([axis_point(1.0)], [[3.0]], 2.0, 0.0) == pytest.approx((4.0 * math.pi,))
    ratios = superposition_check([axis_point(1.0), axis_point(4.0)], [[1.0, 1.0], [1.0, 2.0]], 2.0, 0.0)
    assert len(ratios) == 2
    assert all(r > 0 for r in ratios)
    with pytest.raises(HypothesisError, match="b > "):
        superposition_check([axis_point(1.0)], [[1.0]], 1.5, 0.0)
    with pytest.raises(HypothesisError, match="positive"):
        superposition_check([axis_point(1.0), axis_point(4.0)], [[1.0, -1.0]], 2.0, 0.0)
    with pytest.raises(HypothesisError, match="SamplingPlan"):
        superposition_check([axis_point(1.0), axis_point(4.0)], [[1.0, 1.0]], 3.0, 0.0, p=1.5)


def test_superposition_single_center_any_p() -> None:
    """One term is closed form for every p: the ratio is the one-kernel constant."""
    (ratio,) = superposition_check([axis_point(2.0)], [[0.7]], 3.0, 0.0, p=1.5)
    assert ratio == pytest.approx(one_kernel_constant(1, 4.5, 0.0))


@pytest.fixture(scope="module")
def twenty_centers() -> list:
    lat = generate_lattice(Region(x_bound=2.0, yprime_bound=1.0, h_min=0.25, h_max=4.0), 0.5, 2000, 3)
    assert len(lat) >= 20
    return lat.points[:20]


def _positive_draws(count: int, size: int) -> list:
    rng = np.random.Generator(np.random.Philox(key=17))
    return [list(rng.uniform(0.5, 1.5, size)) for _ in range(count)]


def test_superposition_bound_p2_on_lattice(twenty_centers: list) -> None:
    """
    With G the Gram matrix, the p = 2 ratio is C1 * c^T G c / c^T diag(G) c, so one
    constant bounds every draw: C1 times the largest row sum of |G| normalized by its diagonal.
    """
    b = 3.0
    ratios = superposition_check(twenty_centers, _positive_draws(10, 20), b, 0.0)
    assert len(ratios) == 10
    f = KernelSum.from_points(twenty_centers, b, [1.0] * 20)
    pair = rho_pair_xy(f.x[:, None, :], f.y[:, None, :], f.x[None, :, :], f.y[None, :, :])
    gram = np.abs(pair) ** -(2.0 * b - 2.0)
    diag = np.sqrt(np.diag(gram))
    bound = c1_constant(1, b, b, 0.0) * float(np.max(np.sum(gram / np.outer(diag, diag), axis=1)))
    assert all(0 < r <= bound * (1 + 1e-9) for r in ratios)


def test_superposition_bound_p15_by_quadrature(twenty_centers: list) -> None:
    """p != 2 goes through quadrature; the ratios over 10 draws share one bounded band."""
    plan = SamplingPlan(samples=40_000, seed=9, chunk_size=8192)
    ratios = superposition_check(twenty_centers, _positive_draws(10, 20), 3.0, 0.0, p=1.5, plan=plan)
    assert len(ratios) == 10
    assert all(math.isfinite(r) and r > 0 for r in ratios)
    assert max(ratios) / min(ratios) < 5.0


def test_sequence_criterion_of_atom_is_stable() -> None:
    """New lattice points lie beyond the atom's ball, so the truncated norm does not move."""
    assert SHRINK.sequence_exponent == pytest.approx(2.0)
    region = Region(x_bound=2.0, yprime_bound=1.0, h_min=0.1, h_max=10.0)
    lat = generate_lattice(region, 0.5, 2000, 5)
    grown = extend_lattice(lat, region.scaled(2.0))
    before = sequence_criterion(atom(), SHRINK, lat, PLAN)
    after = sequence_criterion(atom(), SHRINK, grown, PLAN)
    assert before.exponent == pytest.approx(2.0)
    assert len(before.summand_profile) == len(lat)
    assert after.norm == before.norm
    assert stability_verdict(before.norm, after.norm) == "finite"


def test_operator_sequence_regime() -> None:
    lat = generate_lattice(Region(x_bound=1.0, yprime_bound=1.0, h_min=0.5, h_max=2.0), 0.5, 200, 1)
    with pytest.raises(RegimeError, match="p2 < p1"):
        operator_sequence(atom(), SQUARE, lat, PLAN)
    report = operator_sequence(atom(), SHRINK, lat, PLAN)
    assert report.norm > 0


def test_stability_verdict() -> None:
    assert stability_verdict(1.0, 1.04) == "finite"
    assert stability_verdict(1.0, 1.2) == "unbounded"
    assert stability_verdict(0.0, 0.0) == "finite"
    assert stability_verdict(0.0, 1.0) == "unbounded"
    assert stability_verdict(1.0, math.inf) == "unbounded"


def test_compactness_profile_of_atom_decays() -> None:
    """|rho(i, k + i)| grows along the horizontal path, so the image norms decrease."""
    path = BoundaryPath(kind="horizontal", parameters=(1.0, 10.0, 100.0, 1000.0))
    values = [v for _, v in compactness_profile(atom(), SQUARE, path, PLAN)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_locate_crossover_reports_prediction() -> None:
    """The predicted crossover is (n+1+gamma) lambda - (n+1) = 1."""
    region = Region(x_bound=1.0, yprime_bound=1.0, h_min=0.5, h_max=2.0)
    report = locate_crossover(SHRINK, 1, region, 0.5, SamplingPlan(samples=5000, seed=3), probe_density=300)
    assert report.predicted == pytest.approx(1.0)
    assert report.bracket[0] <= report.beta_star <= report.bracket[1]
    assert report.evaluations >= 1
