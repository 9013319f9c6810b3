"""
Tests for the weighted Bergman kernel, kernel-section norms and comparability.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import gamma

from bergman_tube.errors import DivergentRegimeError, HypothesisError
from bergman_tube.geometry import BoundaryPath, TubePoint, axis_point, sample_interior_points
from bergman_tube.kernel import (
    bergman_kernel,
    bergman_project,
    comparability_band,
    kernel_constant,
    kernel_norm,
    kernel_norm_estimate,
    kernel_section,
    kernel_xy,
    normalized_kernel_decay,
    point_evaluation_bound_check,
)
from bergman_tube.models import SamplingPlan, WeightParams


def test_gamma_reference_points() -> None:
    """Gamma(1) = Gamma(2) = 1, Gamma(3) = 2, Gamma(1/2) = sqrt(pi)."""
    assert gamma(1.0) == pytest.approx(1.0)
    assert gamma(2.0) == pytest.approx(1.0)
    assert gamma(3.0) == pytest.approx(2.0)
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi))


def test_kernel_constant_values() -> None:
    """c_alpha for n = 1 at alpha = 0, 1, -1/2."""
    assert kernel_constant(1, 0.0) == pytest.approx(1.0 / (4.0 * math.pi))
    assert kernel_constant(1, 1.0) == pytest.approx(2.0 / (4.0 * math.pi))
    assert kernel_constant(1, -0.5) == pytest.approx(0.5 / (4.0 * math.pi))
    assert kernel_constant(2, 0.0) == pytest.approx(2.0 / (8.0 * math.pi**2))


def test_kernel_constant_rejects_alpha() -> None:
    """alpha <= -1 is outside every weighted space."""
    with pytest.raises(HypothesisError):
        kernel_constant(1, -1.0)


def test_kernel_diagonal_at_i() -> None:
    """K_0((0', i), (0', i)) = 1/(4 pi)."""
    i = axis_point(1.0)
    assert bergman_kernel(WeightParams(n=1), i, i) == pytest.approx(1.0 / (4.0 * math.pi), abs=1e-15)


def test_kernel_hermitian() -> None:
    """K(z, w) = conj K(w, z)."""
    params = WeightParams(n=1, alpha=0.5)
    z = axis_point(2.0).model_copy(update={"x": (0.7,)})
    w = axis_point(0.3).model_copy(update={"x": (-1.2,)})
    assert bergman_kernel(params, z, w) == pytest.approx(bergman_kernel(params, w, z).conjugate())


@pytest.mark.parametrize("n, alpha", [(1, 0.0), (1, 0.5), (2, -0.5), (3, 1.0)])
def test_kernel_hermitian_vectorized(n: int, alpha: float) -> None:
    """Hermitian symmetry to 1e-14 on many random pairs."""
    params = WeightParams(n=n, alpha=alpha)
    rng = np.random.default_rng(17 + n)
    zx, zy = sample_interior_points(rng, 5000, n, log_h_spread=1.0)
    wx, wy = sample_interior_points(rng, 5000, n, log_h_spread=1.0)
    forward = kernel_xy(params, zx, zy, wx, wy)
    backward = kernel_xy(params, wx, wy, zx, zy)
    scale = np.maximum(1.0, np.abs(forward))
    assert float(np.max(np.abs(forward - np.conj(backward)) / scale)) <= 1e-14


def test_kernel_rejects_dimension_mismatch() -> None:
    """Points must live in the params' dimension."""
    with pytest.raises(HypothesisError):
        bergman_kernel(WeightParams(n=2), axis_point(1.0), axis_point(1.0))


def test_kernel_norm_closed_form_p2() -> None:
    """||K_i||_2 = sqrt(K(i, i)) = 1/(2 sqrt(pi))."""
    value = kernel_norm(WeightParams(n=1), 2.0, axis_point(1.0))
    assert value == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)))


def test_kernel_norm_scaling_law() -> None:
    """||K_z||_p rho(z)^{(n+1+alpha)/p'} does not depend on z."""
    params = WeightParams(n=1, alpha=0.0)
    for p in (1.5, 2.0, 3.0):
        conj = p / (p - 1.0)
        values = [kernel_norm(params, p, axis_point(h)) * h ** (2.0 / conj) for h in (0.25, 1.0, 4.0)]
        assert values[0] == pytest.approx(values[1])
        assert values[2] == pytest.approx(values[1])


def test_kernel_norm_quadrature_matches_closed_form(small_plan: SamplingPlan) -> None:
    """The quadrature method agrees with the closed form within a few percent."""
    params = WeightParams(n=1)
    z = axis_point(1.0)
    est = kernel_norm_estimate(params, 2.0, z, method="quadrature", plan=small_plan)
    assert est.value == pytest.approx(kernel_norm(params, 2.0, z), rel=0.05)


def test_kernel_norm_odd_power_closed_form(small_plan: SamplingPlan) -> None:
    """p = 1.5 integrates |rho|^{-3}; the half-exponent constant still applies."""
    params = WeightParams(n=1)
    z = axis_point(2.0)
    est = kernel_norm_estimate(params, 1.5, z, method="quadrature", plan=small_plan)
    assert est.value == pytest.approx(kernel_norm(params, 1.5, z), rel=0.08)


def test_kernel_norm_requires_p_above_one() -> None:
    """Kernel sections are not in A^1."""
    with pytest.raises(DivergentRegimeError):
        kernel_norm(WeightParams(n=1), 1.0, axis_point(1.0))


def test_kernel_norm_quadrature_needs_plan() -> None:
    """method='quadrature' without a plan is a usage error."""
    with pytest.raises(HypothesisError):
        kernel_norm(WeightParams(n=1), 2.0, axis_point(1.0), method="quadrature")


def test_comparability_band_is_finite() -> None:
    """|rho(z,u)| / |rho(z,v)| stays in a bounded band for beta(u, v) < r."""
    report = comparability_band([axis_point(1.0), axis_point(5.0)], 1.0, pairs=500, seed=2)
    assert report.pairs > 0
    assert 1.0 <= report.band < 100.0


def test_normalized_kernel_decay_along_vertical_path() -> None:
    """K(z_k, w) / ||K_{z_k}|| decays as z_k moves up the axis."""
    path = BoundaryPath(kind="vertical-up", parameters=(1.0, 10.0, 100.0, 1000.0))
    profile = normalized_kernel_decay(WeightParams(n=1), 2.0, axis_point(1.0), path)
    values = [v for _, v in profile]
    assert all(a > b for a, b in zip(values, values[1:]))


TO_1E3 = (1.0, 10.0, 100.0, 1000.0)
TO_1E4 = (1.0, 10.0, 100.0, 1000.0, 10000.0)


@pytest.mark.parametrize(
    "kind, p, parameters",
    [
        # n = 1, alpha = 0: the ratio falls like k^-2 sideways, k^(-2/p) upwards, k^(-2/p') downwards.
        ("horizontal", 2.0, TO_1E3),
        ("horizontal", 4.0, TO_1E3),
        ("vertical-up", 1.5, TO_1E3),
        ("vertical-down", 3.0, TO_1E3),
        ("vertical-up", 2.0, TO_1E4),
        ("vertical-down", 2.0, TO_1E4),
    ],
)
def test_normalized_kernel_decay_clears_threshold(kind: str, p: float, parameters: tuple) -> None:
    """The last value drops below 1e-3 times the first."""
    path = BoundaryPath(kind=kind, parameters=parameters)
    values = [v for _, v in normalized_kernel_decay(WeightParams(n=1), p, axis_point(1.0), path)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-3 * values[0]


def test_normalized_kernel_decay_slow_at_p2_short_vertical() -> None:
    """At p = 2 the vertical ratio only falls like 1/k: about 4e-3 by k = 10^3."""
    path = BoundaryPath(kind="vertical-up", parameters=TO_1E3)
    values = [v for _, v in normalized_kernel_decay(WeightParams(n=1), 2.0, axis_point(1.0), path)]
    assert values[-1] / values[0] == pytest.approx(1000.0 / 500.5**2)


def test_point_evaluation_rejects_degenerate_ball(small_plan: SamplingPlan) -> None:
    """The local mean-value bound needs r > 0."""
    params = WeightParams(n=1)
    with pytest.raises(HypothesisError):
        point_evaluation_bound_check(params, 2.0, lambda x, y: x[:, 0] * 0 + 1.0, axis_point(1.0), 0.0, small_plan)


def test_bergman_project_reproduces_kernel_sections() -> None:
    """P_alpha K_a(z) = K_alpha(z, a) within four standard errors."""
    params = WeightParams(n=1)
    z = TubePoint(x=(0.5,), y=(1.0,))
    a = TubePoint(x=(-0.3,), y=(2.0,))
    est = bergman_project(params, kernel_section(params, a), z, SamplingPlan(samples=200_000, seed=5, chunk_size=8192))
    exact = bergman_kernel(params, z, a)
    assert est.std_error < 0.05 * abs(exact)
    assert abs(est.value - exact) < 4.0 * est.std_error


def test_point_evaluation_ratio_comparable_across_scales() -> None:
    """|f(z)|^p rho(z)^{n+1+alpha} / local integral stays in one band from h = 0.1 to h = 10."""
    params = WeightParams(n=1)
    f = kernel_section(params, axis_point(1.0))
    plan = SamplingPlan(samples=100_000, seed=13, chunk_size=8192)
    ratios = [point_evaluation_bound_check(params, 2.0, f, axis_point(h), 0.5, plan) for h in (0.1, 1.0, 10.0)]
    assert all(0.1 < value < 1.0 for value in ratios)
    assert max(ratios) / min(ratios) < 2.0
