"""
Tests for ball masses, Carleson ratios, Berezin-type transforms, verdicts and the zoo.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from bergman_tube.errors import DivergentRegimeError, HypothesisError
from bergman_tube.geometry import BergmanBall, BoundaryPath, axis_point
from bergman_tube.measures.carleson import (
    ball_mass,
    berezin_bounded_check,
    berezin_transform,
    carleson_constant,
    carleson_ratio,
    carleson_test,
    carleson_verdict,
    default_paths,
    domination_check,
    integrate_measure,
    kernel_moment,
    lattice_measure,
    mplus_moment,
    profile_unbounded,
    profile_vanishing,
    vanishing_test,
)
from bergman_tube.measures.models import DiscreteMeasure
from bergman_tube.measures.registry import weighted_volume
from bergman_tube.measures.zoo import atom, atom_cloud, measure_zoo, zoo_for_exponent
from bergman_tube.models import CarlesonParams, SamplingPlan

CP = CarlesonParams(lam=1.0, gamma=0.0)


def test_atom_ball_mass() -> None:
    """delta_i(D(a, r)) is 1 iff beta(a, i) < r."""
    plan = SamplingPlan(samples=1, seed=0)
    assert ball_mass(atom(), BergmanBall(center=axis_point(1.0), radius=0.5), plan) == 1.0
    assert ball_mass(atom(), BergmanBall(center=axis_point(100.0), radius=0.5), plan) == 0.0


def test_zero_measure() -> None:
    """The empty discrete measure integrates everything to zero."""
    plan = SamplingPlan(samples=1, seed=0)
    zero = DiscreteMeasure.zero()
    assert ball_mass(zero, BergmanBall(center=axis_point(1.0), radius=1.0), plan) == 0.0
    assert integrate_measure(zero, lambda x, y: np.ones(x.shape[0]), plan).value == 0


def test_integrate_discrete_is_exact_sum() -> None:
    """Atoms integrate by a weighted sum, flagged exact."""
    plan = SamplingPlan(samples=1, seed=0)
    est = integrate_measure(atom_cloud(), lambda x, y: np.ones(x.shape[0]), plan)
    assert est.value_re == pytest.approx(2.5)
    assert est.flags == ("exact-sum",)
    assert est.std_error == 0.0


def test_atom_carleson_ratio_at_i() -> None:
    """mu(D(i, r)) / rho(i)^{n+1} = 1 for the atom at i."""
    assert carleson_ratio(atom(), CP, axis_point(1.0), 1.0, SamplingPlan(samples=1, seed=0)) == 1.0


def test_berezin_of_atom_peaks_at_one() -> None:
    """B_{s,t}(delta_i)(i) = 1."""
    plan = SamplingPlan(samples=1, seed=0)
    assert berezin_transform(atom(), 0.0, 1.0, 3.0, axis_point(1.0), plan) == pytest.approx(1.0, abs=1e-12)
    # rho(2i, i) = 3/2
    assert berezin_transform(atom(), 0.0, 1.0, 3.0, axis_point(2.0), plan) == pytest.approx(8.0 / 1.5**5)


def test_berezin_of_matched_density_is_constant() -> None:
    """B_{1,2}(V_0) = 4 pi at every point (closed form)."""
    plan = SamplingPlan(samples=1, seed=0)
    mu = weighted_volume(0.0)
    for h in (0.5, 1.0, 3.0):
        assert berezin_transform(mu, 0.0, 1.0, 2.0, axis_point(h), plan) == pytest.approx(4.0 * math.pi)


def test_berezin_requires_positive_exponents() -> None:
    """s > 0 and t > 0."""
    with pytest.raises(HypothesisError):
        berezin_transform(atom(), 0.0, 0.0, 1.0, axis_point(1.0), SamplingPlan(samples=1, seed=0))


def test_kernel_moment_divergent_density() -> None:
    """The kernel moment of V_0 needs exponent > n + 1."""
    with pytest.raises(DivergentRegimeError):
        kernel_moment(weighted_volume(0.0), axis_point(1.0), 1.5, SamplingPlan(samples=1, seed=0))


def test_carleson_constant_of_atom() -> None:
    """The test-family value at a = i is c_alpha for the atom at i."""
    plan = SamplingPlan(samples=1, seed=0)
    value = carleson_constant(atom(), 2.0, 2.0, 0.0, [axis_point(1.0), axis_point(4.0)], plan)
    assert value == pytest.approx(1.0 / (4.0 * math.pi))
    with pytest.raises(HypothesisError):
        carleson_constant(atom(), 2.0, 2.0, 0.0, [], plan)


def test_matched_density_ratio_constant(small_plan: SamplingPlan) -> None:
    """carleson_ratio of V_beta with n+1+beta = (n+1+gamma) lambda does not depend on the center."""
    mu = weighted_volume(0.0)
    values = [carleson_ratio(mu, CP, axis_point(h), 1.0, small_plan) for h in (0.5, 1.0, 2.0, 4.0)]
    assert values[0] > 0
    assert values == pytest.approx([values[0]] * 4, rel=1e-12)


def test_profile_growth_detection() -> None:
    """Unbounded iff the tail increases and clears the growth factor."""
    assert profile_unbounded([1.0, 2.0, 5.0, 20.0], 10.0)
    assert not profile_unbounded([1.0, 2.0, 5.0, 8.0], 10.0)
    assert not profile_unbounded([1.0, 30.0, 20.0, 25.0], 10.0)
    assert not profile_unbounded([0.0, 0.0, 0.0], 10.0)


def test_profile_vanishing_detection() -> None:
    """Vanishing iff the tail is non-increasing and below epsilon x max."""
    assert profile_vanishing([1.0, 0.5, 0.0, 0.0, 0.0], 1e-3)
    assert not profile_vanishing([1.0, 0.5, 0.1, 0.1, 0.1], 1e-3)
    assert not profile_vanishing([1.0, 0.0, 0.0, 1e-4], 1e-3)
    assert profile_vanishing([], 1e-3)


def test_atom_verdict() -> None:
    """The atom is Carleson and vanishing Carleson; all indicators agree."""
    verdict = carleson_verdict(atom(), CP, SamplingPlan(samples=1, seed=0))
    assert verdict.carleson
    assert verdict.indicators_agree
    assert verdict.vanishing_ratio
    assert verdict.vanishing_agree


def test_mismatched_density_verdict(small_plan: SamplingPlan) -> None:
    """V_{-1/2} is not (1, 0)-Carleson: its ratio grows toward the boundary."""
    verdict = carleson_verdict(weighted_volume(-0.5), CP, small_plan)
    assert not verdict.carleson
    assert verdict.ratio_verdict == "unbounded"
    assert verdict.indicators_agree


def test_carleson_test_reports_argmax() -> None:
    """The sup over probes is attained at the atom's own point."""
    plan = SamplingPlan(samples=1, seed=0)
    probes = [axis_point(h) for h in (0.5, 1.0, 2.0)]
    report = carleson_test(atom(), CP, 0.1, probes, plan)
    assert report.sup_ratio == pytest.approx(1.0)
    assert report.argmax_center == axis_point(1.0)
    assert report.probe_count == 3
    assert report.verdict == "Carleson-consistent"


def test_vanishing_test_of_atom() -> None:
    """Every path profile of the atom decays."""
    plan = SamplingPlan(samples=1, seed=0)
    report = vanishing_test(atom(), CP, 1.0, default_paths(1), plan)
    assert report.verdict == "vanishing-consistent"
    assert set(report.profiles) == {"vertical-down", "vertical-up", "horizontal"}


def test_berezin_bounded_check_of_atom() -> None:
    """The Berezin transform of the atom is bounded with sup 1 on the axis."""
    plan = SamplingPlan(samples=1, seed=0)
    paths = [BoundaryPath(kind="vertical-up", parameters=(1.0, 10.0, 100.0, 1000.0, 1e4, 1e5))]
    report = berezin_bounded_check(atom(), 0.0, 1.0, 3.0, [axis_point(1.0)], plan, paths=paths)
    assert report.verdict == "bounded"
    assert report.sup >= 1.0
    assert report.vanishing
    with pytest.raises(HypothesisError):
        berezin_bounded_check(atom(), 0.0, 0.5, 3.0, [axis_point(1.0)], plan)


def test_domination_check_of_atom() -> None:
    """integral |f|^p d delta_i over integral |f|^p dV for f = rho(., i)^{-2}, p = 2."""
    report = domination_check(atom(), CP, 2.0, [axis_point(1.0)], SamplingPlan(samples=1, seed=0))
    assert report.constant == pytest.approx(1.0 / (4.0 * math.pi))


def test_mplus_moment() -> None:
    """Densities use their declared exponent; divergence is flagged, not raised."""
    plan = SamplingPlan(samples=1, seed=0)
    ok = mplus_moment(weighted_volume(0.0), None, plan)
    assert math.isfinite(ok.value_re)
    divergent = mplus_moment(weighted_volume(0.0, mplus_t=1.5), None, plan)
    assert divergent.flags == ("divergent",)
    with pytest.raises(HypothesisError):
        mplus_moment(atom(), None, plan)


def test_lattice_measure_is_carleson_at_its_points() -> None:
    """Weights rho(a)^{(n+1+gamma) lambda} make every self-ratio at least 1."""
    points = [axis_point(h) for h in (0.1, 1.0, 10.0)]
    mu = lattice_measure(points, CP)
    plan = SamplingPlan(samples=1, seed=0)
    assert [carleson_ratio(mu, CP, a, 0.5, plan) for a in points] == pytest.approx([1.0, 1.0, 1.0])


def test_zoo_entries() -> None:
    """Four measures with known answers; the densities follow the ball exponent."""
    entries = measure_zoo(CP)
    assert [e.name for e in entries] == ["atom", "atom-cloud", "matched-density", "mismatched-density"]
    assert [e.carleson for e in entries] == [True, True, True, False]
    assert [e.vanishing for e in entries] == [True, True, False, False]
    assert [e.summable for e in entries] == [True, True, False, False]
    assert entries[2].measure.params["exponent"] == 0.0
    assert entries[3].measure.params["exponent"] == -0.5


def test_zoo_needs_room_for_mismatch() -> None:
    """The mismatched density must still be a weighted volume."""
    with pytest.raises(HypothesisError):
        zoo_for_exponent(1.5)


def test_discrete_measure_scaling() -> None:
    """Scaling multiplies weights; zero gives the zero measure."""
    cloud = atom_cloud()
    assert cloud.scaled(2.0).total_mass() == pytest.approx(5.0)
    assert cloud.scaled(0.0).atoms == ()
    with pytest.raises(ValueError):
        cloud.scaled(-1.0)
