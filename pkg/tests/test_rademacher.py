"""
Tests for Rademacher functions and the Khinchine check.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from bergman_tube.errors import HypothesisError
from bergman_tube.operators.rademacher import khinchine_band, khinchine_check, rademacher, rademacher_values


def test_rademacher_values() -> None:
    assert rademacher(0, 0.25) == 1
    assert rademacher(0, 0.75) == -1
    assert rademacher(2, 0.1) == 1
    assert rademacher(1, 0.3) == -1


def test_rademacher_is_periodic() -> None:
    t = np.linspace(0.0, 0.99, 50)
    assert np.array_equal(rademacher_values(3, t), rademacher_values(3, t + 1.0))


def test_rademacher_rejects_negative_index() -> None:
    with pytest.raises(ValueError):
        rademacher(-1, 0.5)


def test_khinchine_p2_is_an_identity() -> None:
    """Over all sign patterns E|sum c_j r_j|^2 = sum |c_j|^2."""
    report = khinchine_check([1.0, -2.0, 0.5, 3.0], 2.0, 1000, 0)
    assert report.exact
    assert report.samples == 32
    assert report.ratio == pytest.approx(1.0, rel=1e-12)
    assert report.in_band


def test_khinchine_p4_two_terms() -> None:
    """S = r_1 + r_2 takes +-2 and 0 equally often: E S^4 = 8."""
    report = khinchine_check([1.0, 1.0], 4.0, 100, 0)
    assert report.mid == pytest.approx(8.0)
    assert report.lhs == pytest.approx(4.0)
    assert report.ratio == pytest.approx(2.0)
    assert report.in_band


def test_khinchine_ratio_is_scale_invariant() -> None:
    c = [0.3, 1.7, -0.4]
    a = khinchine_check(c, 3.0, 64, 0)
    b = khinchine_check([5.0 * v for v in c], 3.0, 64, 0)
    assert a.ratio == pytest.approx(b.ratio, rel=1e-12)


def test_khinchine_sampled_path() -> None:
    """Too few samples for the dyadic grid: t is drawn at random."""
    report = khinchine_check([1.0] * 12, 1.0, 1000, 7)
    assert not report.exact
    assert report.samples == 1000
    assert report.in_band


def test_khinchine_band() -> None:
    assert khinchine_band(2.0) == (1.0, 1.0)
    low, high = khinchine_band(1.0)
    assert low == pytest.approx(1.0 / math.sqrt(3.0))
    assert high == 1.0
    assert khinchine_band(6.0) == (1.0, 5.0**3)


def test_khinchine_input_errors() -> None:
    with pytest.raises(HypothesisError):
        khinchine_check([], 2.0, 100, 0)
    with pytest.raises(HypothesisError):
        khinchine_check([1.0], 0.0, 100, 0)
