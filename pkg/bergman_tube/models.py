"""
Shared parameter and result models.

Defines WeightParams, SpaceIndex, SamplingPlan, IntegralEstimate, NormEstimate,
IdentityReport, Region, CarlesonParams and SpacePair.
Do not duplicate these definitions elsewhere.
"""

from __future__ import annotations

from typing import Any, Dict, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import HypothesisError

Strategy = Literal["importance-cauchy", "importance-exponential", "stratified-grid", "adaptive"]


class WeightParams(BaseModel):
    """Complex dimension n and weight exponent alpha of dV_alpha = rho^alpha dV."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    alpha: float = Field(default=0.0, gt=-1.0)

    @property
    def kernel_exponent(self) -> float:
        """n + 1 + alpha, the power of rho(z, w) in the Bergman kernel."""
        return self.n + 1.0 + self.alpha


class SpaceIndex(BaseModel):
    """Integrability exponent p and weight alpha of A^p_alpha."""

    model_config = ConfigDict(frozen=True)

    p: float = Field(gt=0.0)
    alpha: float = Field(default=0.0, gt=-1.0)

    @property
    def conjugate(self) -> float:
        if self.p <= 1.0:
            raise HypothesisError(f"conjugate exponent requires p > 1, got p={self.p}")
        return self.p / (self.p - 1.0)


class SamplingPlan(BaseModel):
    """
    Everything that determines a quadrature estimate bit for bit.

    Thread count is deliberately absent: it never changes results.
    """

    model_config = ConfigDict(frozen=True)

    samples: int = Field(ge=1)
    seed: int = Field(ge=0, lt=2**64)
    strategy: Strategy = "importance-cauchy"
    # Horizontal proposal scale in units of sqrt(rho) (x', y') and rho (x_n).
    scale: float = Field(default=1.0, gt=0.0)
    # Scale of the Student-t proposal in log h.
    vertical_scale: float = Field(default=1.0, gt=0.0)
    chunk_size: int = Field(default=65_536, ge=1)
    # Independent sub-stream id; nested estimates derive their own.
    stream: int = Field(default=0, ge=0, lt=2**64)

    def with_samples(self, samples: int) -> "SamplingPlan":
        return self.model_copy(update={"samples": max(1, int(samples))})

    def derive(self, stream: int) -> "SamplingPlan":
        return self.model_copy(update={"stream": int(stream) % (2**64)})


class IntegralEstimate(BaseModel):
    """Value, statistical error, sample count and seed of an integral."""

    model_config = ConfigDict(frozen=True)

    value_re: float
    value_im: float = 0.0
    std_error: float = Field(ge=0.0)
    samples: int = Field(ge=0)
    seed: int = 0
    # e.g. "imaginary-residual", "deterministic", "exact-sum"
    flags: Tuple[str, ...] = ()

    @property
    def value(self) -> complex:
        return complex(self.value_re, self.value_im)

    @classmethod
    def exact(cls, value: complex, terms: int = 0, seed: int = 0) -> "IntegralEstimate":
        v = complex(value)
        return cls(value_re=v.real, value_im=v.imag, std_error=0.0, samples=terms, seed=seed, flags=("exact-sum",))

    def scaled(self, factor: float) -> "IntegralEstimate":
        return self.model_copy(
            update={
                "value_re": self.value_re * factor,
                "value_im": self.value_im * factor,
                "std_error": self.std_error * abs(factor),
            }
        )

    def to_report(self) -> Dict[str, Any]:
        return {
            "value_re": self.value_re,
            "value_im": self.value_im,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "flags": list(self.flags),
        }


class NormEstimate(BaseModel):
    """Estimate of ||f||_{p,alpha} with a delta-method standard error."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0.0)
    std_error: float = Field(ge=0.0)
    samples: int = Field(ge=0)
    seed: int = 0
    # "closed-form", "gram-exact", "likely-non-integrable"
    flags: Tuple[str, ...] = ()


class IdentityReport(BaseModel):
    """Measured vs closed-form value of the two-kernel integral identity."""

    model_config = ConfigDict(frozen=True)

    n: int
    r: float
    s: float
    t: float
    value_re: float
    value_im: float
    std_error: float
    samples: int
    seed: int
    predicted_re: float
    predicted_im: float
    sigma_distance: float

    @property
    def measured(self) -> complex:
        return complex(self.value_re, self.value_im)

    @property
    def predicted(self) -> complex:
        return complex(self.predicted_re, self.predicted_im)


class Region(BaseModel):
    """Truncated box {|x_j| <= x_bound, |y'_j| <= yprime_bound, h in [h_min, h_max]}."""

    model_config = ConfigDict(frozen=True)

    x_bound: float = Field(gt=0.0)
    yprime_bound: float = Field(gt=0.0)
    h_min: float = Field(gt=0.0)
    h_max: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _check_heights(self) -> "Region":
        if not (np.isfinite(self.h_max) and self.h_min < self.h_max):
            raise ValueError(f"h_range must satisfy 0 < h_min < h_max < inf, got [{self.h_min}, {self.h_max}]")
        if not (np.isfinite(self.x_bound) and np.isfinite(self.yprime_bound)):
            raise ValueError("region bounds must be finite")
        return self

    def scaled(self, factor: float) -> "Region":
        """Grow (factor > 1) horizontally by factor and vertically by factor on both ends."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Region(
            x_bound=self.x_bound * factor,
            yprime_bound=self.yprime_bound * factor,
            h_min=self.h_min / factor,
            h_max=self.h_max * factor,
        )

    def contains_xy(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Boolean mask for (..., n) coordinate arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        yp = y[..., :-1]
        h = y[..., -1] - np.sum(yp * yp, axis=-1)
        inside = np.all(np.abs(x) <= self.x_bound, axis=-1)
        if yp.shape[-1]:
            inside &= np.all(np.abs(yp) <= self.yprime_bound, axis=-1)
        inside &= (h >= self.h_min) & (h <= self.h_max)
        return inside

    def header(self) -> Dict[str, float]:
        return {
            "x_bound": self.x_bound,
            "yprime_bound": self.yprime_bound,
            "h_min": self.h_min,
            "h_max": self.h_max,
        }


class CarlesonParams(BaseModel):
    """The pair (lambda, gamma) of a (lambda, gamma)-Carleson condition."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", ge=1.0)
    gamma: float = Field(default=0.0, gt=-1.0)

    def ball_exponent(self, n: int) -> float:
        """(n + 1 + gamma) * lambda, the power of rho(a) a ball mass is compared with."""
        return (n + 1.0 + self.gamma) * self.lam


class SpacePair(BaseModel):
    """
    Source space A^{p1}_{alpha1}, target space A^{p2}_{alpha2} and kernel shift xi.

    lam and gamma are properties, recomputed from the fields on every access.
    """

    model_config = ConfigDict(frozen=True)

    p1: float = Field(gt=0.0)
    p2: float = Field(gt=0.0)
    alpha1: float = Field(default=0.0, gt=-1.0)
    alpha2: float = Field(default=0.0, gt=-1.0)
    xi: float = Field(default=0.0, gt=-1.0)

    @property
    def lam(self) -> float:
        return 1.0 + 1.0 / self.p1 - 1.0 / self.p2

    @property
    def gamma(self) -> float:
        return (self.xi + self.alpha1 / self.p1 - self.alpha2 / self.p2) / self.lam

    @property
    def sequence_exponent(self) -> float:
        """1 / (1 - lambda); only meaningful when p2 < p1."""
        return 1.0 / (1.0 - self.lam)

    def kernel_exponent(self, n: int) -> float:
        return n + 1.0 + self.xi

    def check_hypothesis(self, n: int) -> None:
        """n + 1 + xi > n * max(1, 1/p_i) + (1 + alpha_i)/p_i for i = 1, 2."""
        lhs = self.kernel_exponent(n)
        for idx, (p, a) in enumerate(((self.p1, self.alpha1), (self.p2, self.alpha2)), start=1):
            rhs = n * max(1.0, 1.0 / p) + (1.0 + a) / p
            if not lhs > rhs:
                raise HypothesisError(
                    f"requires n+1+xi > n*max(1,1/p{idx}) + (1+alpha{idx})/p{idx}: "
                    f"{lhs:g} <= {rhs:g} (kernel-exponent hypothesis)"
                )

    def carleson_params(self) -> CarlesonParams:
        """(lambda, gamma) as CarlesonParams; valid only in the p1 <= p2 regime."""
        return CarlesonParams(lam=self.lam, gamma=self.gamma)
