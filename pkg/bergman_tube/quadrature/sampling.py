"""
Counter-based random streams and importance proposals on the chart (x, y', h).

Chunk c of a plan always draws from Philox(key=seed, counter=[0, 0, c, stream]),
so a sample's randomness depends only on (seed, stream, global index) and
never on how chunks are spread across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from ..geometry import TubePoint, axis_point
from ..models import SamplingPlan

# |log(h / h0)| beyond this window contributes nothing representable.
LOG_HEIGHT_WINDOW = 300.0
STUDENT_DF = 3.0


def chunk_generator(plan: SamplingPlan, chunk_index: int) -> np.random.Generator:
    counter = np.array([0, 0, chunk_index, plan.stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=plan.seed, counter=counter))


def chunk_bounds(plan: SamplingPlan) -> Tuple[int, int]:
    """(number of chunks, chunk size) for a plan."""
    size = plan.chunk_size
    return (plan.samples + size - 1) // size, size


@dataclass(frozen=True)
class ChunkDraw:
    x: np.ndarray  # (size, n)
    y: np.ndarray  # (size, n)
    h: np.ndarray  # (size,), equals rho(w)
    inv_density: np.ndarray  # (size,), 1 / proposal density in (x, y', h)
    valid: np.ndarray  # (size,), False outside the log-height window


@dataclass(frozen=True)
class Proposal:
    """Product proposal centered at a reference point, covariant under dilations and translations."""

    n: int
    center_x: np.ndarray
    center_yp: np.ndarray
    h0: float
    strategy: str
    scale: float
    vertical_scale: float

    @classmethod
    def for_center(cls, n: int, plan: SamplingPlan, center: Optional[TubePoint] = None) -> "Proposal":
        ref = center if center is not None else axis_point(1.0, n)
        x, y = ref.arrays()
        return cls(
            n=n,
            center_x=x,
            center_yp=y[:-1],
            h0=ref.rho,
            strategy=plan.strategy,
            scale=plan.scale,
            vertical_scale=plan.vertical_scale,
        )

    def _axis_scales(self) -> np.ndarray:
        # x' and y' scale like sqrt(rho); x_n like rho.
        root = np.sqrt(self.h0) * self.scale
        n = self.n
        scales = np.full(2 * n - 1, root)
        scales[n - 1] = self.h0 * self.scale
        return scales

    def draw(self, rng: np.random.Generator, start: int, size: int, total: int) -> ChunkDraw:
        n = self.n
        nh = 2 * n - 1
        scales = self._axis_scales()

        if self.strategy == "importance-exponential":
            u = rng.laplace(size=(size, nh))
            inv_axes = 2.0 * np.exp(np.abs(u))
        else:
            u = rng.standard_cauchy(size=(size, nh))
            if self.strategy == "stratified-grid":
                # One sample per stratum of the x_n marginal, by global index.
                idx = start + np.arange(size, dtype=float)
                strata = (idx + rng.random(size)) / float(total)
                u[:, n - 1] = np.tan(np.pi * (strata - 0.5))
            inv_axes = np.pi * (1.0 + u * u)

        t = rng.standard_t(STUDENT_DF, size=size)
        shift = self.vertical_scale * t
        valid = np.abs(shift) <= LOG_HEIGHT_WINDOW
        t = np.where(valid, t, 0.0)
        shift = np.where(valid, shift, 0.0)
        h = self.h0 * np.exp(shift)
        inv_h = self.vertical_scale * h / stats.t.pdf(t, STUDENT_DF)

        x = self.center_x + scales[:n] * u[:, :n]
        yp = self.center_yp + scales[n:] * u[:, n:]
        y = np.concatenate([yp, (np.sum(yp * yp, axis=-1) + h)[:, None]], axis=-1)
        inv_density = np.prod(scales * inv_axes, axis=-1) * inv_h
        return ChunkDraw(x=x, y=y, h=h, inv_density=inv_density, valid=valid)
