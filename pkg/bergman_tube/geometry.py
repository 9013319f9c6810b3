"""
Pointwise geometry of the tube T_B = {x + iy in C^n : y_n > |y'|^2}.

Points are stored as real vectors (x, y). Every function has a vectorized
`*_xy` form working on (..., n) arrays; the TubePoint forms wrap them.
"""

from __future__ import annotations

import logging
from typing import Iterable, Iterator, List, Literal, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import BergmanTubeError, BoundaryPointError, BranchCutError, DimensionMismatchError

logger = logging.getLogger("bergman-tube")

# Radicands of beta below this are treated as the diagonal.
DIAGONAL_RADICAND = 1e-15
# Radicand excursions below zero tolerated as round-off.
RADICAND_SLACK = 1e-12


class TubePoint(BaseModel):
    """A point z = x + iy of the closure of T_B."""

    model_config = ConfigDict(frozen=True)

    x: Tuple[float, ...]
    y: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "TubePoint":
        if len(self.x) < 1:
            raise ValueError("TubePoint needs n >= 1")
        if len(self.x) != len(self.y):
            raise ValueError(f"x and y must have equal length, got {len(self.x)} and {len(self.y)}")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise ValueError("TubePoint coordinates must be finite")
        return self

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def rho(self) -> float:
        return float(rho_xy(np.asarray(self.y)))

    @property
    def is_interior(self) -> bool:
        return self.rho > 0.0

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.x, dtype=float), np.asarray(self.y, dtype=float)

    def complex_vector(self) -> np.ndarray:
        x, y = self.arrays()
        return x + 1j * y

    @classmethod
    def from_arrays(cls, x: Sequence[float], y: Sequence[float]) -> "TubePoint":
        return cls(x=tuple(float(v) for v in x), y=tuple(float(v) for v in y))

    @classmethod
    def from_complex(cls, w: Sequence[complex]) -> "TubePoint":
        w = np.asarray(w, dtype=complex)
        return cls.from_arrays(w.real, w.imag)


class BallPoint(BaseModel):
    """A point of the unit ball of C^n, stored as real and imaginary parts."""

    model_config = ConfigDict(frozen=True)

    re: Tuple[float, ...]
    im: Tuple[float, ...]

    @model_validator(mode="after")
    def _check_norm(self) -> "BallPoint":
        if len(self.re) < 1 or len(self.re) != len(self.im):
            raise ValueError("BallPoint needs matching re/im of length n >= 1")
        if not np.sum(np.square(self.re)) + np.sum(np.square(self.im)) < 1.0:
            raise ValueError("BallPoint must satisfy |w| < 1")
        return self

    @property
    def n(self) -> int:
        return len(self.re)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.re, dtype=float) + 1j * np.asarray(self.im, dtype=float)

    @classmethod
    def from_complex(cls, w: Sequence[complex]) -> "BallPoint":
        w = np.asarray(w, dtype=complex)
        return cls(re=tuple(float(v) for v in w.real), im=tuple(float(v) for v in w.imag))


class BergmanBall(BaseModel):
    """D(center, radius) in the Bergman metric."""

    model_config = ConfigDict(frozen=True)

    center: TubePoint
    radius: float = Field(gt=0.0)

    @field_validator("center")
    @classmethod
    def _interior_center(cls, v: TubePoint) -> TubePoint:
        if not v.is_interior:
            raise ValueError("BergmanBall center must be an interior point")
        return v


PathKind = Literal["vertical-down", "vertical-up", "horizontal"]
PATH_KINDS: Tuple[PathKind, ...] = ("vertical-down", "vertical-up", "horizontal")


class BoundaryPath(BaseModel):
    """A sequence of interior points approaching the boundary of T_B or infinity."""

    model_config = ConfigDict(frozen=True)

    kind: PathKind
    n: int = Field(default=1, ge=1)
    parameters: Tuple[float, ...] = (1.0, 10.0, 100.0, 1000.0)

    @field_validator("parameters")
    @classmethod
    def _monotone(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if not v:
            raise ValueError("BoundaryPath needs at least one parameter")
        arr = np.asarray(v, dtype=float)
        if np.any(arr < 1.0) or np.any(np.diff(arr) <= 0):
            raise ValueError("BoundaryPath parameters must be strictly increasing and >= 1")
        return v

    def points(self) -> Iterator[Tuple[float, TubePoint]]:
        for k in self.parameters:
            yield k, boundary_sequence(self, k)


# --- vectorized primitives -------------------------------------------------


def rho_xy(y: np.ndarray) -> np.ndarray:
    """y_n - |y'|^2 over the last axis."""
    y = np.asarray(y, dtype=float)
    yp = y[..., :-1]
    return y[..., -1] - np.sum(yp * yp, axis=-1)


def rho_pair_xy(zx: np.ndarray, zy: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """rho(z, w) = 1/4 ((z' - conj w')^2 - 2i (z_n - conj w_n)), bilinear square."""
    d = (np.asarray(zx, dtype=float) - np.asarray(wx, dtype=float)) + 1j * (
        np.asarray(zy, dtype=float) + np.asarray(wy, dtype=float)
    )
    dp = d[..., :-1]
    return 0.25 * (np.sum(dp * dp, axis=-1) - 2j * d[..., -1])


def check_branch(values: np.ndarray) -> None:
    """Guard every principal-branch power: Re rho(z, w) must be positive."""
    re = np.real(values)
    if not np.all(re > 0.0):
        bad = int(np.count_nonzero(~(re > 0.0)))
        raise BranchCutError(f"Re rho(z, w) <= 0 at {bad} point(s); inputs are outside T_B")


def principal_power(base: np.ndarray, exponent: float) -> np.ndarray:
    """base**exponent on the principal branch, after the branch guard."""
    base = np.asarray(base, dtype=complex)
    check_branch(base)
    return np.power(base, exponent)


def abs_power(base: np.ndarray, exponent: float) -> np.ndarray:
    """|base|**exponent after the branch guard."""
    base = np.asarray(base, dtype=complex)
    check_branch(base)
    return np.power(np.abs(base), exponent)


def beta_radicand_xy(zx: np.ndarray, zy: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """1 - rho(z) rho(w) / |rho(z, w)|^2, clipped to [0, 1) after the round-off check."""
    rz = rho_xy(zy)
    rw = rho_xy(wy)
    pair = rho_pair_xy(zx, zy, wx, wy)
    mod2 = np.real(pair) ** 2 + np.imag(pair) ** 2
    radicand = 1.0 - rz * rw / mod2
    if np.any(radicand < -RADICAND_SLACK) or np.any(radicand > 1.0):
        raise BergmanTubeError("internal: Bergman metric radicand left [0, 1)")
    return np.where(radicand < DIAGONAL_RADICAND, 0.0, radicand)


def bergman_distance_xy(zx: np.ndarray, zy: np.ndarray, wx: np.ndarray, wy: np.ndarray) -> np.ndarray:
    """beta(z, w) = artanh sqrt(1 - rho(z) rho(w) / |rho(z, w)|^2), broadcasting; inf past double range."""
    with np.errstate(divide="ignore"):
        return np.arctanh(np.sqrt(beta_radicand_xy(zx, zy, wx, wy)))


def within_distance_xy(
    zx: np.ndarray, zy: np.ndarray, wx: np.ndarray, wy: np.ndarray, radius: float
) -> np.ndarray:
    """beta(z, w) < radius, compared on the radicand to avoid artanh."""
    return beta_radicand_xy(zx, zy, wx, wy) < np.tanh(radius) ** 2


# --- point operations ------------------------------------------------------


def require_interior(*points: TubePoint) -> None:
    for z in points:
        if not z.is_interior:
            raise BoundaryPointError(f"operation requires an interior point, got rho={z.rho!r}")


def require_same_dimension(*points: TubePoint) -> int:
    dims = {z.n for z in points}
    if len(dims) != 1:
        raise DimensionMismatchError(f"points have different dimensions: {sorted(dims)}")
    return dims.pop()


def rho_pair(z: TubePoint, w: TubePoint) -> complex:
    require_same_dimension(z, w)
    zx, zy = z.arrays()
    wx, wy = w.arrays()
    return complex(rho_pair_xy(zx, zy, wx, wy))


def rho(z: TubePoint) -> float:
    return z.rho


def bergman_distance(z: TubePoint, w: TubePoint) -> float:
    require_same_dimension(z, w)
    require_interior(z, w)
    zx, zy = z.arrays()
    wx, wy = w.arrays()
    return float(bergman_distance_xy(zx, zy, wx, wy))


def in_ball(z: TubePoint, ball: BergmanBall) -> bool:
    require_same_dimension(z, ball.center)
    require_interior(z)
    return bergman_distance(z, ball.center) < ball.radius


def cayley(b: BallPoint) -> TubePoint:
    """Phi(b) = (sqrt2 b'/(1+b_n), i(1-b_n)/(1+b_n) - i b'.b'/(1+b_n)^2)."""
    w = b.w
    bp, bn = w[:-1], w[-1]
    denom = 1.0 + bn
    zp = np.sqrt(2.0) * bp / denom
    zn = 1j * (1.0 - bn) / denom - 1j * np.sum(bp * bp) / denom**2
    z = TubePoint.from_complex(np.append(zp, zn))
    if not z.is_interior:
        raise BoundaryPointError("cayley image left T_B (|b| too close to 1 for double precision)")
    return z


def inverse_cayley(z: TubePoint) -> BallPoint:
    """Phi^{-1}(w) = (sqrt2 i w'/D, (i - w_n - (i/2) w'.w')/D), D = i + w_n + (i/2) w'.w'."""
    require_interior(z)
    w = z.complex_vector()
    wp, wn = w[:-1], w[-1]
    sq = np.sum(wp * wp)
    denom = 1j + wn + 0.5j * sq
    bp = np.sqrt(2.0) * 1j * wp / denom
    bn = (1j - wn - 0.5j * sq) / denom
    return BallPoint.from_complex(np.append(bp, bn))


def ball_metric_distance(a: BallPoint, b: BallPoint) -> float:
    """artanh |phi_a(b)| with the involutive automorphism phi_a of the ball."""
    if a.n != b.n:
        raise DimensionMismatchError(f"ball points have different dimensions: {a.n} and {b.n}")
    av, bv = a.w, b.w
    aa = float(np.real(np.vdot(av, av)))
    if aa == 0.0:
        phi = -bv
    else:
        ba = np.vdot(av, bv)  # <b, a>
        proj = (ba / aa) * av
        s_a = np.sqrt(1.0 - aa)
        phi = (av - proj - s_a * (bv - proj)) / (1.0 - ba)
    return float(np.arctanh(min(np.linalg.norm(phi), np.nextafter(1.0, 0.0))))


def axis_point(h: float, n: int = 1) -> TubePoint:
    """(0', i h): the point on the vertical axis with rho = h."""
    y = [0.0] * n
    y[-1] = float(h)
    return TubePoint(x=tuple([0.0] * n), y=tuple(y))


def boundary_sequence(path: BoundaryPath, k: float) -> TubePoint:
    """Evaluate a boundary path at parameter k >= 1."""
    if k < 1:
        raise ValueError(f"path parameter must be >= 1, got {k}")
    n = path.n
    if path.kind == "vertical-down":
        return axis_point(1.0 / k, n)
    if path.kind == "vertical-up":
        return axis_point(float(k), n)
    x = [0.0] * n
    x[0] = float(k)
    y = [0.0] * n
    y[-1] = 1.0
    return TubePoint(x=tuple(x), y=tuple(y))


def heisenberg_translate(z: TubePoint, shift_x: Sequence[float], shift_y: Sequence[float]) -> TubePoint:
    """
    Automorphism z' -> z' + shift_x' + i b, z_n -> z_n + shift_x_n + 2 b.z' + i|b|^2.

    shift_y has length n - 1 (the b above); rho is preserved.
    """
    zx, zy = z.arrays()
    b = np.asarray(shift_y, dtype=float)
    t = np.asarray(shift_x, dtype=float)
    if t.shape != (z.n,) or b.shape != (z.n - 1,):
        raise DimensionMismatchError("shift_x must have length n and shift_y length n - 1")
    w = z.complex_vector()
    wp, wn = w[:-1], w[-1]
    new_n = wn + t[-1] + 2.0 * np.sum(b * wp) + 1j * np.sum(b * b)
    new_p = wp + t[:-1] + 1j * b
    return TubePoint.from_complex(np.append(new_p, new_n))


def dilate(z: TubePoint, t: float) -> TubePoint:
    """delta_t(z', z_n) = (t z', t^2 z_n); rho scales by t^2."""
    if t <= 0:
        raise ValueError("dilation factor must be positive")
    w = z.complex_vector()
    return TubePoint.from_complex(np.append(t * w[:-1], t * t * w[-1]))


def points_to_arrays(points: Iterable[TubePoint]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack TubePoints into (K, n) arrays x, y."""
    pts: List[TubePoint] = list(points)
    if not pts:
        return np.zeros((0, 1)), np.zeros((0, 1))
    n = require_same_dimension(*pts)
    x = np.array([p.x for p in pts], dtype=float).reshape(len(pts), n)
    y = np.array([p.y for p in pts], dtype=float).reshape(len(pts), n)
    return x, y


def arrays_to_points(x: np.ndarray, y: np.ndarray) -> List[TubePoint]:
    return [TubePoint.from_arrays(xi, yi) for xi, yi in zip(np.atleast_2d(x), np.atleast_2d(y))]


def sample_interior_points(
    rng: np.random.Generator,
    count: int,
    n: int,
    *,
    x_spread: float = 2.0,
    yprime_spread: float = 1.0,
    log_h_spread: float = 2.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Random interior points: x, y' uniform in boxes, log h uniform; returns (count, n) arrays."""
    x = rng.uniform(-x_spread, x_spread, size=(count, n))
    yp = rng.uniform(-yprime_spread, yprime_spread, size=(count, n - 1))
    h = np.exp(rng.uniform(-log_h_spread, log_h_spread, size=count))
    y = np.concatenate([yp, (np.sum(yp * yp, axis=-1) + h)[:, None]], axis=-1)
    return x, y
