"""
r-lattices of T_B over truncated regions.

A lattice is built greedily over a scrambled Halton sweep of the region in
(x, y', log h) coordinates: a candidate is accepted iff its Bergman distance to
every accepted point is >= r/2. Separation is tested on
Q = rho(z) rho(w) / |rho(z, w)|^2, since beta >= r/2 iff Q <= sech^2(r/2).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import IO, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.stats import qmc

from .errors import HypothesisError, MeasureLoadError
from .geometry import (
    TubePoint,
    arrays_to_points,
    beta_radicand_xy,
    points_to_arrays,
    require_interior,
    rho_pair_xy,
    rho_xy,
)
from .models import Region

logger = logging.getLogger("bergman-tube")

PROBE_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable r-lattice; x and y are (K, n) arrays in acceptance order."""

    r: float
    n: int
    x: np.ndarray
    y: np.ndarray
    overlap_stat: int
    separation_ok: bool
    region: Optional[Region] = None
    probe_density: int = 0
    seed: int = 0

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def points(self) -> List[TubePoint]:
        return arrays_to_points(self.x, self.y) if len(self) else []

    @property
    def rho(self) -> np.ndarray:
        return rho_xy(self.y)

    @classmethod
    def from_points(cls, points: Sequence[TubePoint], r: float, region: Optional[Region] = None) -> "Lattice":
        """Wrap given points (e.g. a hand-built or loaded set) and check their separation."""
        if points:
            require_interior(*points)
            x, y = points_to_arrays(points)
            n = x.shape[1]
        else:
            n = 1
            x, y = np.zeros((0, 1)), np.zeros((0, 1))
        return cls(
            r=r,
            n=n,
            x=x,
            y=y,
            overlap_stat=_overlap(x, y, x, y, r) if len(x) else 0,
            separation_ok=min_separation(x, y) >= r / 2.0 - 1e-12,
            region=region,
        )


class CoveringReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    covered_fraction: float
    worst_gap: float
    probe_count: int
    excluded: int


class SeparatedSumReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    sum: float
    bound_ratio: float


def _q_to(x: np.ndarray, y: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """rho(p) rho(a) / |rho(p, a)|^2 between probes (M, n) and points (K, n): shape (M, K)."""
    pair = rho_pair_xy(px[:, None, :], py[:, None, :], x[None, :, :], y[None, :, :])
    mod2 = np.real(pair) ** 2 + np.imag(pair) ** 2
    return rho_xy(py)[:, None] * rho_xy(y)[None, :] / mod2


def min_separation(x: np.ndarray, y: np.ndarray) -> float:
    """Minimum pairwise Bergman distance; inf for fewer than two points."""
    k = x.shape[0]
    if k < 2:
        return math.inf
    best = 0.0
    for start in range(0, k, PROBE_BLOCK):
        stop = min(k, start + PROBE_BLOCK)
        rad = beta_radicand_xy(x[start:stop, None, :], y[start:stop, None, :], x[None, :, :], y[None, :, :])
        idx = np.arange(start, stop)
        rad[idx - start, idx] = np.inf
        best = max(best, float(np.max(1.0 - rad)))  # largest Q = closest pair
    # Q = 1 - tanh^2(beta)
    radicand = 1.0 - best
    return float(np.arctanh(np.sqrt(max(radicand, 0.0))))


def _overlap(x: np.ndarray, y: np.ndarray, px: np.ndarray, py: np.ndarray, r: float) -> int:
    """Max over probes of #{k : beta(probe, a_k) < 2r}."""
    if x.shape[0] == 0 or px.shape[0] == 0:
        return 0
    q_min = 1.0 - math.tanh(2.0 * r) ** 2
    worst = 0
    for start in range(0, px.shape[0], PROBE_BLOCK):
        q = _q_to(x, y, px[start : start + PROBE_BLOCK], py[start : start + PROBE_BLOCK])
        worst = max(worst, int(np.max(np.sum(q > q_min, axis=1))))
    return worst


def region_log_volume(region: Region, n: int) -> float:
    """Volume of the region's sweep box in (x, y', log h)."""
    return (2.0 * region.x_bound) ** n * (2.0 * region.yprime_bound) ** (n - 1) * math.log(region.h_max / region.h_min)


def region_candidates(region: Region, n: int, count: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Scrambled Halton sweep of the region in (x, y', log h), as (count, n) arrays."""
    if count < 1:
        raise HypothesisError(f"probe density must be >= 1, got {count}")
    sampler = qmc.Halton(d=2 * n, scramble=True, seed=seed)
    u = sampler.random(count)
    x = (2.0 * u[:, :n] - 1.0) * region.x_bound
    yp = (2.0 * u[:, n : 2 * n - 1] - 1.0) * region.yprime_bound
    log_lo, log_hi = math.log(region.h_min), math.log(region.h_max)
    h = np.exp(log_lo + u[:, -1] * (log_hi - log_lo))
    y = np.concatenate([yp, (np.sum(yp * yp, axis=-1) + h)[:, None]], axis=-1)
    return x, y


def _greedy(
    cand_x: np.ndarray,
    cand_y: np.ndarray,
    r: float,
    seed_x: Optional[np.ndarray] = None,
    seed_y: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    n = cand_x.shape[1]
    capacity = max(64, cand_x.shape[0] // 8)
    acc_x = np.empty((capacity, n))
    acc_y = np.empty((capacity, n))
    count = 0
    if seed_x is not None and seed_x.shape[0]:
        count = seed_x.shape[0]
        capacity = max(capacity, 2 * count)
        acc_x = np.empty((capacity, n))
        acc_y = np.empty((capacity, n))
        acc_x[:count] = seed_x
        acc_y[:count] = seed_y
    q_sep = 1.0 / math.cosh(r / 2.0) ** 2
    cand_rho = rho_xy(cand_y)
    for i in range(cand_x.shape[0]):
        cx, cy = cand_x[i], cand_y[i]
        if count:
            pair = rho_pair_xy(cx, cy, acc_x[:count], acc_y[:count])
            mod2 = np.real(pair) ** 2 + np.imag(pair) ** 2
            q = cand_rho[i] * rho_xy(acc_y[:count]) / mod2
            if np.any(q > q_sep):
                continue
        if count == capacity:
            capacity *= 2
            acc_x = np.resize(acc_x, (capacity, n))
            acc_y = np.resize(acc_y, (capacity, n))
        acc_x[count] = cx
        acc_y[count] = cy
        count += 1
    return acc_x[:count].copy(), acc_y[:count].copy()


def generate_lattice(region: Region, r: float, probe_density: int, seed: int, *, n: int = 1) -> Lattice:
    """Greedy maximal r/2-separated set over the region's candidate sweep."""
    if not 0 < r <= 1:
        raise HypothesisError(f"lattice radius must satisfy 0 < r <= 1, got r={r:g}")
    cand_x, cand_y = region_candidates(region, n, probe_density, seed)
    x, y = _greedy(cand_x, cand_y, r)
    overlap = _overlap(x, y, cand_x, cand_y, r)
    separation = min_separation(x, y)
    logger.info("lattice r=%g n=%d: %d points from %d candidates, overlap=%d", r, n, len(x), probe_density, overlap)
    return Lattice(
        r=r,
        n=n,
        x=x,
        y=y,
        overlap_stat=overlap,
        separation_ok=separation >= r / 2.0 - 1e-12,
        region=region,
        probe_density=probe_density,
        seed=seed,
    )


def extend_lattice(lat: Lattice, region: Region) -> Lattice:
    """
    Continue the greedy sweep into a larger region.

    Original points keep their order; only candidates outside the original
    region are considered, at the same sweep density in (x, y', log h).
    """
    if lat.region is None:
        raise HypothesisError("extend_lattice needs a lattice generated over a region")
    old = lat.region
    if not (
        region.x_bound >= old.x_bound
        and region.yprime_bound >= old.yprime_bound
        and region.h_min <= old.h_min
        and region.h_max >= old.h_max
    ):
        raise HypothesisError("extension region must contain the lattice's region")
    n = lat.n
    count = max(1, int(round(lat.probe_density * region_log_volume(region, n) / region_log_volume(old, n))))
    cand_x, cand_y = region_candidates(region, n, count, lat.seed)
    outside = ~old.contains_xy(cand_x, cand_y)
    x, y = _greedy(cand_x[outside], cand_y[outside], lat.r, lat.x, lat.y)
    overlap = _overlap(x, y, cand_x, cand_y, lat.r)
    return Lattice(
        r=lat.r,
        n=n,
        x=x,
        y=y,
        overlap_stat=overlap,
        separation_ok=min_separation(x, y) >= lat.r / 2.0 - 1e-12,
        region=region,
        probe_density=count,
        seed=lat.seed,
    )


def check_covering(lat: Lattice, probes: Iterable[TubePoint]) -> CoveringReport:
    """Fraction of in-region probes within beta-distance r of the lattice, and the worst gap."""
    pts = list(probes)
    if not pts:
        return CoveringReport(covered_fraction=1.0, worst_gap=0.0, probe_count=0, excluded=0)
    px, py = points_to_arrays(pts)
    return check_covering_xy(lat, px, py)


def check_covering_xy(lat: Lattice, px: np.ndarray, py: np.ndarray) -> CoveringReport:
    total = px.shape[0]
    if lat.region is not None:
        inside = lat.region.contains_xy(px, py)
        px, py = px[inside], py[inside]
    excluded = total - px.shape[0]
    if px.shape[0] == 0:
        return CoveringReport(covered_fraction=1.0, worst_gap=0.0, probe_count=0, excluded=excluded)
    if len(lat) == 0:
        return CoveringReport(covered_fraction=0.0, worst_gap=math.inf, probe_count=px.shape[0], excluded=excluded)
    best_q = np.empty(px.shape[0])
    for start in range(0, px.shape[0], PROBE_BLOCK):
        q = _q_to(lat.x, lat.y, px[start : start + PROBE_BLOCK], py[start : start + PROBE_BLOCK])
        best_q[start : start + PROBE_BLOCK] = np.max(q, axis=1)
    radicand = np.clip(1.0 - best_q, 0.0, None)
    radicand = np.where(radicand < 1e-15, 0.0, radicand)
    with np.errstate(divide="ignore"):
        gaps = np.arctanh(np.sqrt(radicand))
    covered = float(np.mean(gaps < lat.r))
    return CoveringReport(
        covered_fraction=covered,
        worst_gap=float(np.max(gaps)),
        probe_count=int(px.shape[0]),
        excluded=int(excluded),
    )


def region_probes(region: Region, n: int, count: int, seed: int) -> List[TubePoint]:
    """Low-discrepancy probe points of a region (an independent scramble of the sweep)."""
    x, y = region_candidates(region, n, count, seed)
    return arrays_to_points(x, y)


def separated_sum_check(lat: Lattice, t: float, s: float, z: TubePoint) -> SeparatedSumReport:
    """sum_k rho(a_k)^t / |rho(z, a_k)|^s and its ratio to rho(z)^{t-s}."""
    require_interior(z)
    n = z.n
    if not (t > n and s > t):
        raise HypothesisError(f"requires n < t < s, got n={n}, t={t:g}, s={s:g}")
    if len(lat) == 0:
        return SeparatedSumReport(sum=0.0, bound_ratio=0.0)
    if not lat.separation_ok:
        raise HypothesisError("separated sums need a separated lattice")
    zx, zy = z.arrays()
    terms = lat.rho**t / np.abs(rho_pair_xy(zx, zy, lat.x, lat.y)) ** s
    total = float(np.sum(terms))
    return SeparatedSumReport(sum=total, bound_ratio=total * z.rho ** (s - t))


def overlap_bound(n: int, r: float) -> float:
    """
    Packing bound on the 2r-ball multiplicity of an r/2-separated set.

    The invariant volume of D(., R) is proportional to sinh(R)^{2n}. The
    disjoint balls D(a_k, r/4) with beta(probe, a_k) < 2r all lie in D(probe, 9r/4).
    """
    return (math.sinh(9.0 * r / 4.0) / math.sinh(r / 4.0)) ** (2 * n)


def overlap_consistent(small: Lattice, large: Lattice, *, tolerance: float = 0.25) -> bool:
    """Both overlaps within the packing bound and within `tolerance` of each other."""
    bound = overlap_bound(small.n, small.r)
    if small.overlap_stat > bound or large.overlap_stat > bound:
        return False
    top = max(small.overlap_stat, large.overlap_stat)
    if top == 0:
        return True
    return abs(large.overlap_stat - small.overlap_stat) / top <= tolerance


# --- CSV --------------------------------------------------------------------


def write_lattice_csv(lat: Lattice, handle: IO[str]) -> None:
    """One row per point (x_1..x_n, y_1..y_n) under '#' comment header lines."""
    handle.write(f"# r={lat.r!r}\n")
    handle.write(f"# n={lat.n}\n")
    if lat.region is not None:
        for key, value in lat.region.header().items():
            handle.write(f"# {key}={value!r}\n")
    handle.write(f"# overlap_stat={lat.overlap_stat}\n")
    handle.write(f"# separation_ok={str(lat.separation_ok).lower()}\n")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow([f"x_{j + 1}" for j in range(lat.n)] + [f"y_{j + 1}" for j in range(lat.n)])
    for xi, yi in zip(lat.x, lat.y):
        writer.writerow([repr(float(v)) for v in xi] + [repr(float(v)) for v in yi])


def read_lattice_csv(handle: IO[str]) -> Lattice:
    """Inverse of write_lattice_csv; separation and overlap are recomputed."""
    meta = {}
    rows = []
    for line in handle:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key.strip()] = value.strip()
            continue
        rows.append(line)
    if "r" not in meta:
        raise MeasureLoadError("lattice CSV is missing the '# r=' header")
    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None:
        raise MeasureLoadError("lattice CSV has no column header")
    n = len(header) // 2
    points = []
    for i, row in enumerate(reader):
        try:
            vals = [float(v) for v in row]
        except ValueError as e:
            raise MeasureLoadError(f"lattice CSV row {i + 1}: {e}") from e
        if len(vals) != 2 * n:
            raise MeasureLoadError(f"lattice CSV row {i + 1}: expected {2 * n} columns, got {len(vals)}")
        points.append(TubePoint.from_arrays(vals[:n], vals[n:]))
    region = None
    if all(k in meta for k in ("x_bound", "yprime_bound", "h_min", "h_max")):
        region = Region(**{k: float(meta[k]) for k in ("x_bound", "yprime_bound", "h_min", "h_max")})
    return Lattice.from_points(points, float(meta["r"]), region=region)
