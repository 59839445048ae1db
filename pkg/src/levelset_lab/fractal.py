"""Level and collision sets of sampled paths and their dimension estimates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, special

from .indices import SetMeasureModel
from .simulate import PathSample, path_rng


@dataclass(frozen=True, eq=False)
class PointSet:
    """Sorted finite subset of ``ambient``; ``eps`` is the extraction resolution."""

    points: np.ndarray
    ambient: Tuple[float, float]
    eps: float = 0.0

    def __post_init__(self):
        p = np.unique(np.asarray(self.points, float).ravel())
        if self.eps > 0 and len(p) > 1:
            keep = np.concatenate([[True], np.diff(p) > self.eps * 1e-9])
            p = p[keep]
        a, b = map(float, self.ambient)
        if not b >= a:
            raise ValueError("ambient interval must satisfy a <= b")
        if len(p) and (p[0] < a - 1e-12 * max(1.0, abs(a)) or p[-1] > b + 1e-12 * max(1.0, abs(b))):
            raise ValueError("points must lie in the ambient interval")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "ambient", (a, b))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

    def intervals(self, width: Optional[float] = None) -> np.ndarray:
        """Union of ``[p - w/2, p + w/2]`` with overlaps merged; ``w`` defaults to ``eps``."""
        if self.empty:
            return np.zeros((0, 2))
        w = self.eps if width is None else width
        lo, hi = self.points - 0.5 * w, self.points + 0.5 * w
        starts = np.concatenate([[True], lo[1:] > hi[:-1]])
        group = np.cumsum(starts) - 1
        out = np.empty((group[-1] + 1, 2))
        out[:, 0] = lo[starts]
        out[:, 1] = np.maximum.reduceat(hi, np.flatnonzero(starts))
        return out

    @classmethod
    def cantor(cls, ratio: float = 1.0 / 3.0, depth: int = 12) -> "PointSet":
        """Left endpoints of the level-``depth`` blocks of the Cantor construction on ``[0, 1]``."""
        m = SetMeasureModel.cantor(ratio=ratio, depth=depth)
        return cls(m.intervals()[:, 0], (0.0, 1.0), ratio ** depth)

    @classmethod
    def dyadic_grid(cls, k: int) -> "PointSet":
        return cls(np.arange(2 ** k + 1) / 2.0 ** k, (0.0, 1.0), 2.0 ** -k)


@dataclass(frozen=True, eq=False)
class DimensionEstimate:
    """Dimension estimate with its per-scale table.

    ``table`` columns: ``(log2 scale, log2 count)`` for box counting, ``(γ, p̂)`` for
    the Hawkes probe. ``interval`` is diagnostic for the probe, not a confidence interval.
    """

    estimate: float
    se: float
    band: Tuple[float, float]
    method: str
    table: np.ndarray
    residual: float = 0.0
    interval: Optional[Tuple[float, float]] = None
    flags: tuple = ()

    def as_dict(self) -> dict:
        d = {"estimate": self.estimate, "se": self.se, "band": list(self.band), "method": self.method,
             "residual": self.residual, "flags": list(self.flags)}
        if self.interval is not None:
            d["interval"] = list(self.interval)
        return d


# -- extraction ---------------------------------------------------------------

def _crossings(times: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Linear-interpolation roots of ``f`` between grid nodes with a strict sign change."""
    s = np.sign(f)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    w = f[idx] / (f[idx] - f[idx + 1])
    return times[idx] + w * (times[idx + 1] - times[idx])


def level_set_times(path: PathSample, target: SetMeasureModel, eps: float) -> PointSet:
    """Grid times with ``dist(X_s, supp D) <= ε``; sign-change roots added for point targets."""
    if not eps > 0:
        raise ValueError("ε must be positive")
    t, x = path.times, path.x
    hits = t[target.distance(x) <= eps]
    if target.kind == "dirac":
        hits = np.concatenate([hits, _crossings(t, x - target.location)])
    elif target.kind == "tabulated":
        hits = np.concatenate([hits] + [_crossings(t, x - a) for a in np.unique(target.atoms)])
    return PointSet(hits, (0.0, path.horizon), path.dt)


def _pair_check(path1: PathSample, path2: PathSample, eps: float):
    if not path1.same_grid(path2):
        raise ValueError("paths must share one time grid")
    if not eps > 0:
        raise ValueError("ε must be positive")


def _collision_index(path1: PathSample, path2: PathSample, eps: float):
    t = path1.times
    diff = path1.x - path2.x
    near = np.flatnonzero(np.abs(diff) <= eps)
    s = np.sign(diff)
    cross = np.flatnonzero(s[:-1] * s[1:] < 0)
    w = diff[cross] / (diff[cross] - diff[cross + 1])
    return t, near, cross, w


def collision_times(path1: PathSample, path2: PathSample, eps: float) -> PointSet:
    """Times with ``|X¹_t - X²_t| <= ε`` plus interpolated sign changes of the difference."""
    _pair_check(path1, path2, eps)
    t, near, cross, w = _collision_index(path1, path2, eps)
    roots = t[cross] + w * path1.dt
    return PointSet(np.concatenate([t[near], roots]), (0.0, path1.horizon), path1.dt)


def collision_locations(path1: PathSample, path2: PathSample, eps: float,
                        ambient: Optional[Tuple[float, float]] = None) -> PointSet:
    """Midpoints ``(X¹_t + X²_t)/2`` at the collision times."""
    _pair_check(path1, path2, eps)
    t, near, cross, w = _collision_index(path1, path2, eps)
    mid = 0.5 * (path1.x + path2.x)
    loc = np.concatenate([mid[near], mid[cross] + w * (mid[cross + 1] - mid[cross])])
    if ambient is None:
        ambient = (float(loc.min()), float(loc.max())) if len(loc) else (0.0, 0.0)
    return PointSet(loc, ambient, eps)


# -- box counting ----------------------------------------------------------------

def box_counts(points: np.ndarray, ambient: Tuple[float, float], ks: Sequence[int]) -> np.ndarray:
    """Occupied dyadic boxes of side ``L 2^{-k}`` in the ambient interval."""
    a, b = ambient
    L = b - a
    if L <= 0:
        return np.ones(len(ks), dtype=np.int64) * (1 if len(points) else 0)
    u = (np.asarray(points, float) - a) / L
    out = []
    for k in ks:
        cells = np.minimum(np.floor(u * 2.0 ** k), 2.0 ** k - 1)
        out.append(len(np.unique(cells)))
    return np.array(out, dtype=np.int64)


def default_k_range(ps: PointSet) -> Tuple[int, int]:
    """``0`` up to the finest dyadic scale above the extraction resolution."""
    L = ps.ambient[1] - ps.ambient[0]
    if L <= 0 or ps.eps <= 0:
        return (0, 20)
    return (0, max(0, int(math.floor(math.log2(L / ps.eps)))))


def box_counting_dim(ps: PointSet, k_range: Optional[Tuple[int, int]] = None, trim: int = 2,
                     ambient_dim: float = 1.0) -> DimensionEstimate:
    """Slope of ``log2 N_k`` against ``k``, excluding ``trim`` octaves at each end of ``k_range``."""
    if ps.empty:
        raise ValueError("cannot box-count an empty set")
    k0, k1 = default_k_range(ps) if k_range is None else k_range
    ks = np.arange(k0, k1 + 1)
    counts = box_counts(ps.points, ps.ambient, ks)
    band = ks[trim: len(ks) - trim] if len(ks) > 2 * trim else ks[:0]
    if len(band) < 4:
        raise ValueError(f"need at least 4 scales in the regression band, got {len(band)}")
    y = np.log2(counts[trim: trim + len(band)].astype(float))
    A = np.column_stack([band, np.ones(len(band))])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(band) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = math.sqrt(s2 / float(np.sum((band - band.mean()) ** 2)))
    slope = float(coef[0])
    est = min(max(slope, 0.0), ambient_dim)
    table = np.column_stack([-ks.astype(float), np.log2(np.maximum(counts, 1).astype(float))])
    return DimensionEstimate(est, se, (int(band[0]), int(band[-1])), "box-counting", table,
                             float(np.max(np.abs(resid))) if len(resid) else 0.0)


# -- Hawkes probe --------------------------------------------------------------------

def subordinator_hits(intervals: np.ndarray, start: float, gamma: float, M: int,
                      rng: np.random.Generator, max_iter: int = 100000) -> np.ndarray:
    """Whether the range of ``start + T^γ`` meets a union of disjoint sorted intervals.

    Exact in law: the crossing of each level ``l`` from ``u`` has pre-jump position
    ``u + (l-u)·Beta(γ, 1-γ)`` and a Pareto jump past ``l``. A jump over an interval is
    a miss; ``T^γ`` does not creep, so a landing is the only way to meet an interval.
    """
    lo, hi = intervals[:, 0], intervals[:, 1]
    pos = np.full(M, float(start))
    hit = np.zeros(M, dtype=bool)
    active = np.ones(M, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if len(idx) == 0:
            break
        u = pos[idx]
        # first interval ending at or after u; a start inside an interval is a hit
        j = np.searchsorted(hi, u, side="left")
        gone = j >= len(lo)
        inside = ~gone & (lo[np.minimum(j, len(lo) - 1)] <= u)
        hit[idx[inside]] = True
        active[idx[gone | inside]] = False
        keep = ~(gone | inside)
        idx, u, j = idx[keep], u[keep], j[keep]
        if len(idx) == 0:
            break
        level = lo[j]
        gap = level - u
        under = rng.beta(gamma, 1.0 - gamma, len(idx))
        over = rng.uniform(0.0, 1.0, len(idx)) ** (-1.0 / gamma)
        landing = level + gap * (1.0 - under) * (over - 1.0)
        pos[idx] = landing
    else:
        raise RuntimeError("subordinator hit test did not terminate")
    return hit


def hull_hit_probability(start: float, left: float, right: float, gamma: float) -> float:
    """``P(start + T^γ`` lands in ``[left, right])`` for ``start < left``, by quadrature over the undershoot."""
    if right < left:
        return 0.0
    if start >= left:
        return 1.0 if start <= right else 0.0
    R = (right - left) / (left - start)
    # landing = left + (left - start)(1 - B)(U^{-1/γ} - 1), B ~ Beta(γ, 1-γ)
    f = lambda b: 1.0 - (1.0 + R / (1.0 - b)) ** (-gamma) if b < 1.0 else 1.0
    val = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(gamma - 1.0, -gamma))[0]
    return float(val / special.beta(gamma, 1.0 - gamma))


def monotone_violations(p: np.ndarray, se: np.ndarray, n_se: float = 3.0) -> list:
    """Pairs ``i < j`` where ``p[i]`` exceeds ``p[j]`` by more than ``n_se`` combined standard errors."""
    gap = p[:, None] - p[None, :] - n_se * np.sqrt(se[:, None] ** 2 + se[None, :] ** 2)
    i, j = np.nonzero(np.triu(gap > 0, k=1))
    return list(zip(i.tolist(), j.tolist()))


def _as_intervals(target: Union[PointSet, SetMeasureModel, np.ndarray]) -> np.ndarray:
    if isinstance(target, PointSet):
        return target.intervals()
    if isinstance(target, SetMeasureModel):
        return target.intervals()
    iv = np.asarray(target, float).reshape(-1, 2)
    return iv[np.argsort(iv[:, 0])]


def hawkes_probe_dim(target: Union[PointSet, SetMeasureModel, np.ndarray], gamma_grid: Optional[Sequence[float]] = None,
                     M: int = 400, seed: int = 0, threshold: float = 0.5, margin: float = 0.01) -> DimensionEstimate:
    """Dimension from the hit probability of independent γ-stable subordinator ranges.

    The subordinator starts at the leftmost point ``a`` of the set and the target
    is the part of the set beyond ``a + margin·span``, so the start itself is not
    counted. ``p̂(γ)`` is the hit frequency divided by the exact probability of
    landing in the target's convex hull, so a full interval saturates at 1.
    ``p̂`` rises with γ; the estimate is ``1 - γ_c`` at the ``threshold`` crossing,
    and ``interval`` is ``[1 - γ⁺, 1 - γ⁻]`` from the grid points bracketing it.
    """
    gamma_grid = np.linspace(0.02, 0.98, 49) if gamma_grid is None else np.asarray(gamma_grid, float)
    iv = _as_intervals(target)
    if len(iv) == 0:
        table = np.column_stack([gamma_grid, np.zeros_like(gamma_grid)])
        return DimensionEstimate(0.0, 0.0, (float(gamma_grid[0]), float(gamma_grid[-1])), "hawkes-probe", table,
                                 interval=(0.0, 0.0), flags=("degenerate",))
    a, b = float(iv[0, 0]), float(iv[-1, 1])
    cut = a + margin * (b - a)
    far = iv[iv[:, 1] >= cut].copy()
    far[:, 0] = np.maximum(far[:, 0], cut)

    p = np.empty(len(gamma_grid))
    hull = np.empty(len(gamma_grid))
    for i, g in enumerate(gamma_grid):
        rng = path_rng(seed, i)
        hull[i] = hull_hit_probability(a, cut, b, float(g))
        p[i] = min(subordinator_hits(far, a, float(g), M, rng).mean() / hull[i], 1.0) if hull[i] > 0 else 0.0
    f = p * hull
    se = np.sqrt(np.maximum(f * (1 - f), 1.0 / M) / M) / np.maximum(hull, 1e-300)
    table = np.column_stack([gamma_grid, p])

    flags = []
    if monotone_violations(p, se):
        flags.append("monotonicity-violation")

    above = p >= threshold
    if not above.any():
        g_c, g_minus, g_plus = 1.0, float(gamma_grid[-1]), 1.0
    elif above.all():
        g_c, g_minus, g_plus = 0.0, 0.0, float(gamma_grid[0])
    else:
        i = int(np.argmax(above))
        if i == 0:
            g_c = float(gamma_grid[0])
        else:
            g0, g1, p0, p1 = gamma_grid[i - 1], gamma_grid[i], p[i - 1], p[i]
            g_c = float(g0 + (threshold - p0) * (g1 - g0) / (p1 - p0))
        below = np.flatnonzero(p < threshold)
        over = np.flatnonzero(p > threshold)
        g_minus = float(gamma_grid[below.max()]) if len(below) else 0.0
        g_plus = float(gamma_grid[over.min()]) if len(over) else 1.0
        if g_minus > g_plus:
            flags.append("widened-interval")
            g_minus, g_plus = g_plus, g_minus
    # standard error from the binomial noise at the crossing and the local slope
    j = int(np.clip(np.searchsorted(gamma_grid, g_c), 1, len(gamma_grid) - 1))
    slope = (p[j] - p[j - 1]) / (gamma_grid[j] - gamma_grid[j - 1])
    est_se = float(math.sqrt(threshold * (1 - threshold) / (M * hull[j])) / slope) if slope > 0 else float("nan")
    est = min(max(1.0 - g_c, 0.0), 1.0)
    return DimensionEstimate(est, est_se, (float(gamma_grid[0]), float(gamma_grid[-1])), "hawkes-probe", table,
                             interval=(1.0 - g_plus, 1.0 - g_minus), flags=tuple(flags))
