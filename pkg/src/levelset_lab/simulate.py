"""Seeded samplers for stable subordinators, stable paths and Lévy-type Euler schemes."""
from __future__ import annotations

import csv
import math
import struct
import warnings
from functools import lru_cache
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from .symbol import LevyMeasureModel

BINARY_MAGIC = b"LSLP"
BINARY_VERSION = 1


class HorizonError(ValueError):
    """A subordinator left the time horizon of the path it indexes."""


class ModelError(ValueError):
    """Model data inconsistent with the declared bounds."""


def path_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for path ``index`` under master ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class PathSample:
    """Path on the uniform grid ``t_k = k·dt``, ``k = 0..N``; ``values`` has shape ``(N+1, n)``."""

    dt: float
    values: np.ndarray
    scheme: str
    seed: int = 0
    index: int = 0
    delta_cut: Optional[float] = None
    truncated: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, float)
        if v.ndim == 1:
            v = v[:, None]
        if not self.dt > 0:
            raise ValueError("time step must be positive")
        if v.ndim != 2 or len(v) < 1:
            raise ValueError("values must have shape (N+1, n)")
        if not np.all(np.isfinite(v)):
            raise ValueError("path values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def steps(self) -> int:
        return len(self.values) - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    @property
    def x(self) -> np.ndarray:
        """First coordinate."""
        return self.values[:, 0]

    def same_grid(self, other: "PathSample") -> bool:
        return self.steps == other.steps and self.dt == other.dt


def _check_grid(n_steps: int, horizon: float) -> float:
    if n_steps < 1 or not horizon > 0:
        raise ValueError("need n_steps >= 1 and a positive horizon")
    return horizon / n_steps


# -- exact stable variates -------------------------------------------------------

def positive_stable(gamma: float, size, rng: np.random.Generator) -> np.ndarray:
    """Kanter's representation: ``E exp(-λS) = exp(-λ^γ)``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("γ must lie in (0, 1)")
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = np.sin(gamma * u) / np.sin(u) ** (1.0 / gamma)
    b = (np.sin((1.0 - gamma) * u) / e) ** ((1.0 - gamma) / gamma)
    return a * b


def symmetric_stable(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck: ``E exp(iξX) = exp(-|ξ|^α)``."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError("α must lie in (0, 2]")
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def isotropic_stable(alpha: float, n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Rotation-invariant ``n``-vectors with ``E exp(iξ·X) = exp(-|ξ|^α)``, shape ``(size, n)``."""
    if n == 1:
        return symmetric_stable(alpha, size, rng)[:, None]
    if alpha == 2.0:
        return math.sqrt(2.0) * rng.standard_normal((size, n))
    a = positive_stable(alpha / 2.0, size, rng)
    return np.sqrt(2.0 * a)[:, None] * rng.standard_normal((size, n))


def sample_stable_subordinator(gamma: float, n_steps: int = 1024, horizon: float = 1.0,
                               seed: int = 0, index: int = 0) -> PathSample:
    if not 0.0 < gamma < 1.0:
        raise ValueError("γ must lie in (0, 1)")
    dt = _check_grid(n_steps, horizon)
    rng = path_rng(seed, index)
    inc = dt ** (1.0 / gamma) * positive_stable(gamma, n_steps, rng)
    if np.any(inc <= 0):
        raise AssertionError("nonpositive subordinator increment")
    return PathSample(dt, np.concatenate([[0.0], np.cumsum(inc)]), f"kanter-{gamma:g}", seed, index)


def sample_symmetric_stable(alpha: float, n_steps: int = 1024, horizon: float = 1.0, seed: int = 0,
                            index: int = 0, n: int = 1, x0=0.0) -> PathSample:
    if not 0.0 < alpha < 2.0:
        raise ValueError("α must lie in (0, 2)")
    dt = _check_grid(n_steps, horizon)
    rng = path_rng(seed, index)
    inc = dt ** (1.0 / alpha) * isotropic_stable(alpha, n, n_steps, rng)
    start = np.broadcast_to(np.asarray(x0, float), (1, n))
    values = np.concatenate([start, start + np.cumsum(inc, axis=0)])
    return PathSample(dt, values, f"cms-{alpha:g}", seed, index)


# -- Lévy-type Euler scheme --------------------------------------------------------

@dataclass(frozen=True)
class JumpScheme:
    """Small-jump cutoff and the tail law of ``|h| > δ`` for a one-dimensional kernel."""

    delta: float
    tail_mass: float            # ν(|h| > δ), both signs
    small_variance: float       # ∫_{|h|<=δ} h² μ(dh)
    log_s: np.ndarray           # inverse-CDF table of |h| given |h| > δ
    log_u: np.ndarray
    power: Optional[float] = None  # exact Pareto tail index when the kernel is a pure power

    def draw(self, u: np.ndarray) -> np.ndarray:
        if self.power is not None:
            return self.delta * u ** (-1.0 / self.power)
        return np.exp(np.interp(np.log(u), self.log_u, self.log_s))


def _quad(f, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-10, limit=400)[0]


@lru_cache(maxsize=64)
def jump_scheme(model: LevyMeasureModel, dt: float, envelope: float = 1.0, max_jumps: float = 32.0,
                variance_factor: float = 0.01) -> JumpScheme:
    """Cutoff ``δ`` with ``∫_{|h|<δ} h² μ <= variance_factor·dt^{2/α}`` where affordable.

    When that rule would need more than ``max_jumps`` candidate jumps per step,
    ``δ`` is raised to the affordable value; the Gaussian correction absorbs the rest.
    """
    if model.n != 1:
        raise NotImplementedError("Lévy-type paths are simulated for n = 1")
    k = model.kernel
    alpha = model.alpha
    top = k.support_max

    def small_var(d):
        d = min(d, top)
        if k.alpha is not None:
            return 2.0 * k.weight * d ** (2.0 - k.alpha) / (2.0 - k.alpha)
        # log variable down to e^{-40} d, power-law head below it
        lo = math.log(d) - 40.0
        head = math.exp(3.0 * lo) * k(math.exp(lo)) / (2.0 - alpha)
        return 2.0 * (head + _quad(lambda v: math.exp(3.0 * v) * k(math.exp(v)), lo, math.log(d)))

    def tail(d):
        if d >= top:
            return 0.0
        if k.alpha is not None and not math.isfinite(top):
            return 2.0 * k.weight * d ** (-k.alpha) / k.alpha
        # log variable keeps heavy tails well conditioned; e^200 d is beyond any relevant jump
        upper = min(math.log(top), math.log(d) + 200.0)
        return 2.0 * _quad(lambda v: k(math.exp(v)) * math.exp(v), math.log(d), upper)

    target = variance_factor * dt ** (2.0 / alpha)
    lo, hi = 1e-30, 1.0
    if small_var(hi) <= target:
        d_rule = hi
    else:
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            lo, hi = (mid, hi) if small_var(mid) <= target else (lo, mid)
            if hi / lo < 1.0 + 1e-6:
                break
        d_rule = lo
    # affordable cutoff: envelope · ν(|h|>δ) · dt <= max_jumps
    lo, hi = 1e-30, 1e6
    for _ in range(400):
        mid = math.sqrt(lo * hi)
        lo, hi = (lo, mid) if envelope * tail(mid) * dt <= max_jumps else (mid, hi)
        if hi / lo < 1.0 + 1e-9:
            break
    delta = max(d_rule, hi)
    mass = tail(delta)
    upper = min(top, delta * 1e12)
    ls = np.linspace(math.log(delta), math.log(upper), 4097)
    f = k(np.exp(ls)) * np.exp(ls)
    # survival from the right end: cumulative trapezoid plus the mass beyond the table
    seg = 0.5 * (f[1:] + f[:-1]) * np.diff(ls)
    surv = 2.0 * np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + tail(upper)
    surv = np.clip(surv / surv[0], 1e-300, 1.0) if mass > 0 else np.ones_like(ls)
    order = np.argsort(surv, kind="stable")
    ls, surv = ls[order], surv[order]
    power = k.alpha if (k.alpha is not None and not math.isfinite(top)) else None
    return JumpScheme(delta, mass, small_var(delta), ls, np.log(surv), power)


def sample_levy_type(model: LevyMeasureModel, n_steps: int = 1024, horizon: float = 1.0, seed: int = 0,
                     index: int = 0, x0: float = 0.0, scheme: Optional[JumpScheme] = None,
                     gaussian_correction: bool = True) -> PathSample:
    """Euler scheme for ``a(x)·∇ + ∫(f(x+h)-f(x)-h·∇f 1_{|h|<=1}) m(x,h) μ(dh)``.

    Per step: drift ``a(X)dt``; candidate jumps ``|h| > δ`` from a Poisson clock of
    rate ``c3·ν(|h|>δ)``, kept with probability ``m(X,h)/c3``; compensator of the
    kept jumps in ``δ < |h| <= 1``; Gaussian term for the jumps below ``δ``.
    """
    dt = _check_grid(n_steps, horizon)
    c3 = model.modulation_bounds[1]
    m = model.modulation
    a = model.drift
    if scheme is None:
        scheme = jump_scheme(model, dt, envelope=c3 if m is not None else 1.0)
    rng = path_rng(seed, index)
    lam = (c3 if m is not None else 1.0) * scheme.tail_mass * dt
    sigma2 = scheme.small_variance * dt if gaussian_correction else 0.0
    tag = f"euler-thinning-{model.family}"

    if m is None and a is None:
        counts = rng.poisson(lam, n_steps)
        total = int(counts.sum())
        sizes = scheme.draw(rng.uniform(0.0, 1.0, total)) * rng.choice([-1.0, 1.0], total)
        owner = np.repeat(np.arange(n_steps), counts)
        jumps = np.bincount(owner, weights=sizes, minlength=n_steps)
        inc = jumps + math.sqrt(sigma2) * rng.standard_normal(n_steps)
        return PathSample(dt, x0 + np.concatenate([[0.0], np.cumsum(inc)]), tag, seed, index, scheme.delta)

    k = model.kernel
    gl_x, gl_w = np.polynomial.legendre.leggauss(32)
    lo_c = math.log(scheme.delta)
    hi_c = math.log(min(1.0, k.support_max))

    def compensator(x):
        if m is None or hi_c <= lo_c:
            return 0.0
        v = 0.5 * (hi_c - lo_c) * gl_x + 0.5 * (hi_c + lo_c)
        s = np.exp(v)
        vals = s * s * np.array([m(x, si) - m(x, -si) for si in s]) * k(s)
        return 0.5 * (hi_c - lo_c) * float(gl_w @ vals)

    x = np.empty(n_steps + 1)
    x[0] = x0
    for j in range(n_steps):
        xj = x[j]
        step = 0.0
        if a is not None:
            step += float(np.atleast_1d(a(xj))[0]) * dt
        cnt = rng.poisson(lam)
        if cnt:
            h = scheme.draw(rng.uniform(0.0, 1.0, cnt)) * rng.choice([-1.0, 1.0], cnt)
            if m is not None:
                p = np.array([m(xj, hi) for hi in h]) / c3
                if np.any(p > 1.0 + 1e-12):
                    raise ModelError(f"modulation exceeds envelope c3={c3}: acceptance {p.max():.4g}")
                h = h[rng.uniform(0.0, 1.0, cnt) < p]
            step += float(h.sum())
        step -= compensator(xj) * dt
        if sigma2 > 0.0:
            m0 = 1.0 if m is None else 0.5 * (m(xj, scheme.delta) + m(xj, -scheme.delta))
            step += math.sqrt(sigma2 * m0) * rng.standard_normal()
        x[j + 1] = xj + step
    return PathSample(dt, x, tag, seed, index, scheme.delta)


# -- subordination ----------------------------------------------------------------

def subordinate_path(x_path: PathSample, t_path: PathSample, truncate: bool = False) -> PathSample:
    """``X_{T_t}`` on the grid of ``T`` with left-neighbor lookup of ``X``.

    Raises :class:`HorizonError` when ``T`` leaves the horizon of ``X`` unless
    ``truncate`` is set; then the output stops before the first exit and is flagged.
    """
    T = t_path.x
    idx = np.floor(T / x_path.dt + 1e-12).astype(np.int64)
    out = idx > x_path.steps
    truncated = False
    if np.any(out):
        if not truncate:
            raise HorizonError(f"subordinator reaches {T.max():.4g} beyond horizon {x_path.horizon:.4g}")
        stop = int(np.argmax(out))
        if stop == 0:
            raise HorizonError("subordinator starts beyond the horizon")
        idx = idx[:stop]
        truncated = True
    return PathSample(t_path.dt, x_path.values[idx], f"{x_path.scheme}∘{t_path.scheme}", x_path.seed,
                      x_path.index, x_path.delta_cut, truncated)


def sample_subordinated_stable(alpha: float, gamma: float, n_steps: int = 1024, horizon: float = 1.0,
                               seed: int = 0, index: int = 0, x_dt: Optional[float] = None) -> PathSample:
    """``X_{T_t}`` for independent symmetric α-stable ``X`` and γ-stable ``T``.

    ``X`` is realized lazily on the grid ``x_dt·ℕ`` (default: output step / 2^20),
    only at the left neighbors of the visited times, using exact stable
    increments between them; no horizon is needed for ``X``.
    """
    t_path = sample_stable_subordinator(gamma, n_steps, horizon, seed, 2 * index)
    x_dt = t_path.dt * 2.0 ** -20 if x_dt is None else x_dt
    k = np.floor(t_path.x / x_dt + 1e-12)
    gaps = np.diff(k, prepend=0.0)
    rng = path_rng(seed, 2 * index + 1)
    z = symmetric_stable(alpha, len(k), rng)
    x = np.cumsum((x_dt * gaps) ** (1.0 / alpha) * z)
    return PathSample(t_path.dt, x, f"cms-{alpha:g}∘kanter-{gamma:g}", seed, index)


# -- I/O -------------------------------------------------------------------------

_HEADER = struct.Struct("<4sHHIdQ16s")


def write_paths_binary(path, samples: Sequence[PathSample]) -> None:
    """Header ``(magic, version, n, paths, dt, N, scheme)`` then little-endian float64 values."""
    if not samples:
        raise ValueError("no paths to write")
    first = samples[0]
    if any(s.steps != first.steps or s.n != first.n or s.dt != first.dt for s in samples):
        raise ValueError("all paths must share one grid")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, first.n, len(samples), first.dt, first.steps,
                              first.scheme.encode("utf-8")[:16]))
        for s in samples:
            fh.write(s.values.astype("<f8").tobytes())


def read_paths_binary(path) -> List[PathSample]:
    with open(path, "rb") as fh:
        magic, version, n, count, dt, steps, tag = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != BINARY_MAGIC or version != BINARY_VERSION:
            raise ValueError("not a levelset-lab path file")
        body = np.frombuffer(fh.read(), dtype="<f8").reshape(count, steps + 1, n)
    scheme = tag.rstrip(b"\0").decode("utf-8", "ignore")
    return [PathSample(dt, body[i].copy(), scheme, index=i) for i in range(count)]


def write_path_csv(path, sample: PathSample) -> None:
    """Columns ``t,x1[,x2,...]`` with round-trip float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(sample.n)])
        for t, row in zip(sample.times, sample.values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def read_path_csv(path, scheme: str = "csv") -> PathSample:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    dt = float(data[1, 0] - data[0, 0]) if len(data) > 1 else 1.0
    return PathSample(dt, data[:, 1:], scheme)
