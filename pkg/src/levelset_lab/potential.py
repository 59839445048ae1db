"""Kato class, polarity, regularity and recurrence tests driven by the symbol profile."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .indices import ConvergenceVerdict, SetMeasureModel, Verdict, convergence_probe, DEFAULT_DEPTH
from .symbol import LevyMeasureModel, SymbolProfile, rho, ExtrapolationWarning


class InconclusiveError(RuntimeError):
    """A convergence probe could not classify the integral."""


class InfiniteMomentError(ValueError):
    """The Lévy measure has no first moment at infinity."""


class Polarity(str, Enum):
    NON_POLAR = "NonPolar"
    POLAR = "Polar"
    INCONCLUSIVE = "Inconclusive"


class Regularity(str, Enum):
    ALL_BOUNDARY_REGULAR = "AllBoundaryRegular"
    UNKNOWN = "Unknown"


_KATO_EPSREL = 1e-7  # ball suprema are only piecewise smooth


def _quad(f, a, b, epsrel=1e-10, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=400, **kw)[0]


# -- Kato class ---------------------------------------------------------------

def _kato_integrand(profile: SymbolProfile, sup_ball: Callable[[float], float], gamma: float):
    n = profile.n
    return lambda r: sup_ball(r) * profile.qstar_at(1.0 / r) ** (-gamma) * r ** (-n - 1.0)


def _power_ball(d: float) -> Callable[[float], float]:
    return lambda r: r ** d


def kato_check(profile: SymbolProfile, measure: SetMeasureModel, gamma: float = 1.0,
               K: int = DEFAULT_DEPTH) -> ConvergenceVerdict:
    """Probe ``∫_0^1 sup_x ϖ(B(x,r)) (q^*)^{-γ}(1/r) r^{-n-1} dr``."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("γ must lie in (0, 1]")
    return convergence_probe(_kato_integrand(profile, measure.sup_ball, gamma), K=K, epsrel=_KATO_EPSREL)


def kato_limit(profile: SymbolProfile, measure: SetMeasureModel, gamma: float, t: float,
               max_rungs: int = 400) -> float:
    """Truncated Kato integral over ``(0, t]``; ``inf`` when the full integral diverges."""
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    if not kato_check(profile, measure, gamma).converges:
        return math.inf
    f = _kato_integrand(profile, measure.sup_ball, gamma)
    total, prev = 0.0, None
    for k in range(1, max_rungs + 1):
        hi = t * 2.0 ** (-(k - 1))
        rung = _quad(lambda v: f(math.exp(v)) * math.exp(v), math.log(hi / 2.0), math.log(hi), epsrel=_KATO_EPSREL)
        total += rung
        if prev and rung > 0:
            q = rung / prev
            if q < 1.0 and rung / (1.0 - q) <= 1e-13 * total:
                return total + rung * q / (1.0 - q)
        prev = rung
        if total > 0 and rung == 0.0:
            return total
    return total


# -- polarity, recurrence ------------------------------------------------------

def point_polarity(profile: SymbolProfile, n: Optional[int] = None, K: int = DEFAULT_DEPTH) -> Polarity:
    """Points are non-polar in ``n = 1`` iff ``∫_1^∞ ds / q^*(s) < ∞``; always polar for ``n >= 2``."""
    n = profile.n if n is None else n
    if n >= 2:
        return Polarity.POLAR
    # substitute s = 1/r to reach the unit interval
    v = convergence_probe(lambda r: 1.0 / (profile.qstar_at(1.0 / r) * r * r), K=K)
    if v.verdict is Verdict.INCONCLUSIVE:
        return Polarity.INCONCLUSIVE
    return Polarity.NON_POLAR if v.converges else Polarity.POLAR


def chung_fuchs_recurrent(profile: SymbolProfile, n: int = 1, K: int = DEFAULT_DEPTH) -> bool:
    """Recurrence from divergence of ``∫_0^1 dξ / q(ξ)``."""
    if n != 1:
        raise NotImplementedError("the Chung-Fuchs comparison is implemented for n = 1")
    v = convergence_probe(lambda x: 1.0 / profile.q_at(x), K=K)
    if v.verdict is Verdict.INCONCLUSIVE:
        raise InconclusiveError(f"Chung-Fuchs probe inconclusive (exponent {v.exponent:.4g})")
    return v.diverges


def _bounded_tail(values: np.ndarray, abs_x: np.ndarray, slack: float = 0.05) -> bool:
    """No growth: the max over the outer half of the grid does not exceed the inner max."""
    order = np.argsort(abs_x)
    v = values[order]
    half = len(v) // 2
    inner, outer = np.max(v[: half + 1]), np.max(v[half:])
    return bool(outer <= inner + slack * abs(inner) + 1e-12)


class DriftCheck(NamedTuple):
    sup: float
    holds: bool
    x: np.ndarray
    values: np.ndarray


def _first_moment_finite(model: LevyMeasureModel) -> bool:
    k = model.kernel
    if math.isfinite(k.support_max):
        return True
    if model.family == "tempered":
        return True
    if model.family == "stable":
        return model.alpha > 1.0
    lr, lg = np.log(model.table_r), np.log(model.table_density)
    return (lg[-1] - lg[-2]) / (lr[-1] - lr[-2]) < -2.0


def drift_recurrence_check(model: LevyMeasureModel, x_grid: Optional[Sequence[float]] = None) -> DriftCheck:
    """Evaluate ``B(x) x + D(x) |x|`` on a grid of large ``|x|``.

    ``B(x) = b(x) + ∫_{1<|z|<=|x|} z m(x,z) μ(dz)`` and ``D(x) = ∫_{|z|>=|x|} |z| m(x,z) μ(dz)``.
    ``holds`` reports that the values stop growing on the outer half of the grid.
    """
    if model.n != 1:
        raise NotImplementedError("drift condition is implemented for n = 1")
    if not _first_moment_finite(model):
        raise InfiniteMomentError(
            f"{model.family} Lévy measure (alpha={model.alpha}) has infinite first moment at infinity, D(x) = inf")
    if x_grid is None:
        pos = np.logspace(1, 4, 31)
        x_grid = np.concatenate([-pos[::-1], pos])
    x_grid = np.asarray(x_grid, float)
    k = model.kernel
    top = k.support_max
    m = model.modulation or (lambda x, z: 1.0)
    b = model.drift or (lambda x: 0.0)

    vals = np.empty_like(x_grid)
    for i, x in enumerate(x_grid):
        ax = abs(x)
        if model.modulation is None:
            jump_drift = 0.0
        else:
            hi = min(ax, top)
            jump_drift = _quad(lambda s: s * (m(x, s) - m(x, -s)) * k(s), 1.0, hi) if hi > 1.0 else 0.0
        B = float(np.atleast_1d(b(x))[0]) + jump_drift
        D = _quad(lambda s: s * (m(x, s) + m(x, -s)) * k(s), ax, top) if ax < top else 0.0
        vals[i] = B * x + D * ax
    return DriftCheck(float(np.max(vals)), _bounded_tail(vals, np.abs(x_grid)), x_grid, vals)


class Example1Conditions(NamedTuple):
    tail: bool
    lower_monotone: bool
    upper_monotone: bool


def example1_conditions(g: Union[Callable, LevyMeasureModel], eta: float, eps: float, delta: float,
                        h_small: Optional[np.ndarray] = None, h_large: Optional[np.ndarray] = None,
                        rtol: float = 1e-10) -> Example1Conditions:
    """Audit the three shape conditions on a radial jump density ``g``.

    ``tail``: ``g(h) <= C h^{-1-η}`` on ``h >= 1`` with ``η > 1``;
    ``lower_monotone``: ``h^{2+ε} g(h)`` nondecreasing on ``(0, 1]``;
    ``upper_monotone``: ``h^δ g(h)`` nonincreasing on ``(0, 1]`` with ``δ > 1``.
    """
    if isinstance(g, LevyMeasureModel):
        g = g.kernel
    h_small = np.logspace(-6, 0, 601) if h_small is None else np.asarray(h_small, float)
    h_large = np.logspace(0, 6, 601) if h_large is None else np.asarray(h_large, float)
    gs = np.asarray(g(h_small), float) * np.ones_like(h_small)
    gl = np.asarray(g(h_large), float) * np.ones_like(h_large)

    tail = eta > 1.0 and _bounded_tail(gl * h_large ** (1.0 + eta), h_large, slack=rtol)
    lower = h_small ** (2.0 + eps) * gs
    upper = h_small ** delta * gs
    lower_ok = bool(np.all(np.diff(lower) >= -rtol * np.abs(lower[1:])))
    upper_ok = delta > 1.0 and bool(np.all(np.diff(upper) <= rtol * np.abs(upper[1:])))
    return Example1Conditions(bool(tail), lower_ok, upper_ok)


def collision_potential_lower(profile: SymbolProfile, separation: float) -> float:
    """``∫_{sep}^{1/ρ_1} dr / (r^3 q^U(1/r))``, zero when the range is empty."""
    if separation <= 0:
        raise ValueError("separation must be positive")
    top = 1.0 / rho(profile, 1.0)
    if separation >= top:
        return 0.0
    f = lambda v: 1.0 / (math.exp(2.0 * v) * profile.qU_at(math.exp(-v)))
    return _quad(f, math.log(separation), math.log(top))


# -- regularity ---------------------------------------------------------------

def regularity_dset(profile: SymbolProfile, d: float, n: Optional[int] = None,
                    measure: Optional[SetMeasureModel] = None) -> Regularity:
    """Every point of a closed d-set is regular when ``d > n - α`` and its d-measure is Kato."""
    n = profile.n if n is None else n
    alpha = profile.alpha_index
    if not d > n - alpha:
        return Regularity.UNKNOWN
    ball = measure.sup_ball if measure is not None else _power_ball(d)
    v = convergence_probe(_kato_integrand(profile, ball, 1.0), epsrel=_KATO_EPSREL)
    return Regularity.ALL_BOUNDARY_REGULAR if v.converges else Regularity.UNKNOWN


def _rho_vec(profile: SymbolProfile, t: np.ndarray) -> np.ndarray:
    """Vectorized ``ρ_t`` by inverting the monotone ``q^*`` envelope."""
    env = profile.envelope
    keep = np.concatenate([[True], np.diff(env) > 0])
    le, lr = np.log(env[keep]), np.log(profile.r[keep])
    target = -np.log(t)
    out = np.interp(target, le, lr)
    _, hi = profile._end_slopes(profile.qstar, True)
    above = target > le[-1]
    out = np.where(above, lr[-1] + (target - le[-1]) / hi if hi > 0 else np.inf, out)
    out = np.where(target <= le[0], lr[0], out)
    return np.exp(out)


@dataclass(frozen=True)
class RegularityRatio:
    lambdas: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.lower / self.upper

    @property
    def bounded_below(self) -> float:
        """Smallest ratio on the audited ladder."""
        return float(np.min(self.ratio))

    def as_dict(self) -> dict:
        return {"lambda": self.lambdas.tolist(), "lower": self.lower.tolist(),
                "upper": self.upper.tolist(), "ratio": self.ratio.tolist()}


def regularity_ratio(profile: SymbolProfile, measure: SetMeasureModel, lambdas: Sequence[float],
                     x: Optional[float] = None, constants: tuple = (1.0, 1.0, 1.0, 1.0),
                     nodes: int = 4000) -> RegularityRatio:
    """Lower resolvent bound at ``x`` over the upper bound's supremum, along a λ ladder.

    Lower: ``a1 ∫_0^1 e^{-λt} ρ_t^n ϖ(B(x, 1/(a2 ρ_t))) dt``.
    Upper: ``a3 ∫_0^1 e^{-λt} ρ_t^n ∫_0^∞ sup_w ϖ(B(w, r/(a4 ρ_t))) e^{-r} dr dt``.
    """
    lambdas = np.asarray(lambdas, float)
    if np.any(np.diff(lambdas) <= 0) or lambdas[0] <= 0:
        raise ValueError("λ ladder must be positive and increasing")
    if lambdas[-1] > profile.envelope[-1]:
        raise ValueError(f"profile covers q* up to {profile.envelope[-1]:.3g}; λ={lambdas[-1]:.3g} needs more")
    a1, a2, a3, a4 = constants
    n = profile.n
    x = measure.span[0] if x is None else x

    lag_r, lag_w = np.polynomial.laguerre.laggauss(48)
    # ∫ sup_ball(r s) e^{-r} dr tabulated over s and interpolated in log-log
    s_lo = 1e-3 / (a4 * _rho_vec(profile, np.array([1e-14 / lambdas[-1]]))[0])
    s_hi = 10.0 / (a4 * _rho_vec(profile, np.array([1.0]))[0])
    s_tab = np.geomspace(min(s_lo, s_hi / 10), s_hi, 240)
    G = np.array([sum(w * measure.sup_ball(r * s) for r, w in zip(lag_r, lag_w)) for s in s_tab])
    G = np.maximum(G, np.finfo(float).tiny)

    lower, upper = [], []
    for lam in lambdas:
        lu = np.linspace(math.log(1e-14), math.log(lam), nodes)
        u = np.exp(lu)
        t = u / lam
        rt = _rho_vec(profile, t)
        weight = np.exp(-u) * rt ** n * u / lam  # du = u dlog u
        ball = measure.ball(x, 1.0 / (a2 * rt))
        s = 1.0 / (a4 * rt)
        g = np.exp(np.interp(np.log(s), np.log(s_tab), np.log(G)))
        lower.append(a1 * integrate.trapezoid(weight * ball, lu))
        upper.append(a3 * integrate.trapezoid(weight * g, lu))
    return RegularityRatio(lambdas, np.array(lower), np.array(upper))


def resolvent_surrogate(profile: SymbolProfile, d: float, lam: float, n: Optional[int] = None) -> float:
    """``λ^{-1} ∫_0^λ e^{-u} ρ_{u/λ}^{n-d} du``."""
    n = profile.n if n is None else n
    p = n - d
    a = 1e-16
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExtrapolationWarning)
        rho_at = lambda u: _rho_vec(profile, np.array([u / lam]))[0]
        f = lambda v: math.exp(-math.exp(v)) * rho_at(math.exp(v)) ** p * math.exp(v)
        body = _quad(f, math.log(a), math.log(lam), points=[0.0] if lam > 1 else None)
        # below u = a: e^{-u} ≈ 1 and ρ_t follows its power-law extrapolation t^{-1/β}
        _, beta = profile._end_slopes(profile.qstar, True)
        e = p / beta if beta > 0 else math.inf
        head = a * rho_at(a) ** p / (1.0 - e) if e < 1 else math.inf
        return (body + head) / lam
