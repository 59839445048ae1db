"""Subordination indices γ*, γ_inf, γ_sup and finite measures on d-sets."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate

from .symbol import SymbolProfile, power_envelope, InsufficientDataError

DEFAULT_DEPTH = 40


class Verdict(str, Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True, eq=False)
class ConvergenceVerdict:
    """Outcome of a dyadic ladder test for ``∫_0^1 f(r) dr``.

    ``ladder[k-1]`` is the partial integral over ``[2^{-k}, 1]``. ``exponent`` is the
    fitted growth rate ``e`` of the rung increments, ``Δ_k ∝ 2^{e k}``.
    """

    verdict: Verdict
    ladder: np.ndarray
    exponent: float
    residual: float

    @property
    def converges(self) -> bool:
        return self.verdict is Verdict.CONVERGES

    @property
    def diverges(self) -> bool:
        return self.verdict is Verdict.DIVERGES

    @property
    def rung_slope(self) -> float:
        """Mean growth of the ladder per rung over the fitted window."""
        tail = self.ladder[-10:]
        return float(np.mean(np.diff(tail))) if len(tail) > 1 else 0.0

    def as_dict(self) -> dict:
        return {"verdict": self.verdict.value, "exponent": self.exponent, "residual": self.residual,
                "partial_integral": float(self.ladder[-1])}


def _rung(f: Callable, k: int, epsrel: float = 1e-11) -> float:
    lo, hi = -k * math.log(2.0), -(k - 1) * math.log(2.0)
    g = lambda v: f(math.exp(v)) * math.exp(v)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(g, lo, hi, epsabs=0.0, epsrel=epsrel, limit=200)[0]


def convergence_probe(integrand: Callable[[float], float], K: int = DEFAULT_DEPTH,
                      window: int = 10, exp_tol: float = 2e-4, cauchy_tol: float = 1e-6,
                      fit_tol: float = 0.05, epsrel: float = 1e-11) -> ConvergenceVerdict:
    """Classify ``∫_0^1 integrand(r) dr`` from partial integrals on ``[2^{-k}, 1]``.

    Converges when the ladder is Cauchy to ``cauchy_tol`` over the last five rungs,
    or when the rung increments decay geometrically. Diverges when they do not
    decay (``e >= -exp_tol``): linear growth in ``k`` or power growth in ``2^k``.
    Increments that ripple about a power law are judged by the trend's standard
    error, and Inconclusive when it does not clear zero. Pass a looser
    ``epsrel`` for integrands that are only piecewise smooth.
    """
    if K < window + 1:
        raise ValueError("depth K too small for the fitting window")
    inc = np.array([_rung(integrand, k, epsrel) for k in range(1, K + 1)])
    if np.any(inc < -1e-300) or not np.all(np.isfinite(inc)):
        if not np.all(np.isfinite(inc)):
            return ConvergenceVerdict(Verdict.DIVERGES, np.cumsum(inc), math.inf, 0.0)
        raise ValueError("integrand must be nonnegative")
    ladder = np.cumsum(inc)
    total = ladder[-1]
    if total == 0.0:
        return ConvergenceVerdict(Verdict.CONVERGES, ladder, -math.inf, 0.0)

    tail = inc[-window:]
    ks = np.arange(K - window + 1, K + 1)
    pos = tail > 0
    if pos.sum() < 3:
        return ConvergenceVerdict(Verdict.CONVERGES, ladder, -math.inf, 0.0)
    lt = np.log2(tail[pos])
    coef = np.polyfit(ks[pos], lt, 1)
    exponent = float(coef[0])
    residual = float(np.max(np.abs(lt - np.polyval(coef, ks[pos]))))

    cauchy = (total - ladder[-6]) <= cauchy_tol * total
    if cauchy and exponent < 0:
        return ConvergenceVerdict(Verdict.CONVERGES, ladder, exponent, residual)
    if residual > fit_tol:
        # self-similar integrands ripple log-periodically about the trend; decide only
        # when the fitted exponent clears zero by three standard errors
        dof = max(int(pos.sum()) - 2, 1)
        res = lt - np.polyval(coef, ks[pos])
        se = math.sqrt(float(res @ res) / dof) / math.sqrt(float(np.sum((ks[pos] - ks[pos].mean()) ** 2)))
        if exponent - 3.0 * se >= -exp_tol:
            verdict = Verdict.DIVERGES
        elif cauchy or exponent + 3.0 * se < 0:
            verdict = Verdict.CONVERGES
        else:
            verdict = Verdict.INCONCLUSIVE
        return ConvergenceVerdict(verdict, ladder, exponent, residual)
    verdict = Verdict.DIVERGES if exponent >= -exp_tol else Verdict.CONVERGES
    return ConvergenceVerdict(verdict, ladder, exponent, residual)


@dataclass(frozen=True)
class IndexResult:
    """A threshold in ``[0, 1]`` located by bisection.

    ``bracket = (lo, hi)``: the integral diverges at ``lo`` and converges at ``hi``.
    ``value`` follows the convention of the index (``hi`` for γ_inf and γ*, ``lo`` for
    γ_sup); ``open_value``/``closed_value`` are the two ends.
    """

    value: float
    bracket: tuple
    ambiguous: bool = False
    cross_check: Optional[float] = None

    def __float__(self) -> float:
        return float(self.value)

    @property
    def open_value(self) -> float:
        return float(self.bracket[1])

    @property
    def closed_value(self) -> float:
        return float(self.bracket[0])

    def as_dict(self) -> dict:
        d = {"value": self.value, "bracket": list(self.bracket), "ambiguous": self.ambiguous}
        if self.cross_check is not None:
            d["cross_check"] = self.cross_check
        return d


def _threshold(make_integrand: Callable[[float], Callable], tol: float, K: int):
    """Bracket the γ where ``∫_0^1 make_integrand(γ)`` switches from diverging to converging."""
    def verdict(g):
        return convergence_probe(make_integrand(g), K=K).verdict

    lo, hi = 0.0, 1.0
    v_hi = verdict(hi)
    if v_hi is Verdict.DIVERGES:
        return (1.0, 1.0), False
    v_lo = verdict(lo)
    if v_lo is Verdict.CONVERGES:
        return (0.0, 0.0), False
    ambiguous = Verdict.INCONCLUSIVE in (v_lo, v_hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        v = verdict(mid)
        if v is Verdict.CONVERGES:
            hi = mid
        elif v is Verdict.DIVERGES:
            lo = mid
        else:
            ambiguous = True
            break
    return (lo, hi), ambiguous


def _qstar_power(profile: SymbolProfile, gamma: float) -> Callable[[float], float]:
    """``r -> q^*(1/r)^{-γ}``."""
    def f(r):
        return profile.qstar_at(1.0 / r) ** (-gamma)
    return f


def gamma_star(profile: SymbolProfile, tol: float = 1e-3, K: int = DEFAULT_DEPTH) -> IndexResult:
    """``γ* = inf{γ : ∫_0^1 q^*(1/s)^{-γ} s^{-2} ds < ∞}``."""
    def make(g):
        qs = _qstar_power(profile, g)
        return lambda s: qs(s) / (s * s)

    (lo, hi), amb = _threshold(make, tol, K)
    cross = None
    try:
        env = power_envelope(profile)
        if not env.degenerate and env.beta - env.alpha < 1e-3:
            cross = min(1.0 / env.alpha, 1.0)
    except InsufficientDataError:
        pass
    return IndexResult(hi, (lo, hi), amb, cross)


def _dset_integrand(profile: SymbolProfile, d: float, n: int):
    def make(g):
        qs = _qstar_power(profile, g)
        return lambda r: r ** (d - n - 1.0) * qs(r)
    return make


def gamma_inf(profile: SymbolProfile, d: float, n: int, tol: float = 1e-3, K: int = DEFAULT_DEPTH) -> IndexResult:
    """Smallest γ making ``∫_0^1 r^d (q^*)^{-γ}(1/r) r^{-n-1} dr`` finite."""
    if not 0.0 <= d <= n:
        raise ValueError("d must lie in [0, n]")
    (lo, hi), amb = _threshold(_dset_integrand(profile, d, n), tol, K)
    return IndexResult(hi, (lo, hi), amb)


def gamma_sup_dset(profile: SymbolProfile, d: Optional[float], n: int, tol: float = 1e-3,
                   K: int = DEFAULT_DEPTH) -> IndexResult:
    """Largest γ for which the ball integral of a d-measure is unbounded.

    For a d-set the ball masses are comparable to ``r^d``, so the quantifier over
    all measures collapses to the same integrand as γ_inf. Logarithmic divergence
    at the threshold counts as unbounded.
    """
    if d is None:
        raise NotImplementedError("γ_sup is only computable for d-sets with a declared exponent")
    if not 0.0 <= d <= n:
        raise ValueError("d must lie in [0, n]")
    (lo, hi), amb = _threshold(_dset_integrand(profile, d, n), tol, K)
    return IndexResult(lo, (lo, hi), amb)


# -- measures ---------------------------------------------------------------

MEASURE_KINDS = ("dirac", "interval", "cantor", "tabulated")


@dataclass(frozen=True, eq=False)
class SetMeasureModel:
    """Finite measure on a compact subset of the real line.

    ``cantor`` is the uniform self-similar measure of the middle-``(1-2·ratio)``
    Cantor set on ``[left, left + length]``, resolved to ``depth`` levels; below the
    resolution the ball supremum uses the exact self-similar extension.
    """

    kind: str
    mass: float = 1.0
    location: float = 0.0
    left: float = 0.0
    right: float = 1.0
    ratio: float = 1.0 / 3.0
    depth: int = 12
    atoms: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    d: Optional[float] = None
    n: int = 1
    _cum: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.n != 1:
            raise NotImplementedError("set measures are implemented on the real line only")
        if self.kind == "interval" and not self.right > self.left:
            raise ValueError("interval needs left < right")
        if self.kind == "cantor":
            if not 0.0 < self.ratio < 0.5:
                raise ValueError("Cantor ratio must lie in (0, 1/2)")
            if self.depth < 1:
                raise ValueError("Cantor depth must be >= 1")
        if self.kind == "tabulated":
            if self.atoms is None or self.weights is None or len(self.atoms) != len(self.weights):
                raise ValueError("tabulated measure needs atoms and matching weights")
            order = np.argsort(self.atoms)
            a = np.asarray(self.atoms, float)[order]
            w = np.asarray(self.weights, float)[order]
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            object.__setattr__(self, "atoms", a)
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "mass", float(w.sum()))
            object.__setattr__(self, "_cum", np.concatenate([[0.0], np.cumsum(w)]))
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError("total mass must be finite and positive")
        if self.d is None:
            object.__setattr__(self, "d", self.natural_dimension)

    @classmethod
    def dirac(cls, location: float = 0.0, mass: float = 1.0) -> "SetMeasureModel":
        return cls("dirac", mass=mass, location=location)

    @classmethod
    def interval(cls, left: float = 0.0, right: float = 1.0, mass: float = 1.0) -> "SetMeasureModel":
        return cls("interval", mass=mass, left=left, right=right)

    @classmethod
    def cantor(cls, ratio: float = 1.0 / 3.0, depth: int = 12, left: float = 0.0, length: float = 1.0,
               mass: float = 1.0) -> "SetMeasureModel":
        return cls("cantor", mass=mass, ratio=ratio, depth=depth, left=left, right=left + length)

    @classmethod
    def tabulated(cls, atoms, weights) -> "SetMeasureModel":
        return cls("tabulated", atoms=np.asarray(atoms, float), weights=np.asarray(weights, float))

    @classmethod
    def from_config(cls, cfg: dict) -> "SetMeasureModel":
        cfg = dict(cfg)
        kind = cfg.pop("kind")
        if kind == "cantor":
            return cls.cantor(**cfg)
        if kind == "tabulated":
            return cls.tabulated(cfg.pop("atoms"), cfg.pop("weights"))
        return cls(kind, **cfg)

    # geometry -----------------------------------------------------------------
    @property
    def natural_dimension(self) -> float:
        if self.kind in ("dirac", "tabulated"):
            return 0.0
        if self.kind == "interval":
            return 1.0
        return math.log(2.0) / math.log(1.0 / self.ratio)

    @property
    def span(self) -> tuple:
        if self.kind == "dirac":
            return (self.location, self.location)
        if self.kind == "tabulated":
            return (float(self.atoms[0]), float(self.atoms[-1]))
        return (self.left, self.right)

    @property
    def diameter(self) -> float:
        lo, hi = self.span
        return hi - lo

    @property
    def resolution(self) -> float:
        """Finest scale at which the ball masses are exact."""
        if self.kind == "cantor":
            return self.diameter * self.ratio ** self.depth
        return 0.0

    def intervals(self, depth: Optional[int] = None) -> np.ndarray:
        """Support as sorted, disjoint closed intervals, shape ``(m, 2)``."""
        if self.kind == "dirac":
            return np.array([[self.location, self.location]])
        if self.kind == "tabulated":
            a = np.unique(self.atoms[self.weights > 0])
            return np.column_stack([a, a])
        if self.kind == "interval":
            return np.array([[self.left, self.right]])
        depth = self.depth if depth is None else depth
        starts = np.zeros(1)
        size = 1.0
        for _ in range(depth):
            starts = np.concatenate([starts, starts + (1.0 - self.ratio) * size])
            size *= self.ratio
        starts.sort()
        L = self.diameter
        return np.column_stack([self.left + L * starts, self.left + L * (starts + size)])

    def distance(self, x) -> np.ndarray:
        """Distance from ``x`` to the (resolved) support."""
        x = np.asarray(x, float)
        iv = self.intervals()
        idx = np.searchsorted(iv[:, 0], x, side="right") - 1
        left = np.clip(idx, 0, len(iv) - 1)
        right = np.clip(idx + 1, 0, len(iv) - 1)
        d_left = np.where(x > iv[left, 1], x - iv[left, 1], np.where(x >= iv[left, 0], 0.0, iv[left, 0] - x))
        d_right = np.abs(iv[right, 0] - x)
        return np.minimum(d_left, d_right)

    # masses ------------------------------------------------------------------
    def _cantor_cdf(self, x) -> np.ndarray:
        pos = (np.asarray(x, float) - self.left) / self.diameter
        out = np.zeros_like(pos)
        scale = np.ones_like(pos)
        active = (pos > 0) & (pos < 1)
        out[pos >= 1] = 1.0
        rho = self.ratio
        for _ in range(self.depth):
            in_left = active & (pos < rho)
            in_gap = active & (pos >= rho) & (pos <= 1 - rho)
            in_right = active & (pos > 1 - rho)
            out = np.where(in_gap | in_right, out + 0.5 * scale, out)
            pos = np.where(in_left, pos / rho, np.where(in_right, (pos - (1 - rho)) / rho, pos))
            active = in_left | in_right
            scale = scale * 0.5
        return np.where(active, out + scale * np.clip(pos, 0, 1), out)

    def cdf(self, x) -> np.ndarray:
        """``ϖ((-∞, x]) / mass``."""
        x = np.asarray(x, float)
        if self.kind == "dirac":
            return (x >= self.location).astype(float)
        if self.kind == "interval":
            return np.clip((x - self.left) / (self.right - self.left), 0.0, 1.0)
        if self.kind == "cantor":
            return self._cantor_cdf(x)
        idx = np.searchsorted(self.atoms, x, side="right")
        return self._cum[idx] / self.mass

    def ball(self, x, r) -> np.ndarray:
        """``ϖ([x - r, x + r])``."""
        x, r = np.broadcast_arrays(np.asarray(x, float), np.asarray(r, float))
        if self.kind == "dirac":
            return self.mass * (np.abs(x - self.location) <= r)
        if self.kind == "tabulated":
            hi = np.searchsorted(self.atoms, x + r, side="right")
            lo = np.searchsorted(self.atoms, x - r, side="left")
            return self._cum[hi] - self._cum[lo]
        return self.mass * (self.cdf(x + r) - self.cdf(x - r))

    def sup_ball(self, r: float) -> float:
        """``sup_x ϖ(B(x, r))``."""
        if r <= 0:
            return self.mass if self.kind == "dirac" else 0.0
        if self.kind == "dirac":
            return self.mass
        if self.kind == "interval":
            return self.mass * min(2.0 * r / (self.right - self.left), 1.0)
        if self.kind == "tabulated":
            hi = np.searchsorted(self.atoms, self.atoms + 2.0 * r, side="right")
            lo = np.arange(len(self.atoms))
            return float(np.max(self._cum[hi] - self._cum[lo]))
        L, rho = self.diameter, self.ratio
        if r >= L:
            return self.mass
        factor = 1.0
        # below the resolution, a ball narrower than the first-level gap sits in one block
        while r < L * rho ** self.depth and 2.0 * r < L * (1.0 - 2.0 * rho):
            r /= rho
            factor *= 0.5
        lr, lv = self._sup_table()
        return factor * float(np.exp(np.interp(math.log(r), lr, lv)))

    def _sup_exact(self, r: float) -> float:
        # optimal windows have an edge on a block endpoint
        iv = self.intervals()
        centers = np.concatenate([iv[:, 0] + r, iv[:, 1] - r])
        return float(np.max(self.ball(centers, r)))

    def _sup_table(self, per_octave: int = 48):
        """``log sup_ball`` on a log grid from the resolution to the diameter (Cantor)."""
        table = self.__dict__.get("_sup_cache")
        if table is None:
            lo, hi = math.log(self.resolution), math.log(self.diameter)
            lr = np.linspace(lo, hi, int(per_octave * (hi - lo) / math.log(2.0)) + 2)
            lv = np.log([self._sup_exact(math.exp(x)) for x in lr])
            table = (lr, lv)
            object.__setattr__(self, "_sup_cache", table)
        return table

    def audit_points(self, max_points: int = 512) -> np.ndarray:
        """Deterministic sample of support points."""
        if self.kind == "dirac":
            return np.array([self.location])
        if self.kind == "interval":
            return np.linspace(self.left, self.right, 65)
        if self.kind == "tabulated":
            return self.atoms[np.linspace(0, len(self.atoms) - 1, min(len(self.atoms), max_points)).astype(int)]
        level = min(self.depth, max(1, int(math.log2(max_points // 2))))
        iv = self.intervals(level)
        return np.concatenate([iv[:, 0], iv[:, 1]])


class DMeasureCheck(NamedTuple):
    c1: float
    c2: float
    holds: bool


def check_d_measure(measure: SetMeasureModel, d: float, K: int = 12, max_trend: float = 0.02) -> DMeasureCheck:
    """Audit ``c1 r^d <= ϖ(B(x, r)) <= c2 r^d`` for support points ``x``.

    Radii run geometrically from the finest resolved scale (``2^{-K}``, or the
    Cantor resolution) up to the diameter. The sandwich is accepted when the
    extreme ratios show no power-law drift across scales.
    """
    diam = measure.diameter if measure.diameter > 0 else 1.0
    r_min = max(diam * 2.0 ** (-K), measure.resolution)
    radii = np.geomspace(r_min, diam, 8 * int(round(math.log2(diam / r_min))) + 1)
    x = measure.audit_points()
    X, R = np.meshgrid(x, radii, indexing="ij")
    ratio = measure.ball(X, R) / R ** d
    lo, hi = ratio.min(axis=0), ratio.max(axis=0)
    c1, c2 = float(lo.min()), float(hi.max())
    if not (c1 > 0 and math.isfinite(c2)):
        return DMeasureCheck(c1, c2, False)
    # near the diameter every finite measure saturates; judge drift on smaller balls
    keep = radii <= diam / 8.0
    lr = np.log(radii[keep])
    trend = max(abs(np.polyfit(lr, np.log(lo[keep]), 1)[0]), abs(np.polyfit(lr, np.log(hi[keep]), 1)[0]))
    return DMeasureCheck(c1, c2, bool(trend <= max_trend))
