"""Symbols of symmetric Lévy measures: q, its integral envelopes and power indices.

All integrals are taken over the one-dimensional projection of the Lévy measure
onto the direction of the frequency, written in the scaled variable ``u = |ξ| s``.
The region ``u <= 1`` carries the small-jump singularity, ``u > 1`` the tail.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special
from scipy.stats import qmc

FAMILIES = ("stable", "tempered", "truncated", "tabulated")

_EPSREL = 1e-12
_MAX_POINTS = 100


class ExtrapolationWarning(UserWarning):
    """A profile was evaluated outside its tabulated radius range."""


class InsufficientDataError(ValueError):
    pass


def one_minus_cos(u):
    """``1 - cos(u)`` without cancellation for small ``u``."""
    u = np.asarray(u, dtype=float)
    u2 = u * u
    series = u2 / 2.0 - u2 * u2 / 24.0 + u2 * u2 * u2 / 720.0
    out = np.where(np.abs(u) < 1e-4, series, 2.0 * np.sin(u / 2.0) ** 2)
    return out if out.ndim else float(out)


def stable_unit_integral(alpha: float) -> float:
    """Closed form of ``∫_0^∞ (1 - cos u) u^{-1-alpha} du``."""
    if abs(alpha - 1.0) < 1e-12:
        return math.pi / 2.0
    return special.gamma(2.0 - alpha) * math.cos(math.pi * alpha / 2.0) / (alpha * (1.0 - alpha))


def sphere_projection_constant(alpha: float, n: int) -> float:
    """Half of ``∫_{S^{n-1}} |θ_1|^alpha σ(dθ)``.

    An isotropic measure ``c |h|^{-n-alpha} dh`` projects onto any line as the
    one-dimensional measure ``c * K |s|^{-1-alpha} ds`` with this ``K``.
    """
    if n == 1:
        return 1.0
    return math.pi ** ((n - 1) / 2.0) * special.gamma((alpha + 1.0) / 2.0) / special.gamma((n + alpha) / 2.0)


def unit_symbol_intensity(alpha: float, n: int = 1) -> float:
    """Intensity making the isotropic stable measure have symbol exactly ``|ξ|^alpha``."""
    return 1.0 / (2.0 * stable_unit_integral(alpha) * sphere_projection_constant(alpha, n))


@dataclass(frozen=True, eq=False)
class _Kernel1D:
    """Symmetric one-dimensional Lévy density ``s -> weight * shape(s)`` for ``s > 0``."""

    shape: Callable[[np.ndarray], np.ndarray]
    weight: float = 1.0
    support_max: float = math.inf
    alpha: Optional[float] = None  # set when the shape is an exact power law
    breakpoints: tuple = ()

    def __call__(self, s):
        return self.weight * self.shape(s)


def _quad(f, a, b, **kw):
    kw.setdefault("epsabs", 0.0)
    kw.setdefault("epsrel", _EPSREL)
    kw.setdefault("limit", 400)
    pts = kw.pop("points", None)
    # QUADPACK caps breakpoints below `limit`; long tables are split into chunks
    edges = [a] + list(pts or [])[_MAX_POINTS::_MAX_POINTS] + [b]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            inner = [p for p in (pts or []) if lo < p < hi] or None
            total += integrate.quad(f, lo, hi, points=inner, **kw)[0]
    return total


def _inner_points(kernel: _Kernel1D, x: float, lo: float, hi: float):
    pts = [p * x for p in kernel.breakpoints if lo < p * x < hi]
    return pts or None


def _small_part(kernel: _Kernel1D, x: float, weight_fn) -> float:
    """``∫_0^{min(1, Rx)} weight_fn(u) g(u/x)/x du``."""
    hi = min(1.0, kernel.support_max * x)
    if hi <= 0.0:
        return 0.0
    f = lambda u: weight_fn(u) * kernel(u / x) / x
    return _quad(f, 0.0, hi, points=_inner_points(kernel, x, 0.0, hi))


def _tail_mass(kernel: _Kernel1D, x: float) -> float:
    """``∫_1^{Rx} g(u/x)/x du``, i.e. the mass of ``{s > 1/x}``."""
    hi = kernel.support_max * x
    if hi <= 1.0:
        return 0.0
    f = lambda u: kernel(u / x) / x
    if math.isinf(hi):
        return _quad(f, 1.0, math.inf)
    return _quad(f, 1.0, hi, points=_inner_points(kernel, x, 1.0, hi))


def _tail_cos(kernel: _Kernel1D, x: float, scale: float) -> float:
    hi = kernel.support_max * x
    if hi <= 1.0:
        return 0.0
    f = lambda u: kernel(u / x) / x
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if math.isinf(hi):
            return integrate.quad(f, 1.0, math.inf, weight="cos", wvar=1.0,
                                  epsabs=1e-13 * scale, limlst=200)[0]
        return integrate.quad(f, 1.0, hi, weight="cos", wvar=1.0,
                              epsabs=1e-13 * scale, epsrel=_EPSREL, limit=2000)[0]


def _q1d(kernel: _Kernel1D, x: float) -> float:
    if x == 0.0:
        return 0.0
    inner = _small_part(kernel, x, one_minus_cos)
    mass = _tail_mass(kernel, x)
    cos = _tail_cos(kernel, x, inner + mass)
    return max(2.0 * (inner + mass - cos), 0.0)


def _qL1d(kernel: _Kernel1D, x: float) -> float:
    if x == 0.0:
        return 0.0
    return 2.0 * _small_part(kernel, x, lambda u: u * u)


def _qU1d(kernel: _Kernel1D, x: float) -> float:
    if x == 0.0:
        return 0.0
    return _qL1d(kernel, x) + 2.0 * _tail_mass(kernel, x)


@dataclass(frozen=True, eq=False)
class LevyMeasureModel:
    """Lévy measure ``μ`` plus the state-dependent data ``a(x)`` and ``m(x, h)``.

    For ``n = 1`` every family is a symmetric density ``intensity * k(|h|)``.
    For ``n >= 2`` only ``stable`` is supported: isotropic ``intensity |h|^{-n-alpha}``,
    or, with ``axis_alphas``, a sum of one-dimensional stable measures on the
    coordinate axes.
    """

    family: str
    alpha: Optional[float] = None
    intensity: float = 1.0
    n: int = 1
    temper: Optional[float] = None
    cutoff: Optional[float] = None
    table_r: Optional[np.ndarray] = None
    table_density: Optional[np.ndarray] = None
    axis_alphas: Optional[tuple] = None
    drift: Optional[Callable] = None
    drift_bound: float = 0.0
    modulation: Optional[Callable] = None
    modulation_bounds: tuple = (1.0, 1.0)
    holder_index: float = 1.0
    _kernel: _Kernel1D = field(init=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.intensity > 0:
            raise ValueError("intensity must be positive")
        if self.n < 1:
            raise ValueError("dimension n must be a positive integer")
        if self.family != "tabulated" and not (self.alpha is not None and 0.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (0, 2)")
        if self.n > 1 and self.family != "stable":
            raise NotImplementedError("only the stable family is supported for n >= 2")
        if self.axis_alphas is not None:
            if len(self.axis_alphas) != self.n or not all(0 < a < 2 for a in self.axis_alphas):
                raise ValueError("axis_alphas needs one exponent in (0, 2) per coordinate")
        object.__setattr__(self, "_kernel", self._build_kernel())
        self._audit()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def stable(cls, alpha: float, n: int = 1, intensity: float | None = None, **kw) -> "LevyMeasureModel":
        """Stable measure; ``intensity=None`` normalizes the symbol to ``|ξ|^alpha``."""
        if intensity is None:
            intensity = unit_symbol_intensity(alpha, n)
        return cls("stable", alpha=alpha, intensity=intensity, n=n, **kw)

    @classmethod
    def tempered(cls, alpha: float, temper: float, intensity: float = 1.0, **kw) -> "LevyMeasureModel":
        return cls("tempered", alpha=alpha, temper=temper, intensity=intensity, **kw)

    @classmethod
    def truncated(cls, alpha: float, cutoff: float, intensity: float = 1.0, **kw) -> "LevyMeasureModel":
        return cls("truncated", alpha=alpha, cutoff=cutoff, intensity=intensity, **kw)

    @classmethod
    def tabulated(cls, r: Sequence[float], density: Sequence[float], intensity: float = 1.0, **kw) -> "LevyMeasureModel":
        return cls("tabulated", table_r=np.asarray(r, float), table_density=np.asarray(density, float),
                   intensity=intensity, **kw)

    @classmethod
    def axis_stable(cls, alphas: Sequence[float], intensity: float = 1.0, **kw) -> "LevyMeasureModel":
        alphas = tuple(float(a) for a in alphas)
        return cls("stable", alpha=min(alphas), intensity=intensity, n=len(alphas), axis_alphas=alphas, **kw)

    @classmethod
    def from_config(cls, cfg: dict) -> "LevyMeasureModel":
        cfg = dict(cfg)
        family = cfg.pop("family")
        if family == "stable" and "axis_alphas" in cfg:
            return cls.axis_stable(cfg.pop("axis_alphas"), **cfg)
        if family == "stable":
            return cls.stable(cfg.pop("alpha"), n=cfg.pop("n", 1), intensity=cfg.pop("intensity", None), **cfg)
        if family == "tabulated":
            return cls.tabulated(cfg.pop("r"), cfg.pop("density"), **cfg)
        return cls(family, **cfg)

    # -- internals ------------------------------------------------------------
    def _build_kernel(self) -> _Kernel1D:
        a = self.alpha
        if self.family == "stable":
            weight = self.intensity * sphere_projection_constant(a, self.n)
            return _Kernel1D(lambda s: s ** (-1.0 - a), weight, alpha=a)
        if self.family == "tempered":
            if not (self.temper and self.temper > 0):
                raise ValueError("tempered family needs temper > 0")
            lam = self.temper
            return _Kernel1D(lambda s: np.exp(-lam * s) * s ** (-1.0 - a), self.intensity)
        if self.family == "truncated":
            if not (self.cutoff and self.cutoff > 0):
                raise ValueError("truncated family needs cutoff > 0")
            return _Kernel1D(lambda s: s ** (-1.0 - a), self.intensity, support_max=self.cutoff)
        return self._tabulated_kernel()

    def _tabulated_kernel(self) -> _Kernel1D:
        r, g = self.table_r, self.table_density
        if r is None or g is None or len(r) != len(g) or len(r) < 4:
            raise ValueError("tabulated family needs matching arrays of at least 4 samples")
        if np.any(np.diff(r) <= 0) or r[0] <= 0 or np.any(g <= 0):
            raise ValueError("tabulated radii must be increasing and positive, densities positive")
        lr, lg = np.log(r), np.log(g)
        lo_slope = (lg[1] - lg[0]) / (lr[1] - lr[0])
        hi_slope = (lg[-1] - lg[-2]) / (lr[-1] - lr[-2])
        # ∫(1 ∧ h²) μ(dh) < ∞ needs g = o(s^{-3}) at 0 and g = o(s^{-1}) at ∞
        if lo_slope <= -3.0 or hi_slope >= -1.0:
            raise ValueError(
                f"tabulated density is not a Lévy measure: end slopes {lo_slope:.3f} (need > -3), "
                f"{hi_slope:.3f} (need < -1)")

        def shape(s):
            ls = np.log(s)
            out = np.interp(ls, lr, lg)
            out = np.where(ls < lr[0], lg[0] + lo_slope * (ls - lr[0]), out)
            out = np.where(ls > lr[-1], lg[-1] + hi_slope * (ls - lr[-1]), out)
            return np.exp(out)

        object.__setattr__(self, "alpha", float(-1.0 - lo_slope))
        return _Kernel1D(shape, self.intensity, breakpoints=tuple(r[1:-1]))

    def _audit(self, x_grid=None, h_grid=None):
        x_grid = np.linspace(-10.0, 10.0, 41) if x_grid is None else x_grid
        h_grid = np.concatenate([-np.logspace(-4, 2, 25), np.logspace(-4, 2, 25)]) if h_grid is None else h_grid
        asym = False
        if self.drift is not None:
            vals = np.array([np.linalg.norm(np.atleast_1d(self.drift(x))) for x in x_grid])
            if np.any(vals > self.drift_bound * (1 + 1e-12)):
                raise ValueError(f"drift exceeds declared bound {self.drift_bound}")
            asym = bool(np.any(vals > 0))
        c2, c3 = self.modulation_bounds
        if not 0 < c2 <= c3:
            raise ValueError("modulation bounds must satisfy 0 < c2 <= c3")
        if self.modulation is not None:
            X, H = np.meshgrid(x_grid, h_grid, indexing="ij")
            m = np.vectorize(self.modulation)(X, H)
            if np.any(m < c2 * (1 - 1e-12)) or np.any(m > c3 * (1 + 1e-12)):
                raise ValueError(f"modulation leaves declared bounds [{c2}, {c3}]")
            m_flip = np.vectorize(self.modulation)(X, -H)
            asym = asym or not np.allclose(m, m_flip)
        if not 0 < self.holder_index <= 1:
            raise ValueError("Hölder index must lie in (0, 1]")
        if asym and not self.alpha > 1:
            raise ValueError("a non-symmetric generator (drift or asymmetric m) requires alpha > 1")

    @property
    def kernel(self) -> _Kernel1D:
        """The one-dimensional Lévy density for ``n = 1``."""
        return self._kernel

    @property
    def is_homogeneous(self) -> bool:
        return self.family == "stable"

    def _components(self, xi) -> list:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.n,):
            raise ValueError(f"frequency must have {self.n} components")
        if not np.all(np.isfinite(xi)):
            raise ValueError("frequency must be finite")
        if self.axis_alphas is not None:
            return [(_Kernel1D(lambda s, a=a: s ** (-1.0 - a), self.intensity, alpha=a), abs(x))
                    for a, x in zip(self.axis_alphas, xi)]
        return [(self._kernel, float(np.linalg.norm(xi)))]

    def _unit_values(self, fn) -> list:
        """``(alpha_i, value at unit frequency)`` per homogeneous component."""
        if self.axis_alphas is not None:
            return [(a, fn(_Kernel1D(lambda s, a=a: s ** (-1.0 - a), self.intensity, alpha=a), 1.0))
                    for a in self.axis_alphas]
        return [(self.alpha, fn(self._kernel, 1.0))]


def eval_q(model: LevyMeasureModel, xi) -> float:
    """``q(ξ) = ∫ (1 - cos(ξ·h)) μ(dh)``."""
    return sum(_q1d(k, x) for k, x in model._components(xi))


def eval_qU(model: LevyMeasureModel, xi) -> float:
    """``q^U(ξ) = ∫ ((ξ·h)² ∧ 1) μ(dh)``."""
    return sum(_qU1d(k, x) for k, x in model._components(xi))


def eval_qL(model: LevyMeasureModel, xi) -> float:
    """``q^L(ξ) = ∫_{0 < |ξ·h| <= 1} (ξ·h)² μ(dh)``."""
    return sum(_qL1d(k, x) for k, x in model._components(xi))


# -- sphere sweeps ----------------------------------------------------------

def sphere_lattice(n: int, points: int = 512) -> np.ndarray:
    """Deterministic, roughly uniform directions on the unit sphere of ``R^n``."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2.0 * np.pi * np.arange(points) / points
        return np.column_stack([np.cos(th), np.sin(th)])
    if n == 3:
        k = np.arange(points) + 0.5
        z = 1.0 - 2.0 * k / points
        phi = np.pi * (1.0 + 5 ** 0.5) * k
        rho = np.sqrt(1.0 - z * z)
        return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    u = qmc.Sobol(n, scramble=False).random(points)
    v = special.ndtri(np.clip(u, 1e-9, 1 - 1e-9))
    v[0] = np.ones(n)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _homogeneous_sweep(model: LevyMeasureModel, r: float, which: str, points: int, refine: bool):
    """Sup (``which='max'``) or inf of ``q^U`` / ``q^L`` over the sphere, for stable models."""
    fn = _qU1d if which == "max" else _qL1d
    units = model._unit_values(fn)

    def value(ell):
        ell = np.atleast_2d(ell)
        if model.axis_alphas is None:
            a, u = units[0]
            return np.full(len(ell), u * r ** a)
        return sum(u * (r * np.abs(ell[:, i])) ** a for i, (a, u) in enumerate(units))

    dirs = sphere_lattice(model.n, points)
    vals = value(dirs)
    i = int(np.argmax(vals) if which == "max" else np.argmin(vals))
    best = float(vals[i])
    if refine and model.axis_alphas is not None:
        sign = -1.0 if which == "max" else 1.0
        obj = lambda v: sign * float(value(v / np.linalg.norm(v))[0])
        res = optimize.minimize(obj, dirs[i], method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13 * max(abs(best), 1e-300)})
        cand = sign * res.fun
        best = max(best, cand) if which == "max" else min(best, cand)
    return best


def q_star(model: LevyMeasureModel, r: float, sphere_points: int = 512, refine: bool = True) -> float:
    """``q^*(r) = sup_{|ℓ|=1} q^U(rℓ)``."""
    if not r > 0:
        raise ValueError("r must be positive")
    if model.n == 1:
        return eval_qU(model, r)
    return _homogeneous_sweep(model, r, "max", sphere_points, refine)


def qL_inf(model: LevyMeasureModel, r: float, sphere_points: int = 512, refine: bool = True) -> float:
    """``inf_{|ℓ|=1} q^L(rℓ)``."""
    if model.n == 1:
        return eval_qL(model, r)
    return _homogeneous_sweep(model, r, "min", sphere_points, refine)


def log_grid(r_min: float, r_max: float, per_decade: int = 64) -> np.ndarray:
    decades = math.log10(r_max / r_min)
    return np.logspace(math.log10(r_min), math.log10(r_max), int(round(decades * per_decade)) + 1)


class KappaEstimate(NamedTuple):
    kappa: float
    holds: bool

    @property
    def alpha(self) -> float:
        return 2.0 / self.kappa if self.holds else 0.0


def _kappa_from(r, qstar, qlinf) -> KappaEstimate:
    sel = r >= 1.0 - 1e-12
    num, den = qstar[sel], qlinf[sel]
    if den.size == 0 or np.any(den <= 0):
        return KappaEstimate(math.inf, False)
    kappa = max(float(np.max(num / den)), 1.0)
    return KappaEstimate(kappa, bool(np.isfinite(kappa)))


def comparison_kappa(model: LevyMeasureModel, r_max: float = 1e6, per_decade: int = 64,
                     sphere_points: int = 512) -> KappaEstimate:
    """Smallest ``κ`` with ``q^*(r) <= κ inf_ℓ q^L(rℓ)`` on a log grid of ``[1, r_max]``.

    A finite grid can only falsify the comparison, so ``holds`` means
    "holds on the audited range".
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    r = log_grid(1.0, r_max, per_decade) if r_max > 1 else np.array([1.0])
    qs = np.array([q_star(model, x, sphere_points) for x in r])
    ql = np.array([qL_inf(model, x, sphere_points) for x in r])
    return _kappa_from(r, qs, ql)


# -- tabulated profile ------------------------------------------------------

def _fit_slope(lr, lv):
    if len(lr) < 2:
        return 0.0
    return float(np.polyfit(lr, lv, 1)[0])


@dataclass(frozen=True, eq=False)
class SymbolProfile:
    """Tabulated ``q``, ``q^U``, ``q^L``, ``q^*`` on a log-spaced radius grid.

    Between nodes values are interpolated linearly in log-log coordinates;
    outside the grid they are extended by power laws fitted on the end decades.
    For ``n >= 2`` the ``q``/``q^U``/``q^L`` columns are taken along the first
    coordinate axis and ``qL_inf`` holds the spherical infimum of ``q^L``.
    """

    r: np.ndarray
    qstar: np.ndarray
    n: int = 1
    q: Optional[np.ndarray] = None
    qU: Optional[np.ndarray] = None
    qL: Optional[np.ndarray] = None
    qL_inf: Optional[np.ndarray] = None
    kappa: Optional[float] = None
    kappa_holds: Optional[bool] = None
    envelope: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.r, float)
        qs = np.asarray(self.qstar, float)
        if r.ndim != 1 or len(r) < 2 or np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("radius grid must be increasing and positive")
        if qs.shape != r.shape or np.any(qs < 0) or not np.all(np.isfinite(qs)):
            raise ValueError("q* values must be finite, nonnegative and match the grid")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "qstar", qs)
        object.__setattr__(self, "envelope", np.maximum.accumulate(qs))

    @classmethod
    def from_function(cls, qstar_fn: Callable, n: int = 1, r_min: float = 1e-4, r_max: float = 1e6,
                      per_decade: int = 64) -> "SymbolProfile":
        """Synthetic profile with ``q = q^U = q^*`` given by ``qstar_fn``."""
        r = log_grid(r_min, r_max, per_decade)
        v = np.asarray(qstar_fn(r), dtype=float) * np.ones_like(r)
        return cls(r=r, qstar=v, n=n, q=v, qU=v)

    @classmethod
    def from_power(cls, alpha: float, coef: float = 1.0, **kw) -> "SymbolProfile":
        return cls.from_function(lambda r: coef * r ** alpha, **kw)

    # interpolation ------------------------------------------------------------
    def _interp(self, values: np.ndarray, x, monotone: bool = False):
        x = np.asarray(x, dtype=float)
        vals = np.maximum.accumulate(values) if monotone else values
        if np.any(vals <= 0):
            vals = np.maximum(vals, np.finfo(float).tiny)
        lr, lv = np.log(self.r), np.log(vals)
        lx = np.log(x)
        out = np.interp(lx, lr, lv)
        lo, hi = self._end_slopes(values, monotone)
        out = np.where(lx < lr[0], lv[0] + lo * (lx - lr[0]), out)
        out = np.where(lx > lr[-1], lv[-1] + hi * (lx - lr[-1]), out)
        out = np.exp(out)
        return out if out.ndim else float(out)

    def _end_slopes(self, values, monotone):
        key = (id(values), monotone)
        cache = self.__dict__.setdefault("_slope_cache", {})
        if key not in cache:
            vals = np.maximum.accumulate(values) if monotone else values
            vals = np.maximum(vals, np.finfo(float).tiny)
            lr, lv = np.log(self.r), np.log(vals)
            width = math.log(10.0)
            lo_sel = lr <= lr[0] + width
            hi_sel = lr >= lr[-1] - width
            cache[key] = (_fit_slope(lr[lo_sel], lv[lo_sel]), _fit_slope(lr[hi_sel], lv[hi_sel]))
        return cache[key]

    def qstar_at(self, x):
        """Monotone envelope of ``q^*`` at radius ``x``."""
        return self._interp(self.qstar, x, monotone=True)

    def q_at(self, x):
        return self._interp(self.q if self.q is not None else self.qstar, x)

    def qU_at(self, x):
        return self._interp(self.qU if self.qU is not None else self.qstar, x)

    @property
    def r_min(self) -> float:
        return float(self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def alpha_index(self) -> float:
        """``2/κ`` when κ is known, else the lower power index of the profile."""
        if self.kappa is not None and self.kappa_holds:
            return 2.0 / self.kappa
        return power_envelope(self).alpha

    def table(self) -> dict:
        cols = {"r": self.r, "q": self.q, "qU": self.qU, "qL": self.qL, "qstar": self.qstar}
        return {k: v for k, v in cols.items() if v is not None}


def build_profile(model: LevyMeasureModel, r_min: float = 1e-4, r_max: float = 1e6,
                  per_decade: int = 64, sphere_points: int = 512) -> SymbolProfile:
    """Tabulate all symbol quantities of ``model`` and estimate ``κ`` on ``[1, r_max]``."""
    r = log_grid(r_min, r_max, per_decade)
    e1 = np.eye(model.n)[0]
    q = np.array([eval_q(model, x * e1) for x in r])
    if model.n == 1:
        qU = np.array([eval_qU(model, x) for x in r])
        qL = np.array([eval_qL(model, x) for x in r])
        qs, ql_inf = qU, qL
    else:
        qU = np.array([eval_qU(model, x * e1) for x in r])
        qL = np.array([eval_qL(model, x * e1) for x in r])
        qs = np.array([q_star(model, x, sphere_points) for x in r])
        ql_inf = np.array([qL_inf(model, x, sphere_points) for x in r])
    kappa = _kappa_from(r, qs, ql_inf)
    return SymbolProfile(r=r, qstar=qs, n=model.n, q=q, qU=qU, qL=qL, qL_inf=ql_inf,
                         kappa=kappa.kappa, kappa_holds=kappa.holds)


def rho(profile: SymbolProfile, t: float, rtol: float = 1e-10) -> float:
    """Generalized inverse ``ρ_t = inf{r > 0 : q^*(r) >= 1/t}``."""
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    target = 1.0 / t
    env = profile.envelope
    if target > env[-1]:
        warnings.warn(f"1/t = {target:g} above tabulated q*; power-law extrapolation", ExtrapolationWarning)
        _, hi = profile._end_slopes(profile.qstar, True)
        if hi <= 0:
            return math.inf
        return profile.r_max * (target / env[-1]) ** (1.0 / hi)
    if target <= env[0]:
        lo, _ = profile._end_slopes(profile.qstar, True)
        if target == env[0] or lo <= 0:
            return profile.r_min
        warnings.warn(f"1/t = {target:g} below tabulated q*; power-law extrapolation", ExtrapolationWarning)
        return profile.r_min * (target / env[0]) ** (1.0 / lo)
    k = int(np.searchsorted(env, target, side="left"))  # env[k-1] < target <= env[k]
    a, b = math.log(profile.r[k - 1]), math.log(profile.r[k])
    while b - a > rtol:
        mid = 0.5 * (a + b)
        if profile.qstar_at(math.exp(mid)) >= target:
            b = mid
        else:
            a = mid
    return math.exp(b)


class PowerEnvelope(NamedTuple):
    alpha: float
    beta: float
    c_lower: float
    c_upper: float
    degenerate: bool


def power_envelope(profile: SymbolProfile, min_points: int = 8) -> PowerEnvelope:
    """Two-sided sandwich ``c_lower r^alpha <= q(r) <= c_upper r^beta`` on the grid ``r >= 1``.

    ``alpha``/``beta`` are the extreme local log-log slopes (centered differences).
    """
    values = profile.q if profile.q is not None else profile.qstar
    sel = profile.r >= 1.0 - 1e-12
    r, v = profile.r[sel], values[sel]
    if len(r) < min_points:
        raise InsufficientDataError(f"need at least {min_points} grid points with r >= 1, got {len(r)}")
    if np.any(v <= 0):
        raise ValueError("profile must be positive on r >= 1")
    slopes = np.gradient(np.log(v), np.log(r))
    alpha, beta = float(np.min(slopes)), float(np.max(slopes))
    if abs(alpha) < 1e-10:
        alpha = 0.0
    if abs(beta) < 1e-10:
        beta = 0.0
    c_lower = float(np.min(v / r ** alpha))
    c_upper = float(np.max(v / r ** beta))
    return PowerEnvelope(alpha, beta, c_lower, c_upper, degenerate=beta <= 0.0)
