"""Measurable-function models: analytic tails, monotone maps, weighted samples.

A function enters the library in one of three forms:

* an analytic tail family (the map t -> mass(|f| >= t) has a closed form),
* a pointwise nonincreasing map on (0, total_mass), which is then its own
  decreasing rearrangement,
* an empirical sample of nonnegative magnitudes with positive mass weights.

All tail evaluators are vectorized and clipped into [0, total_mass].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .numerics import DEFAULT_GRID, GridConfig, monotone_inverse


@dataclass(frozen=True)
class MeasureSpace:
    """Sigma-finite measure space reduced to what the functionals see."""

    total_mass: float = 1.0
    atomless: bool = True

    def __post_init__(self):
        if not (self.total_mass > 0.0):
            raise ValueError("total_mass must be positive")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.total_mass)


PROBABILITY = MeasureSpace(1.0, True)


class TailFunction:
    """Nonincreasing map t -> mass of {|f| >= t}, values in [0, total_mass].

    ``support`` hints the t-range outside which the value saturates at
    total_mass (below) or 0 (above); ``seeds`` are abscissas where the
    tail has kinks or jumps, fed to scans and quadratures.
    """

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        measure: MeasureSpace = PROBABILITY,
        *,
        support: tuple[float, float] = (0.0, math.inf),
        seeds: Sequence[float] = (),
        inverse: Callable[[np.ndarray], np.ndarray] | None = None,
        label: str = "tail",
    ):
        self._fn = fn
        self.measure = measure
        self.support = support
        self.seeds = tuple(seeds)
        self._inverse = inverse
        self.label = label

    def __call__(self, t) -> np.ndarray:
        t_arr = np.maximum(np.asarray(t, dtype=float), 0.0)
        with np.errstate(all="ignore"):
            v = np.asarray(self._fn(t_arr), dtype=float)
        return np.clip(v, 0.0, self.measure.total_mass)

    def inverse_at(self, levels, *, cfg: GridConfig = DEFAULT_GRID) -> np.ndarray:
        """Generalized left inverse inf{t : T(t) <= level} (the rearrangement)."""
        if self._inverse is not None:
            lv = np.asarray(levels, dtype=float)
            with np.errstate(all="ignore"):
                v = np.asarray(self._inverse(lv), dtype=float)
            return np.maximum(v, 0.0)
        hint = self.support[1] if math.isfinite(self.support[1]) else 1.0
        return monotone_inverse(self.__call__, np.asarray(levels, dtype=float),
                                upper_hint=max(hint, 1.0), cfg=cfg)


class FunctionSpec:
    """Base for the three presentations of a measurable function."""

    measure: MeasureSpace
    label: str = "f"

    def tail(self) -> TailFunction:
        raise NotImplementedError

    def scaled(self, lam: float) -> "FunctionSpec":
        raise NotImplementedError


# ---------------------------------------------------------------------------
# analytic tail families


def _sv_eval(sv, z):
    if sv is None:
        return np.ones_like(np.asarray(z, dtype=float))
    return sv(z)


def _pareto_log_join(p: float, log_exp: float, sv) -> float:
    """Smallest z = log(t/scale) after which the tail expression is a valid,
    <= 1, decreasing branch."""

    def expr(z):
        return math.exp(-p * z) * z**log_exp * float(_sv_eval(sv, np.array([z]))[0])

    z_min = max(1.0, log_exp / p + 0.5)
    if expr(z_min) <= 1.0:
        return z_min
    z_hi = z_min
    while expr(z_hi) > 1.0:
        z_hi *= 2.0
        if z_hi > 1e6:
            raise ValueError("pareto_log tail never drops below total mass")
    return brentq(lambda z: expr(z) - 1.0, z_min, z_hi, xtol=1e-14)


@dataclass
class AnalyticTailSpec(FunctionSpec):
    """Function given through a named closed-form tail family."""

    family: str
    params: dict = field(default_factory=dict)
    measure: MeasureSpace = PROBABILITY
    label: str = ""

    def __post_init__(self):
        if self.family not in _TAIL_BUILDERS:
            raise ValueError(f"unknown tail family '{self.family}'")
        if not self.label:
            pieces = ",".join(f"{k}={v}" for k, v in self.params.items() if not callable(v))
            self.label = f"{self.family}({pieces})"
        self._cache: TailFunction | None = None

    def tail(self) -> TailFunction:
        if self._cache is None:
            self._cache = _TAIL_BUILDERS[self.family](self.params, self.measure, self.label)
        return self._cache

    def scaled(self, lam: float) -> "AnalyticTailSpec":
        if lam <= 0.0:
            raise ValueError("scale factor must be positive")
        params = dict(self.params)
        params["scale"] = lam * params.get("scale", 1.0)
        return AnalyticTailSpec(self.family, params, self.measure)


def _build_exp(params, measure, label):
    theta = params.get("scale", 1.0)
    mass = measure.total_mass
    return TailFunction(
        lambda t: mass * np.exp(-t / theta),
        measure,
        inverse=lambda s: theta * np.abs(np.log(np.maximum(s, 5e-324) / mass)),
        label=label,
    )


def _build_gauss(params, measure, label):
    sigma = params.get("sigma", 1.0) * params.get("scale", 1.0)
    mass = measure.total_mass
    return TailFunction(
        lambda t: mass * np.exp(-((t / sigma) ** 2)),
        measure,
        inverse=lambda s: sigma * np.sqrt(np.abs(np.log(np.maximum(s, 5e-324) / mass))),
        label=label,
    )


def _build_exp_power(params, measure, label):
    q = params["q"]
    theta = params.get("scale", 1.0)
    mass = measure.total_mass
    if q <= 0:
        raise ValueError("exp_power exponent must be positive")
    return TailFunction(
        lambda t: mass * np.exp(-((t / theta) ** q)),
        measure,
        inverse=lambda s: theta * np.abs(np.log(np.maximum(s, 5e-324) / mass)) ** (1.0 / q),
        label=label,
    )


def _build_pareto(params, measure, label):
    p = params["p"]
    k = params.get("scale", 1.0)
    mass = measure.total_mass
    if p <= 0:
        raise ValueError("pareto exponent must be positive")

    def tail(t):
        with np.errstate(divide="ignore", over="ignore"):
            return np.minimum(mass, (np.maximum(t, 5e-324) / k) ** -p)

    return TailFunction(
        tail,
        measure,
        seeds=(k * mass ** (-1.0 / p),),
        inverse=lambda s: k * np.maximum(s, 5e-324) ** (-1.0 / p),
        label=label,
    )


def _build_pareto_log(params, measure, label):
    p = params["p"]
    log_exp = params.get("log_exp", 0.0)
    sv = params.get("sv")
    k = params.get("scale", 1.0)
    mass = measure.total_mass
    if not measure.finite:
        raise ValueError("pareto_log is defined on finite-mass spaces")
    z_join = _pareto_log_join(p, log_exp, sv)
    t_join = k * math.exp(z_join)

    def tail(t):
        t_arr = np.asarray(t, dtype=float)
        z = np.log(np.maximum(t_arr, 5e-324) / k)
        with np.errstate(all="ignore"):
            branch = np.exp(-p * z) * np.where(z > 0, z, 1.0) ** log_exp * _sv_eval(sv, np.maximum(z, 1.0))
        return np.where(t_arr <= t_join, mass, mass * branch)

    return TailFunction(tail, measure, seeds=(t_join,), label=label)


def _build_indicator(params, measure, label):
    delta = params["delta"]
    height = params.get("height", 1.0) * params.get("scale", 1.0)
    mass = measure.total_mass
    if not (0.0 < delta <= mass):
        raise ValueError("indicator mass must lie in (0, total_mass]")

    def tail(t):
        t_arr = np.asarray(t, dtype=float)
        return np.where(t_arr <= 0.0, mass, np.where(t_arr <= height, delta, 0.0))

    def inverse(s):
        s_arr = np.asarray(s, dtype=float)
        return np.where(s_arr < delta, height, 0.0)

    return TailFunction(
        tail, measure, support=(0.0, height), seeds=(height,), inverse=inverse, label=label
    )


def _build_constant(params, measure, label):
    c = params["c"] * params.get("scale", 1.0)
    mass = measure.total_mass
    return TailFunction(
        lambda t: np.where(np.asarray(t, dtype=float) <= c, mass, 0.0),
        measure,
        support=(0.0, c),
        seeds=(c,),
        inverse=lambda s: np.where(np.asarray(s, dtype=float) < mass, c, 0.0),
        label=label,
    )


_TAIL_BUILDERS = {
    "exp": _build_exp,
    "gauss": _build_gauss,
    "exp_power": _build_exp_power,
    "pareto": _build_pareto,
    "pareto_log": _build_pareto_log,
    "indicator": _build_indicator,
    "constant": _build_constant,
}


def exp_tail_spec(theta: float = 1.0, measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("exp", {"scale": theta}, measure)


def gauss_tail_spec(sigma: float = 1.0, measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("gauss", {"sigma": sigma}, measure)


def exp_power_tail_spec(q: float, theta: float = 1.0,
                        measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("exp_power", {"q": q, "scale": theta}, measure)


def pareto_spec(p: float, scale: float = 1.0,
                measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("pareto", {"p": p, "scale": scale}, measure)


def pareto_log_spec(p: float, log_exp: float = 0.0, sv=None, scale: float = 1.0,
                    measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec(
        "pareto_log", {"p": p, "log_exp": log_exp, "sv": sv, "scale": scale}, measure
    )


def indicator_spec(delta: float, height: float = 1.0,
                   measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("indicator", {"delta": delta, "height": height}, measure)


def constant_spec(c: float, measure: MeasureSpace = PROBABILITY) -> AnalyticTailSpec:
    return AnalyticTailSpec("constant", {"c": c}, measure)


# ---------------------------------------------------------------------------
# pointwise monotone presentation


@dataclass
class PointwiseMonotoneSpec(FunctionSpec):
    """Closed-form nonincreasing map on (0, total_mass); equals its own
    decreasing rearrangement."""

    func: Callable[[np.ndarray], np.ndarray]
    measure: MeasureSpace = PROBABILITY
    seeds: tuple = ()
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    label: str = "pointwise"

    def __post_init__(self):
        if not self.measure.finite:
            raise ValueError("pointwise specs require a finite-mass space")
        mass = self.measure.total_mass
        probes = mass * np.array([1e-9, 1e-6, 1e-3, 0.1, 0.3, 0.5, 0.7, 0.9, 1 - 1e-6])
        with np.errstate(all="ignore"):
            vals = np.asarray(self.func(probes), dtype=float)
        ok = ~np.isnan(vals)
        if np.any(np.diff(vals[ok]) > 1e-9 * (1.0 + np.abs(vals[ok][:-1]))):
            raise ValueError("pointwise map is not nonincreasing on its domain")

    def tail(self) -> TailFunction:
        mass = self.measure.total_mass
        if self.inverse is not None:
            inv = self.inverse
            return TailFunction(lambda t: inv(t), self.measure, label=f"tail[{self.label}]",
                                seeds=tuple(float(self.func(np.array([s]))[0]) for s in self.seeds))

        def tail(t):
            return monotone_inverse(self.func, np.asarray(t, dtype=float), upper_hint=mass)

        return TailFunction(tail, self.measure, label=f"tail[{self.label}]")

    def scaled(self, lam: float) -> "PointwiseMonotoneSpec":
        f = self.func
        inv = self.inverse
        return PointwiseMonotoneSpec(
            lambda s: lam * f(s),
            self.measure,
            self.seeds,
            (lambda t: inv(np.asarray(t, dtype=float) / lam)) if inv is not None else None,
            label=f"{lam}*{self.label}",
        )


def power_singularity_spec(p: float, measure: MeasureSpace = PROBABILITY) -> PointwiseMonotoneSpec:
    """x -> x^(-1/p) on (0, mass): the canonical heavy-tail pointwise spec."""
    mass = measure.total_mass

    def inverse(t):
        with np.errstate(divide="ignore", over="ignore"):
            return np.minimum(mass, np.maximum(t, 5e-324) ** -p)

    return PointwiseMonotoneSpec(
        lambda s: np.maximum(s, 5e-324) ** (-1.0 / p),
        measure,
        inverse=inverse,
        label=f"x^(-1/{p})",
    )


def log_singularity_spec(m: float = 1.0, sv=None,
                         measure: MeasureSpace = PROBABILITY) -> PointwiseMonotoneSpec:
    """x -> |log x|^m * l(|log x|) on (0, 1); l must keep the map monotone."""

    def func(s):
        z = np.abs(np.log(np.maximum(s, 5e-324)))
        return z**m * _sv_eval(sv, z)

    inverse = None
    if sv is None and m == 1.0:
        inverse = lambda t: np.exp(-np.maximum(np.asarray(t, dtype=float), 0.0))
    elif sv is None:
        inverse = lambda t: np.exp(-np.maximum(np.asarray(t, dtype=float), 0.0) ** (1.0 / m))
    return PointwiseMonotoneSpec(func, measure, inverse=inverse, label=f"|log x|^{m}")


def truncated_spec(base: PointwiseMonotoneSpec, b: float) -> PointwiseMonotoneSpec:
    """Restriction of a pointwise spec to its top slice of mass b (zero beyond)."""
    f = base.func

    def func(s):
        s_arr = np.asarray(s, dtype=float)
        return np.where(s_arr < b, f(s_arr), 0.0)

    return PointwiseMonotoneSpec(
        func, base.measure, seeds=base.seeds + (b,), label=f"{base.label}|top {b}"
    )


# ---------------------------------------------------------------------------
# empirical presentation


@dataclass
class EmpiricalSpec(FunctionSpec):
    """Weighted sample of |f| magnitudes; weights carry measure mass."""

    magnitudes: np.ndarray  # sorted descending
    weights: np.ndarray
    measure: MeasureSpace = PROBABILITY
    label: str = "sample"

    def __post_init__(self):
        m = np.asarray(self.magnitudes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if m.size == 0:
            raise ValueError("empirical spec needs at least one magnitude")
        if np.any(~np.isfinite(m)) or np.any(m < 0.0):
            raise ValueError("magnitudes must be finite and nonnegative")
        if np.any(w <= 0.0) or np.any(~np.isfinite(w)):
            raise ValueError("weights must be positive and finite")
        if not self.measure.finite:
            raise ValueError("empirical specs require a finite-mass space")
        total = float(np.sum(w))
        if abs(total - self.measure.total_mass) > 1e-9 * self.measure.total_mass:
            raise ValueError(
                f"weights sum to {total:.12g}, expected total mass "
                f"{self.measure.total_mass:.12g}"
            )
        order = np.argsort(-m, kind="stable")
        self.magnitudes = m[order]
        self.weights = w[order]
        self.cum_weights = np.cumsum(self.weights)
        self.cum_mass = np.cumsum(self.weights * self.magnitudes)

    def tail(self) -> TailFunction:
        return empirical_tail(self)

    def scaled(self, lam: float) -> "EmpiricalSpec":
        return EmpiricalSpec(self.magnitudes * lam, self.weights.copy(), self.measure,
                             label=f"{lam}*{self.label}")

    def lower_integral(self, t) -> np.ndarray:
        """Exact integral of the step rearrangement over (0, t]."""
        t_arr = np.minimum(np.asarray(t, dtype=float), self.measure.total_mass)
        idx = np.searchsorted(self.cum_weights, t_arr, side="left")
        idx = np.minimum(idx, len(self.magnitudes) - 1)
        prev_mass = np.where(idx > 0, self.cum_mass[np.maximum(idx - 1, 0)], 0.0)
        prev_w = np.where(idx > 0, self.cum_weights[np.maximum(idx - 1, 0)], 0.0)
        return prev_mass + np.maximum(t_arr - prev_w, 0.0) * self.magnitudes[idx]


def empirical_spec(values, weights=None, measure: MeasureSpace | None = None,
                   label: str = "sample") -> EmpiricalSpec:
    v = np.asarray(values, dtype=float)
    if weights is None:
        if measure is None:
            measure = PROBABILITY
        w = np.full(v.shape, measure.total_mass / v.size)
    else:
        w = np.asarray(weights, dtype=float)
        if measure is None:
            measure = MeasureSpace(float(np.sum(w)), atomless=False)
    return EmpiricalSpec(v, w, measure, label=label)


def empirical_tail(sample: EmpiricalSpec) -> TailFunction:
    """Survival step function: T(t) = total weight of magnitudes >= t (inclusive)."""
    asc = sample.magnitudes[::-1]
    suffix = np.concatenate([sample.cum_weights[::-1], [0.0]])
    mass = sample.measure.total_mass

    def tail_vec(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(asc, t_arr, side="left")
        out = suffix[idx]
        return out.reshape(np.shape(t)) if np.ndim(t) else out[0]

    def inverse(s):
        s_arr = np.atleast_1d(np.asarray(s, dtype=float))
        idx = np.searchsorted(sample.cum_weights, s_arr, side="right")
        vals = np.where(idx < len(sample.magnitudes), sample.magnitudes[np.minimum(idx, len(sample.magnitudes) - 1)], 0.0)
        return vals.reshape(np.shape(s)) if np.ndim(s) else vals[0]

    return TailFunction(
        tail_vec,
        sample.measure,
        support=(float(asc[0]), float(asc[-1])),
        seeds=tuple(np.unique(sample.magnitudes)),
        inverse=inverse,
        label=f"tail[{sample.label}]",
    )


def pareto_sample(n: int, p: float, *, scale: float = 1.0, seed: int = 0,
                  measure: MeasureSpace = PROBABILITY) -> EmpiricalSpec:
    """Inverse-transform sample with survival function min(1, (t/scale)^-p)."""
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    u = np.maximum(u, 1e-300)
    return empirical_spec(scale * u ** (-1.0 / p), None, measure,
                          label=f"pareto_sample(p={p},n={n},seed={seed})")


@dataclass
class MonotoneCurve:
    """Tabulated monotone curve with linear interpolation between nodes."""

    abscissas: np.ndarray
    values: np.ndarray
    direction: str = "decreasing"
    endpoint_lower: str = "finite"
    endpoint_upper: str = "finite"

    def __post_init__(self):
        x = np.asarray(self.abscissas, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("curve needs matching 1-d abscissas and values")
        if np.any(np.diff(x) <= 0.0):
            raise ValueError("abscissas must be strictly increasing")
        d = np.diff(y)
        if self.direction == "decreasing" and np.any(d > 1e-12):
            raise ValueError("values are not nonincreasing")
        if self.direction == "increasing" and np.any(d < -1e-12):
            raise ValueError("values are not nondecreasing")
        self.abscissas = x
        self.values = y

    def __call__(self, t) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self.abscissas, self.values)
