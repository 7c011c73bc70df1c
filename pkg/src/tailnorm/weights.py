"""Weights for weak and Marcinkiewicz functionals.

A weight is a continuous, strictly increasing map on (0, total_mass)
vanishing at 0.  The blow-up clause at the right endpoint is treated as
advisory on finite-mass spaces: power weights on a probability space are
accepted even though they stay bounded at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import FunctionSpec, MeasureSpace, MonotoneCurve, PROBABILITY
from .numerics import (
    DEFAULT_GRID,
    GridConfig,
    NormResult,
    RunningLowerIntegral,
    increasing_inverse,
    supremum_scan,
)
from .rearrangement import Rearrangement, rearrange


class SlowlyVarying:
    """Slowly varying factor: l(lam*z)/l(z) -> 1 at the relevant end.

    Families: ``const`` (c), ``logpow`` (|log z|^kappa, natural near 0),
    ``logshift`` ((log(e+z))^kappa, positive everywhere, natural at
    infinity), and ``tabulated``.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], family: str, params: dict):
        self._fn = fn
        self.family = family
        self.params = dict(params)

    def __call__(self, z) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(np.asarray(z, dtype=float)), dtype=float)

    def spot_check(self, end: str = "zero", factors=(2.0, 10.0)) -> dict:
        """Numeric slow-variation check at one end; deviations should shrink."""
        if end == "zero":
            base = np.array([1e-4, 1e-8, 1e-12])
        else:
            base = np.array([1e4, 1e8, 1e12])
        out = {}
        for lam in factors:
            ratios = self(lam * base) / self(base)
            out[lam] = tuple(float(abs(r - 1.0)) for r in ratios)
        return out

    def __repr__(self):
        return f"SlowlyVarying({self.family}, {self.params})"


def sv_constant(c: float = 1.0) -> SlowlyVarying:
    return SlowlyVarying(lambda z: np.full_like(np.asarray(z, dtype=float), c),
                         "const", {"c": c})


def sv_log_power(kappa: float) -> SlowlyVarying:
    return SlowlyVarying(
        lambda z: np.abs(np.log(np.maximum(np.asarray(z, dtype=float), 5e-324))) ** kappa,
        "logpow", {"kappa": kappa},
    )


def sv_log_shifted(kappa: float) -> SlowlyVarying:
    return SlowlyVarying(
        lambda z: np.log(math.e + np.maximum(np.asarray(z, dtype=float), 0.0)) ** kappa,
        "logshift", {"kappa": kappa},
    )


def sv_tabulated(curve: MonotoneCurve) -> SlowlyVarying:
    return SlowlyVarying(curve, "tabulated", {})


class Weight:
    """Strictly increasing weight on (0, total_mass) with w(0+) = 0."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        *,
        measure: MeasureSpace = PROBABILITY,
        inverse: Callable[[np.ndarray], np.ndarray] | None = None,
        family: str = "custom",
        params: dict | None = None,
        seeds: Sequence[float] = (),
        label: str = "",
    ):
        self._fn = fn
        self.measure = measure
        self._inverse = inverse
        self.family = family
        self.params = dict(params or {})
        self.seeds = tuple(seeds)
        self.label = label or f"{family}({','.join(f'{k}={v}' for k, v in self.params.items())})"

    def __call__(self, s) -> np.ndarray:
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(np.asarray(s, dtype=float)), dtype=float)

    @property
    def total_mass(self) -> float:
        return self.measure.total_mass

    def inverse_at(self, y) -> np.ndarray:
        """inf{s : w(s) >= y}, clipped into (0, total_mass)."""
        if self._inverse is not None:
            with np.errstate(all="ignore"):
                v = np.asarray(self._inverse(np.asarray(y, dtype=float)), dtype=float)
            return np.clip(v, 0.0, self.total_mass)
        hi = self.total_mass if self.measure.finite else 1e280
        return increasing_inverse(self.__call__, np.asarray(y, dtype=float),
                                  domain=(hi * 1e-300, hi * (1.0 - 1e-15) if self.measure.finite else hi))


def power_weight(p: float, measure: MeasureSpace = PROBABILITY) -> Weight:
    """w(s) = s^(1/p)."""
    if p <= 0.0:
        raise ValueError("power weight needs p > 0")
    return Weight(
        lambda s: np.maximum(np.asarray(s, dtype=float), 0.0) ** (1.0 / p),
        measure=measure,
        inverse=lambda y: np.maximum(np.asarray(y, dtype=float), 0.0) ** p,
        family="power",
        params={"p": p},
    )


def log_power_weight(p: float, kappa: float, measure: MeasureSpace = PROBABILITY) -> Weight:
    """w(s) = s^(1/p) |log s|^kappa near 0, continued as a pure power above the knee.

    The literal log-perturbed expression stops increasing once |log s|
    drops under p*kappa, so beyond s_knee = exp(-max(p*kappa, 1)) the
    weight continues as C * s^(1/p); the small-s asymptotics, which is
    what the perturbation is for, is untouched.
    """
    if p <= 0.0 or kappa < 0.0:
        raise ValueError("log-power weight needs p > 0and kappa >= 0")
    z_knee = max(p * kappa, 1.0)
    s_knee = math.exp(-z_knee)
    c = z_knee**kappa

    def fn(s):
        s_arr = np.maximum(np.asarray(s, dtype=float), 5e-324)
        z = np.abs(np.log(s_arr))
        return np.where(s_arr <= s_knee, s_arr ** (1.0 / p) * z**kappa,
                        c * s_arr ** (1.0 / p))

    return Weight(
        fn,
        measure=measure,
        family="logpower",
        params={"p": p, "kappa": kappa},
        seeds=(s_knee,),
    )


def scaled_weight(w: Weight, c: float) -> Weight:
    if c <= 0.0:
        raise ValueError("scale must be positive")
    inv = None
    if w._inverse is not None:
        inv = lambda y: w._inverse(np.asarray(y, dtype=float) / c)
    return Weight(lambda s: c * w(s), measure=w.measure, inverse=inv,
                  family="scaled", params={"c": c, "base": w.label}, seeds=w.seeds,
                  label=f"{c}*{w.label}")


def weight_from_callable(fn, measure: MeasureSpace = PROBABILITY, *, label: str = "custom",
                         seeds: Sequence[float] = ()) -> Weight:
    return Weight(fn, measure=measure, family="custom", label=label, seeds=seeds)


def natural_weight(g: FunctionSpec | Rearrangement, *, cfg: GridConfig = DEFAULT_GRID) -> Weight:
    """The weight 1/g* generated by an integrable nonzero g; its weak norm is 1.

    Rejects g whose rearrangement vanishes on an initial interval (the
    weight would be infinite there) and g outside L1.
    """
    rearr = g if isinstance(g, Rearrangement) else rearrange(g, cfg=cfg)
    mass = rearr.total_mass
    probe = float(rearr(np.array([mass * 1e-12]))[0])
    if not (probe > 0.0):
        raise ValueError("natural weight undefined: rearrangement vanishes near 0")
    head = rearr.head_result(mass * (1.0 - 1e-12) if math.isfinite(mass) else 1.0)
    if not head.is_finite:
        raise ValueError("natural weight requires an integrable (L1) generator")

    def fn(s):
        with np.errstate(divide="ignore"):
            return 1.0 / rearr(s)

    measure = rearr.measure if rearr.measure is not None else PROBABILITY
    return Weight(fn, measure=measure, family="natural",
                  params={"generator": rearr.label}, seeds=rearr.seeds,
                  label=f"natural[{rearr.label}]")


@dataclass
class WeightReport:
    """Structured validation outcome; advisories do not make a weight invalid."""

    valid: bool
    violations: list = field(default_factory=list)
    advisories: list = field(default_factory=list)
    details: dict = field(default_factory=dict)


def validate_weight(w: Weight, *, cfg: GridConfig = DEFAULT_GRID) -> WeightReport:
    """Grid validation: positivity, strict increase, vanishing at 0,
    advisory blow-up at total mass, and the induced-tail condition
    (w^-1(1/s) must be a valid tail function on the scanned range)."""
    violations: list[str] = []
    advisories: list[str] = []
    details: dict = {}
    mass = w.total_mass
    hi = mass if w.measure.finite else 1e12
    grid = np.unique(np.concatenate([
        np.logspace(-12, math.log10(hi * 0.5), 200) if hi > 0 else np.array([]),
        hi * (1.0 - np.logspace(-12, -0.31, 100)) if w.measure.finite else np.array([]),
        [s for s in w.seeds if 0.0 < s < hi],
    ]))
    grid = grid[(grid > 0.0) & (grid < hi)]
    try:
        values = w(grid)
    except Exception as exc:  # noqa: BLE001 - report, never crash on evaluation
        return WeightReport(False, [f"evaluation failed: {exc}"], [], {})
    if np.any(~np.isfinite(values)):
        violations.append("non-finite values on the validation grid")
    else:
        if np.any(values <= 0.0):
            violations.append("weight must be strictly positive on (0, total_mass)")
        diffs = np.diff(values)
        if np.any(diffs <= 0.0):
            idx = int(np.argmax(diffs <= 0.0))
            violations.append(
                f"not strictly increasing near s={grid[idx]:.6g}"
            )
        small = float(w(np.array([min(1e-14, hi * 1e-14)]))[0])
        mid = float(w(np.array([hi * 0.5]))[0])
        if not (small < 1e-3 * mid):
            violations.append("weight does not vanish as s -> 0")
        details["w_small"] = small
        if w.measure.finite:
            top = float(w(np.array([mass * (1.0 - 1e-12)]))[0])
            details["w_top"] = top
            if not (top > 1e6 * mid):
                advisories.append(
                    "no blow-up at total mass (accepted by the finite-mass convention)"
                )
    if not violations:
        # induced tail T(s) = w^-1(1/s) must be nonincreasing with values in [0, mass]
        w_top = float(w(np.array([hi * (1.0 - 1e-12)]))[0])
        s_lo = max(1.0 / w_top, 1e-10) if w_top > 0 else 1e-10
        s_grid = np.logspace(math.log10(s_lo * 1.0000001), math.log10(max(s_lo * 1e8, 1e4)), 120)
        with np.errstate(divide="ignore"):
            tail_vals = np.minimum(mass, w.inverse_at(1.0 / s_grid))
        tail_vals = tail_vals[np.isfinite(tail_vals)]
        if tail_vals.size >= 2 and np.any(np.diff(tail_vals) > 1e-9 * (1.0 + tail_vals[:-1])):
            violations.append("induced tail w^-1(1/s) is not nonincreasing")
        elif tail_vals.size >= 2 and (np.any(tail_vals < -1e-12) or np.any(tail_vals > mass * (1 + 1e-9))):
            violations.append("induced tail leaves [0, total_mass]")
        else:
            details["induced_tail_checked"] = int(tail_vals.size)
    return WeightReport(not violations, violations, advisories, details)


def gamma_constant(w: Weight, *, cfg: GridConfig = DEFAULT_GRID) -> NormResult:
    """Best constant relating the averaged and plain weighted tail norms:
    sup over t of (w(t)/t) * integral of 1/w over (0, t].

    Diverges exactly when 1/w is not integrable at 0 or the ratio blows
    up along an endpoint.
    """
    def inv_w(u):
        with np.errstate(divide="ignore"):
            return 1.0 / w(u)

    running = RunningLowerIntegral(inv_w, breaks=w.seeds, cfg=cfg)
    mass = w.total_mass
    probe_t = min(1.0, 0.25 * mass) if w.measure.finite else 1.0
    head = running.value_result(probe_t)
    if not head.is_finite:
        return NormResult(
            head.verdict, math.inf, math.nan, head.evidence,
            reason="integral of 1/w diverges at 0: " + head.reason,
        )

    def ratio(t):
        t_arr = np.asarray(t, dtype=float)
        return w(t_arr) / t_arr * running.values(t_arr)

    result = supremum_scan(ratio, mass, seeds=w.seeds, cfg=cfg)
    if result.is_finite:
        result.diagnostics["head_error"] = head.error
    return result


def fundamental_function(w: Weight, delta: float, *, cross_check: bool = False,
                         cfg: GridConfig = DEFAULT_GRID) -> float:
    """Norm of an indicator of mass delta in the averaged-norm space: w(delta).

    With ``cross_check`` the value is recomputed through the
    Marcinkiewicz norm of an indicator spec and must agree to 1e-6.
    """
    if not (0.0 < delta < w.total_mass):
        raise ValueError("delta must lie in (0, total_mass)")
    value = float(w(np.array([delta]))[0])
    if cross_check:
        from .model import indicator_spec
        from .norms import marcinkiewicz_norm

        spec = indicator_spec(delta, measure=w.measure)
        direct = marcinkiewicz_norm(spec, w, cfg=cfg).expect("indicator norm")
        if abs(direct - value) > 1e-6 * max(1.0, abs(value)):
            raise ArithmeticError(
                f"fundamental function cross-check failed: w(delta)={value:.12g} "
                f"vs indicator norm {direct:.12g}"
            )
    return value


def associate_fundamental(w: Weight, delta: float) -> float:
    """Fundamental function of the associate space: delta / w(delta)."""
    if not (0.0 < delta < w.total_mass):
        raise ValueError("delta must lie in (0, total_mass)")
    return delta / float(w(np.array([delta]))[0])
