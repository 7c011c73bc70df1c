"""Young-Orlicz generators and moment-growth profiles for grand Lebesgue norms.

Covers plain Young functions, exponential Young functions N = e^nu - 1
(light-tail generators), the power-log family that mixes a quadratic
core with |u|^p0 (log|u|)^-delta S(log|u|) growth, and psi profiles
p -> psi(p) normalizing the scale of p-th moment norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .model import FunctionSpec
from .numerics import DEFAULT_GRID, GridConfig
from .weights import SlowlyVarying, sv_constant


class YoungFunction:
    """Even convex nondecreasing generator with Phi(0) = 0.

    ``log_call`` evaluates log(Phi(u)) stably; exponential families
    override it so that modulars can be accumulated in log space.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], *, family: str = "custom",
                 params: dict | None = None, log_fn=None, label: str = ""):
        self._fn = fn
        self._log_fn = log_fn
        self.family = family
        self.params = dict(params or {})
        self.label = label or f"{family}({','.join(f'{k}={v}' for k, v in self.params.items())})"

    def __call__(self, u) -> np.ndarray:
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(all="ignore"):
            return np.asarray(self._fn(a), dtype=float)

    def log_call(self, u) -> np.ndarray:
        a = np.abs(np.asarray(u, dtype=float))
        with np.errstate(all="ignore"):
            if self._log_fn is not None:
                return np.asarray(self._log_fn(a), dtype=float)
            return np.log(np.asarray(self._fn(a), dtype=float))


def power_young(p: float) -> YoungFunction:
    if p < 1.0:
        raise ValueError("a power Young function needs p >= 1")
    return YoungFunction(
        lambda u: u**p,
        family="power",
        params={"p": p},
        log_fn=lambda u: p * np.log(np.maximum(u, 5e-324)),
    )


class ExponentialYoung(YoungFunction):
    """N(u) = e^{nu(u)} - 1 for an even convex rate with nu(0) = nu'(0) = 0."""

    def __init__(self, rate: Callable[[np.ndarray], np.ndarray], *, family: str = "eof",
                 params: dict | None = None, rate_prime=None, label: str = ""):
        self.rate = lambda u: np.asarray(rate(np.abs(np.asarray(u, dtype=float))), dtype=float)
        self._rate_prime = rate_prime

        def fn(u):
            return np.expm1(self.rate(u))

        def log_fn(u):
            nu = self.rate(u)
            with np.errstate(all="ignore"):
                # log(e^nu - 1); series for tiny nu avoids cancellation
                return np.where(
                    nu < 1e-8,
                    np.log(np.maximum(nu, 5e-324)) + 0.5 * nu,
                    nu + np.log1p(-np.exp(-np.maximum(nu, 1e-300))),
                )

        super().__init__(fn, family=family, params=params, log_fn=log_fn, label=label)

    def rate_prime(self, u) -> np.ndarray:
        if self._rate_prime is not None:
            return np.asarray(self._rate_prime(np.asarray(u, dtype=float)), dtype=float)
        u_arr = np.asarray(u, dtype=float)
        h = np.maximum(1e-6, 1e-6 * np.abs(u_arr))
        return (self.rate(u_arr + h) - self.rate(u_arr - h)) / (2.0 * h)


def exp_power_young(q: float) -> ExponentialYoung:
    """e^{|u|^q} - 1; an exponential Young function exactly when q > 1."""
    if q <= 0.0:
        raise ValueError("rate exponent must be positive")
    return ExponentialYoung(
        lambda u: u**q,
        family="exp_power",
        params={"q": q},
        rate_prime=lambda u: q * np.abs(u) ** (q - 1.0) * np.sign(u),
    )


def quad_log_young() -> ExponentialYoung:
    """e^{u^2 log(1+u^2)} - 1; a curvier exponential Young function."""
    return ExponentialYoung(
        lambda u: u**2 * np.log1p(u**2),
        family="quad_log",
        params={},
    )


@dataclass
class EOFReport:
    is_eof: bool
    violations: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)


def validate_eof(phi: ExponentialYoung, *, cfg: GridConfig = DEFAULT_GRID) -> EOFReport:
    """Grid checks of the exponential-Young conditions on the rate:
    zero only at zero, flat derivative at zero, convexity, derivative
    growing without bound."""
    violations: list[str] = []
    checks: dict = {}
    if not isinstance(phi, ExponentialYoung):
        return EOFReport(False, ["not an exponential Young function"], {})
    rate = phi.rate
    at0 = float(rate(np.array([0.0]))[0])
    checks["rate_at_zero"] = at0
    if abs(at0) > 1e-12:
        violations.append("rate does not vanish at 0")
    small = np.array([1e-8, 1e-6, 1e-4])
    if np.any(rate(small) <= 0.0):
        violations.append("rate vanishes away from 0")
    # nu'(0) = 0 <=> the secant slopes nu(h)/h decay to 0 as h -> 0
    probes = np.array([1e-4, 1e-30, 1e-100, 1e-200])
    slopes = rate(probes) / probes
    checks["secant_slopes"] = tuple(float(s) for s in slopes)
    decaying = bool(np.all(np.diff(slopes) <= 1e-12 * np.abs(slopes[:-1]) + 1e-300))
    if not (decaying and slopes[-1] <= 0.2 * max(slopes[0], 1e-300)):
        violations.append("rate slope at 0 is not 0")
    sym = float(np.max(np.abs(rate(np.array([-1.3, -0.4])) - rate(np.array([1.3, 0.4])))))
    if sym > 1e-12:
        violations.append("rate is not even")
    grid = np.concatenate([np.linspace(0.0, 4.0, 41)[1:], np.logspace(0.7, 2.0, 20)])
    v = rate(grid)
    mid = rate(0.5 * (grid[:-1] + grid[1:]))
    convex_slack = mid - 0.5 * (v[:-1] + v[1:])
    checks["max_convexity_violation"] = float(np.max(convex_slack))
    if np.any(convex_slack > 1e-9 * (1.0 + np.abs(v[:-1]))):
        violations.append("rate fails midpoint convexity on the grid")
    big = np.array([1e2, 1e4, 1e6, 1e8])
    dp = phi.rate_prime(big)
    checks["far_slopes"] = tuple(float(x) for x in dp)
    growing = bool(np.all(np.diff(dp) > -1e-9 * np.abs(dp[:-1]))) and dp[-1] >= 2.0 * dp[0]
    if not growing:
        violations.append("rate slope does not grow without bound")
    return EOFReport(not violations, violations, checks)


class PowerLogYoung(YoungFunction):
    """Quadratic core for |u| <= e glued to |u|^p0 (log|u|)^-delta S(log|u|).

    The gluing constant makes the two branches meet at |u| = e; the
    slowly varying factor is evaluated at arguments >= 1 (clamped below).
    Monotonicity is verified on a grid; convexity near the knot is
    reported, not enforced.
    """

    def __init__(self, p0: float, delta: float = 0.0, sv: SlowlyVarying | None = None):
        if p0 <= 1.0:
            raise ValueError("power-log Young function needs p0 > 1")
        if delta < 0.0:
            raise ValueError("delta must be >= 0")
        self.p0 = p0
        self.delta = delta
        self.sv = sv or sv_constant(1.0)
        s1 = float(self.sv(np.array([1.0]))[0])
        if not (s1 > 0.0):
            raise ValueError("slowly varying factor must be positive at 1")
        core = math.exp(p0 - 2.0) * s1  # continuity across |u| = e

        def fn(u):
            u_arr = np.maximum(np.asarray(u, dtype=float), 0.0)
            z = np.log(np.maximum(u_arr, 1.0))
            z_clamped = np.maximum(z, 1.0)
            with np.errstate(all="ignore"):
                grown = u_arr**p0 * np.where(z > 0, z, 1.0) ** (-delta) * self.sv(z_clamped)
            return np.where(u_arr <= math.e, core * u_arr**2, grown)

        def log_fn(u):
            u_arr = np.maximum(np.asarray(u, dtype=float), 5e-324)
            z = np.log(np.maximum(u_arr, 1.0))
            z_clamped = np.maximum(z, 1.0)
            with np.errstate(all="ignore"):
                grown = p0 * np.log(u_arr) - delta * np.log(np.where(z > 0, z, 1.0)) + np.log(
                    self.sv(z_clamped)
                )
                small = math.log(core) + 2.0 * np.log(u_arr)
            return np.where(u_arr <= math.e, small, grown)

        super().__init__(fn, family="power_log",
                         params={"p0": p0, "delta": delta, "sv": self.sv.family},
                         log_fn=log_fn)
        self.core_constant = core
        probe = np.concatenate([np.linspace(0.05, math.e, 40),
                                np.logspace(math.log10(math.e), 6, 60)])
        vals = self(probe)
        self.monotone_on_grid = bool(np.all(np.diff(vals) >= -1e-9 * np.abs(vals[:-1])))
        mids = 0.5 * (probe[:-1] + probe[1:])
        self.convex_on_grid = bool(
            np.all(self(mids) <= 0.5 * (vals[:-1] + vals[1:]) + 1e-9 * (1.0 + vals[1:]))
        )
        if not self.monotone_on_grid:
            raise ValueError("power-log Young function is not nondecreasing for these parameters")


class PsiFunction:
    """Moment-growth profile: finite positive on an interval of exponents,
    infinite outside it (with the convention C/inf = 0)."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], support: tuple[float, float],
                 *, family: str = "custom", params: dict | None = None,
                 closed_left: bool = True, label: str = ""):
        a, b = support
        if not (1.0 <= a < b):
            raise ValueError("psi support must satisfy 1 <= A < B")
        self._fn = fn
        self.support = (float(a), float(b))
        self.closed_left = closed_left
        self.family = family
        self.params = dict(params or {})
        self.label = label or f"psi-{family}({','.join(f'{k}={v}' for k, v in self.params.items())})"

    def in_support(self, p) -> np.ndarray:
        p_arr = np.asarray(p, dtype=float)
        a, b = self.support
        left = p_arr >= a if self.closed_left else p_arr > a
        return left & (p_arr < b)

    def __call__(self, p) -> np.ndarray:
        p_arr = np.asarray(p, dtype=float)
        inside = self.in_support(p_arr)
        out = np.full(np.shape(p_arr), math.inf)
        if np.any(inside):
            with np.errstate(all="ignore"):
                vals = np.asarray(self._fn(np.where(inside, p_arr, self.support[0])), dtype=float)
            out = np.where(inside, vals, math.inf)
        return out if out.shape else float(out)

    def infimum_positive(self, samples: int = 200) -> float:
        a, b = self.support
        hi = b if math.isfinite(b) else a + 50.0
        grid = np.linspace(a, hi - 1e-9 * max(1.0, hi), samples)
        return float(np.min(self(grid)))


def make_psi(family: str, **params) -> PsiFunction:
    """Named psi profiles.

    * ``power_blowup``: (B - p)^-beta on [1, B), beta >= 0, B > 1.
    * ``power_log``: (p0-p)^(-(1+delta)/p0) * S(p0/(p0-p))^(1/p0) on [1, p0).
    * ``degenerate``: 1 at r, infinite elsewhere (recovers the plain
      p-th moment norm through the C/inf = 0 convention).
    """
    if family == "power_blowup":
        b = params["B"]
        beta = params.get("beta", 0.0)
        if not (b > 1.0) or beta < 0.0:
            raise ValueError("power_blowup needs B > 1 and beta >= 0")
        return PsiFunction(
            lambda p: (b - np.asarray(p, dtype=float)) ** -beta,
            (1.0, b), family=family, params={"B": b, "beta": beta},
        )
    if family == "power_log":
        p0 = params["p0"]
        delta = params.get("delta", 0.0)
        sv = params.get("sv") or sv_constant(1.0)
        if not (p0 > 1.0) or delta <= -1.0:
            raise ValueError("power_log needs p0 > 1 and delta > -1")

        def fn(p):
            gap = p0 - np.asarray(p, dtype=float)
            with np.errstate(all="ignore"):
                return gap ** (-(1.0 + delta) / p0) * sv(p0 / gap) ** (1.0 / p0)

        return PsiFunction(fn, (1.0, p0), family=family,
                           params={"p0": p0, "delta": delta, "sv": sv.family})
    if family == "degenerate":
        r = params["r"]
        if r < 1.0:
            raise ValueError("degenerate profile needs r >= 1")

        def fn(p):
            p_arr = np.asarray(p, dtype=float)
            return np.where(p_arr == r, 1.0, math.inf)

        psi = PsiFunction(fn, (1.0, max(r + 1.0, 2.0)), family=family, params={"r": r})
        psi.degenerate_at = r
        # support bookkeeping: finite only at r
        psi.in_support = lambda p: np.asarray(p, dtype=float) == r  # type: ignore[assignment]
        return psi
    raise ValueError(f"unknown psi family '{family}'")


def natural_psi(f: FunctionSpec, p_range: tuple[float, float], *, nodes: int = 33,
                cfg: GridConfig = DEFAULT_GRID) -> PsiFunction:
    """Profile tabulated from the function's own p-th moment norms.

    By construction the grand Lebesgue norm of ``f`` against this
    profile is 1.  Exponents where the moment integral diverges truncate
    the support; the divergence point is recorded in ``params``.
    """
    from .norms import lp_norm

    lo, hi = p_range
    if not (1.0 <= lo < hi):
        raise ValueError("p_range must satisfy 1 <= lo < hi")
    ps = np.linspace(lo, hi, nodes)
    vals = []
    cut = None
    for p in ps:
        res = lp_norm(f, float(p), cfg=cfg)
        if not res.is_finite:
            cut = float(p)
            break
        vals.append(res.value)
    if len(vals) < 4:
        raise ValueError("not enough finite moments to tabulate a natural profile")
    ps = ps[: len(vals)]
    interp = PchipInterpolator(ps, np.log(np.maximum(vals, 5e-324)))
    upper = cut if cut is not None else hi

    def fn(p):
        return np.exp(interp(np.clip(np.asarray(p, dtype=float), ps[0], ps[-1])))

    psi = PsiFunction(fn, (float(ps[0]), float(upper)), family="natural",
                      params={"generator": f.label, "diverges_at": cut},
                      label=f"natural-psi[{f.label}]")
    psi.nodes = ps
    psi.node_values = np.asarray(vals)
    return psi
