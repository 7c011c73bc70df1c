"""Shared numerical kernels: monotone inversion, singular quadrature, sup scans.

All evaluators passed into this module are expected to be vectorized
(numpy array in, numpy array out).  Results that may fail to exist are
reported through :class:`NormResult`, which separates a finite value with
an error estimate from a certified divergence (with growth evidence) and
from an inconclusive refinement.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

VectorFn = Callable[[np.ndarray], np.ndarray]

_TINY = 5e-324


def _grid_scale() -> float:
    raw = os.environ.get("TAILNORM_GRID_SCALE", "")
    if not raw:
        return 1.0
    try:
        value = float(raw)
    except ValueError:
        return 1.0
    return value if value > 0.0 else 1.0


@dataclass(frozen=True)
class GridConfig:
    """Resolution knobs shared by scans and quadrature routines."""

    scan_points: int = 512
    refine_levels: int = 6
    refine_factor: float = 10.0
    edge_fraction: float = 1e-6
    divergence_factor: float = 1e3
    rel_tol: float = 1e-10
    panel_nodes: int = 32
    max_windows: int = 60
    bisect_rtol: float = 1e-8
    bisect_iters: int = 200
    grid_scale: float = 1.0

    @staticmethod
    def from_env() -> "GridConfig":
        scale = _grid_scale()
        cfg = GridConfig(grid_scale=scale)
        if scale != 1.0:
            cfg = replace(cfg, scan_points=max(64, int(512 * scale)))
        return cfg

    def describe(self) -> str:
        return (
            f"points={self.scan_points} levels={self.refine_levels} "
            f"edge={self.edge_fraction:g} divergence={self.divergence_factor:g} "
            f"scale={self.grid_scale:g}"
        )


DEFAULT_GRID = GridConfig.from_env()


class Verdict(str, Enum):
    FINITE = "finite"
    DIVERGES = "diverges"
    INDETERMINATE = "indeterminate"


@dataclass
class NormResult:
    """Value of a functional together with how much to trust it.

    ``evidence`` for a divergent verdict is a tuple of
    ``(level, abscissa, value)`` triples whose values grow across
    refinement levels.
    """

    verdict: Verdict
    value: float = math.nan
    error: float = math.nan
    evidence: tuple = ()
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    @staticmethod
    def finite(value: float, error: float = 0.0, **diagnostics) -> "NormResult":
        return NormResult(Verdict.FINITE, float(value), float(error), diagnostics=diagnostics)

    @staticmethod
    def diverges(evidence=(), reason: str = "", **diagnostics) -> "NormResult":
        return NormResult(
            Verdict.DIVERGES,
            math.inf,
            math.nan,
            evidence=tuple(evidence),
            reason=reason,
            diagnostics=diagnostics,
        )

    @staticmethod
    def indeterminate(reason: str, **diagnostics) -> "NormResult":
        return NormResult(Verdict.INDETERMINATE, reason=reason, diagnostics=diagnostics)

    @property
    def is_finite(self) -> bool:
        return self.verdict is Verdict.FINITE

    @property
    def is_divergent(self) -> bool:
        return self.verdict is Verdict.DIVERGES

    @property
    def is_indeterminate(self) -> bool:
        return self.verdict is Verdict.INDETERMINATE

    def expect(self, context: str = "") -> float:
        """Finite value, or raise if the computation did not produce one."""
        if not self.is_finite:
            raise ArithmeticError(
                f"expected a finite value{' for ' + context if context else ''}: "
                f"{self.verdict.value} {self.reason}"
            )
        return self.value

    def __str__(self) -> str:
        if self.is_finite:
            return f"{self.value:.10g} (+-{self.error:.2g})"
        return f"{self.verdict.value}: {self.reason}"


_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _LEGGAUSS_CACHE:
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


def gauss_panel(fn: VectorFn, a: float, b: float, nodes: int = 32) -> float:
    """Single Gauss-Legendre panel of ``fn`` over [a, b]."""
    if b <= a:
        return 0.0
    x, w = _leggauss(nodes)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return float(half * np.sum(w * np.asarray(fn(mid + half * x), dtype=float)))


def _log_panels(fn: VectorFn, lo: float, hi: float, nodes: int) -> float:
    """Integral of ``fn`` over [lo, hi], 0 < lo < hi, evaluated in log coordinates.

    The substitution u = e^y turns power singularities into smooth
    exponentials; panels are at most one decade wide.
    """
    la, lb = math.log(lo), math.log(hi)
    chunks = max(1, int(math.ceil((lb - la) / math.log(10.0))))
    edges = np.linspace(la, lb, chunks + 1)
    total = 0.0
    for ya, yb in zip(edges[:-1], edges[1:]):
        total += gauss_panel(lambda y: fn(np.exp(y)) * np.exp(y), ya, yb, nodes)
    return total


def integrate_segment(
    fn: VectorFn,
    a: float,
    b: float,
    *,
    breaks: Sequence[float] = (),
    nodes: int = 32,
) -> float:
    """Integral over [a, b] with 0 < a, splitting panels at known breakpoints."""
    if b <= a:
        return 0.0
    pts = [a] + sorted(x for x in set(breaks) if a < x < b) + [b]
    return sum(_log_panels(fn, lo, hi, nodes) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo)


def integrate_lower_singular(
    fn: VectorFn,
    upper: float,
    *,
    breaks: Sequence[float] = (),
    cfg: GridConfig = DEFAULT_GRID,
) -> NormResult:
    """Integral of a nonnegative ``fn`` over (0, upper] with a possible blow-up at 0.

    Decade windows are peeled toward 0 (each integrated after the
    substitution u = e^y, which tames integrable singularities).  The
    integral is Finite when window contributions decay geometrically,
    Diverges when the running totals keep growing with non-shrinking
    increments, and Indeterminate when the window budget runs out
    without either pattern.
    """
    if upper <= 0.0:
        return NormResult.finite(0.0, 0.0)
    ratio = 10.0
    contributions: list[float] = []
    totals: list[float] = []
    total = 0.0
    positive_seen = False
    for k in range(cfg.max_windows):
        hi = upper * ratio**-k
        lo = hi / ratio
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            c = integrate_segment(fn, lo, hi, breaks=breaks, nodes=cfg.panel_nodes)
        if not math.isfinite(c):
            evidence = [(j, upper * ratio ** -(j + 1), totals[j]) for j in range(max(0, k - 4), k)]
            evidence.append((k, lo, math.inf))
            return NormResult.diverges(evidence, reason="non-finite window contribution")
        contributions.append(c)
        total += c
        totals.append(total)
        if c > 0.0:
            positive_seen = True
        if positive_seen and total > 0.0 and k >= 2:
            prev = contributions[-2]
            if c <= cfg.rel_tol * total and c <= max(prev, _TINY):
                r = c / prev if prev > 0.0 else 0.0
                r = min(r, 0.9)
                tail_bound = c * r / (1.0 - r) if c > 0.0 else 0.0
                return NormResult.finite(
                    total + tail_bound, tail_bound + cfg.rel_tol * total, windows=k + 1
                )
        if k >= 8 and positive_seen:
            last = contributions[-4:]
            non_decaying = all(
                last[i + 1] >= 0.98 * last[i] and last[i] > 0.0 for i in range(3)
            )
            grew = totals[-1] >= 10.0 * totals[2] > 0.0
            if non_decaying and grew:
                evidence = [
                    (j, upper * ratio ** -(j + 1), totals[j])
                    for j in range(len(totals) - 5, len(totals))
                ]
                return NormResult.diverges(
                    evidence, reason="window contributions do not decay toward 0"
                )
    if not positive_seen:
        return NormResult.finite(0.0, 0.0, windows=cfg.max_windows)
    tail = contributions[-3:]
    if tail[-1] < tail[-2] < tail[-3]:
        # steady geometric decay: extrapolate the remaining head below the
        # last window (exact for pure power singularities)
        r = min(tail[-1] / tail[-2], 0.99)
        r_prev = tail[-2] / tail[-3]
        extrapolated = tail[-1] * r / (1.0 - r)
        stable = abs(r - r_prev) <= 0.05 * r if r > 0.0 else True
        err = (0.1 * extrapolated if stable else extrapolated) + cfg.rel_tol * total
        return NormResult.finite(
            total + extrapolated, err, windows=cfg.max_windows, note="slow geometric decay"
        )
    if tail[-1] >= tail[-2] >= tail[-3] and totals[-1] > totals[-4]:
        evidence = [
            (j, upper * ratio ** -(j + 1), totals[j])
            for j in range(len(totals) - 5, len(totals))
        ]
        return NormResult.diverges(evidence, reason="window budget exhausted while growing")
    return NormResult.indeterminate("window budget exhausted without classification")


def _logsumexp(values: np.ndarray) -> float:
    m = np.max(values)
    if not np.isfinite(m):
        return float(m) if m == -math.inf else math.inf
    return float(m + math.log(np.sum(np.exp(values - m))))


def _window_log_integral(log_fn: VectorFn, a: float, b: float, tol: float = 1e-9) -> float:
    """log of the integral of exp(log_fn) over [a, b], adaptive composite Simpson."""
    m = 128
    prev = None
    while True:
        y = np.linspace(a, b, m + 1)
        h = (b - a) / m
        w = np.full(m + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            g = np.asarray(log_fn(y), dtype=float)
        g = np.where(np.isnan(g), -math.inf, g)
        if np.any(np.isposinf(g)):
            return math.inf
        value = _logsumexp(g + np.log(w * h / 3.0))
        if prev is not None and (
            value == -math.inf or abs(value - prev) <= tol * max(1.0, abs(value))
        ):
            return value
        if m >= 1 << 15:
            return value
        prev = value
        m *= 2


def log_integral_exp(
    log_fn: VectorFn,
    y0: float = 0.0,
    *,
    edges_hint: Sequence[float] = (),
    cfg: GridConfig = DEFAULT_GRID,
    max_windows: int = 48,
) -> NormResult:
    """Integral of exp(log_fn(y)) over [y0, oo), computed entirely in log space.

    Geometric windows let interior humps sitting at very large y be
    crossed; divergence is certified only when window masses grow with
    non-shrinking, non-concave log-slope (a genuinely superlinear or
    linear-growth integrand), so a large but integrable hump is crossed
    rather than misread as a blow-up.

    The result's ``diagnostics['log_value']`` is always populated;
    ``value`` itself may overflow to inf for representable-only-in-log
    magnitudes while the verdict stays Finite.
    """
    span = 1.0
    edges = [y0]
    while edges[-1] < y0 + span * (2.0**max_windows - 1.0):
        k = len(edges) - 1
        edges.append(y0 + span * (2.0 ** (k + 1) - 1.0))
        if len(edges) > max_windows:
            break
    extra = sorted(x for x in set(edges_hint) if edges[0] < x < edges[-1])
    edges = sorted(set(edges) | set(extra))

    total_log = -math.inf
    window_logs: list[float] = []
    slopes: list[float] = []
    for k, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        lk = _window_log_integral(log_fn, a, b)
        if lk == math.inf:
            evidence = [(j, edges[j + 1], window_logs[j]) for j in range(max(0, k - 3), k)]
            evidence.append((k, b, math.inf))
            return NormResult.diverges(evidence, reason="integrand overflow in log window")
        window_logs.append(lk)
        total_log = lk if total_log == -math.inf else float(np.logaddexp(total_log, lk))
        step = max(1e-6, (b - a) * 1e-3)
        with np.errstate(all="ignore"):
            gb = float(np.asarray(log_fn(np.array([b])), dtype=float)[0])
            gb_minus = float(np.asarray(log_fn(np.array([b - step])), dtype=float)[0])
        slope = (gb - gb_minus) / step if math.isfinite(gb) and math.isfinite(gb_minus) else -math.inf
        slopes.append(slope)
        if total_log > -math.inf and lk < total_log + math.log(cfg.rel_tol) and k >= 2:
            err = 2.0 * math.exp(min(lk - total_log, 0.0))
            value = math.exp(total_log) if total_log < 709.0 else math.inf
            return NormResult.finite(
                value, err * (value if math.isfinite(value) else 1.0),
                log_value=total_log, windows=k + 1,
            )
        if k >= 6:
            recent = window_logs[-3:]
            recent_slopes = slopes[-3:]
            growing = all(recent[i + 1] >= recent[i] - 1e-12 for i in range(2))
            slope_flat_or_rising = all(s >= -1e-9 for s in recent_slopes) and all(
                recent_slopes[i + 1] >= recent_slopes[i] - 1e-9 for i in range(2)
            )
            if growing and slope_flat_or_rising:
                evidence = [
                    (j, edges[j + 1], window_logs[j])
                    for j in range(len(window_logs) - 4, len(window_logs))
                ]
                return NormResult.diverges(
                    evidence,
                    reason="window masses grow with non-decreasing log-slope (log scale evidence)",
                )
    recent = window_logs[-3:]
    if all(recent[i + 1] >= recent[i] - 1e-12 for i in range(2)) and recent[-1] > -math.inf:
        evidence = [
            (j, edges[j + 1], window_logs[j])
            for j in range(len(window_logs) - 4, len(window_logs))
        ]
        return NormResult.diverges(evidence, reason="window budget exhausted while growing")
    value = math.exp(total_log) if total_log < 709.0 else math.inf
    if total_log == -math.inf:
        return NormResult.finite(0.0, 0.0, log_value=-math.inf)
    return NormResult.finite(
        value, abs(value) * 1e-6 if math.isfinite(value) else math.nan,
        log_value=total_log, windows=len(window_logs), note="budget reached",
    )


def monotone_inverse(
    curve: VectorFn,
    levels: np.ndarray,
    *,
    upper_hint: float = 1.0,
    cfg: GridConfig = DEFAULT_GRID,
    iters: int = 80,
) -> np.ndarray:
    """Generalized left inverse inf{s >= 0 : curve(s) <= level} of a nonincreasing curve.

    Vectorized over ``levels``.  Entries whose level cannot be bracketed
    below 1e280 come back as nan.
    """
    lv = np.atleast_1d(np.asarray(levels, dtype=float))
    out = np.full(lv.shape, math.nan)
    probe = max(upper_hint * 1e-12, _TINY)
    with np.errstate(all="ignore"):
        top = float(np.asarray(curve(np.array([probe])), dtype=float)[0])
    at_zero = lv >= top
    out[at_zero] = 0.0
    todo = ~at_zero & np.isfinite(lv)
    if not np.any(todo):
        return out if out.shape == np.shape(levels) else out.reshape(np.shape(levels))
    target = float(np.min(lv[todo]))
    hi = max(upper_hint, probe * 4.0)
    with np.errstate(all="ignore"):
        while float(np.asarray(curve(np.array([hi])), dtype=float)[0]) > target:
            hi *= 2.0
            if hi > 1e280:
                break
    with np.errstate(all="ignore"):
        reachable = np.asarray(curve(np.array([hi])), dtype=float)[0] <= lv
    solvable = todo & reachable
    lo_v = np.zeros(lv.shape)
    hi_v = np.full(lv.shape, hi)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            mid = np.where(
                lo_v > 0.0, 0.5 * (lo_v + hi_v), np.sqrt(np.maximum(lo_v, _TINY) * hi_v)
            )
            cm = np.asarray(curve(mid), dtype=float)
            below = cm <= lv
            hi_v = np.where(below, mid, hi_v)
            lo_v = np.where(below, lo_v, mid)
    out[solvable] = hi_v[solvable]
    return out if out.shape == np.shape(levels) else out.reshape(np.shape(levels))


def increasing_inverse(
    curve: VectorFn,
    levels: np.ndarray,
    *,
    domain: tuple[float, float],
    iters: int = 80,
) -> np.ndarray:
    """inf{s : curve(s) >= level} for a nondecreasing curve on an interval."""
    lv = np.atleast_1d(np.asarray(levels, dtype=float))
    lo, hi = domain
    lo = max(lo, _TINY)
    lo_v = np.full(lv.shape, lo)
    hi_v = np.full(lv.shape, hi)
    with np.errstate(all="ignore"):
        top = np.asarray(curve(np.array([hi])), dtype=float)[0]
        bottom = np.asarray(curve(np.array([lo])), dtype=float)[0]
        for _ in range(iters):
            mid = np.sqrt(lo_v * hi_v)
            cm = np.asarray(curve(mid), dtype=float)
            above = cm >= lv
            hi_v = np.where(above, mid, hi_v)
            lo_v = np.where(above, lo_v, mid)
    out = hi_v.copy()
    out[lv <= bottom] = lo
    out[lv > top] = math.nan
    return out if out.shape == np.shape(levels) else out.reshape(np.shape(levels))


def left_inverse(curve: VectorFn, level: float, *, upper_hint: float = 1.0,
                 cfg: GridConfig = DEFAULT_GRID) -> float:
    """Scalar form of :func:`monotone_inverse` (nan when unbracketable)."""
    return float(monotone_inverse(curve, np.array([level]), upper_hint=upper_hint, cfg=cfg)[0])


def golden_max(fn: Callable[[float], float], a: float, b: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section maximum of a scalar function on [a, b]."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = fn(x1)
        if b - a <= 1e-14 * max(1.0, abs(a) + abs(b)):
            break
    return (x1, f1) if f1 >= f2 else (x2, f2)


@dataclass
class EndpointReport:
    """Classification of a map's behavior along one endpoint approach."""

    kind: str  # "ok", "diverges", "indeterminate"
    max_value: float = -math.inf
    limit_gap: float = 0.0
    evidence: tuple = ()
    values: tuple = ()


def classify_endpoint(values: np.ndarray, abscissas: np.ndarray, threshold: float) -> EndpointReport:
    """Decide whether an endpoint-approaching value sequence blows up.

    Strictly increasing values whose last entry exceeds ``threshold``
    certify divergence; increasing values with geometrically shrinking
    increments are a finite limit; persistent unshrinkable growth below
    the threshold stays indeterminate.
    """
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    if np.any(~finite):
        cut = int(np.argmax(~finite))
        prefix = v[:cut]
        ev = [(i, float(abscissas[i]), float(prefix[i])) for i in range(len(prefix))]
        ev.append((cut, float(abscissas[cut]), math.inf))
        return EndpointReport("diverges", math.inf, evidence=tuple(ev), values=tuple(v))
    if len(v) < 3:
        return EndpointReport("ok", float(np.max(v)) if len(v) else -math.inf, values=tuple(v))
    vmax = float(np.max(v))
    span = float(v[-1] - v[0])
    scale = max(abs(float(v[-1])), abs(float(v[0])), 1e-300)
    if span <= 1e-5 * scale:
        # flat to within quadrature noise
        return EndpointReport("ok", vmax, values=tuple(v))
    increasing = bool(np.all(np.diff(v) > 0.0))
    if increasing:
        if v[-1] > threshold and len(v) >= 3:
            ev = tuple((i, float(abscissas[i]), float(v[i])) for i in range(len(v)))
            return EndpointReport("diverges", math.inf, evidence=ev, values=tuple(v))
        d = np.diff(v)
        shrinking = bool(np.all(d[1:] <= 0.95 * d[:-1]))
        if shrinking:
            r = float(d[-1] / d[-2]) if d[-2] > 0 else 0.0
            gap = float(d[-1] * r / (1.0 - r)) if r < 1.0 else float(d[-1])
            return EndpointReport("ok", vmax, limit_gap=gap, values=tuple(v))
        return EndpointReport("indeterminate", vmax, values=tuple(v))
    return EndpointReport("ok", vmax, values=tuple(v))


def _scan_transform(z: np.ndarray, upper: float) -> np.ndarray:
    if math.isinf(upper):
        return z / (1.0 - z)
    return upper * z


def supremum_scan(
    fn: VectorFn,
    upper: float = math.inf,
    *,
    seeds: Sequence[float] = (),
    cfg: GridConfig = DEFAULT_GRID,
) -> NormResult:
    """Supremum of ``fn`` over the open interval (0, upper), upper may be inf.

    Log-spaced base grid dense at both endpoints, golden-section polish
    around the best interior point, then geometric endpoint refinement.
    An endpoint sequence that keeps rising past
    ``divergence_factor * median(interior)`` across at least three
    levels certifies divergence.  An infinite domain is compactified
    through t = z / (1 - z) before scanning.
    """
    half = max(cfg.scan_points // 2, 16)
    zl = np.logspace(math.log10(cfg.edge_fraction), math.log10(0.5), half)
    z = np.unique(np.concatenate([zl, 1.0 - zl]))
    seed_z = []
    for s in seeds:
        if not (s > 0.0) or not math.isfinite(s):
            continue
        zs = s / (1.0 + s) if math.isinf(upper) else s / upper
        for nudged in (zs * (1.0 - 1e-12), zs, zs * (1.0 + 1e-12)):
            if 0.0 < nudged < 1.0 - 1e-15:
                seed_z.append(nudged)
    if seed_z:
        z = np.unique(np.concatenate([z, np.asarray(seed_z)]))
    t = _scan_transform(z, upper)
    with np.errstate(all="ignore"):
        v = np.asarray(fn(t), dtype=float)
    nan_count = int(np.sum(np.isnan(v)))
    v = np.where(np.isnan(v), -math.inf, v)

    finite_mask = np.isfinite(v)
    if np.any(np.isposinf(v)):
        idx = int(np.argmax(np.isposinf(v)))
        ev = _probe_divergence(fn, t, v, idx)
        return NormResult.diverges(ev, reason="infinite value on scan grid")

    if not np.any(finite_mask):
        return NormResult.indeterminate("no finite values on scan grid", nan_points=nan_count)

    interior = np.abs(v[finite_mask])
    median = float(np.median(interior))
    threshold = cfg.divergence_factor * max(median, 1e-12)

    best_idx = int(np.argmax(v))
    best_val = float(v[best_idx])
    best_t = float(t[best_idx])

    def scalar(x: float) -> float:
        with np.errstate(all="ignore"):
            y = float(np.asarray(fn(np.array([x])), dtype=float)[0])
        return y if math.isfinite(y) else -math.inf

    golden_val = best_val
    if 0 < best_idx < len(t) - 1:
        gx, gv = golden_max(scalar, float(t[best_idx - 1]), float(t[best_idx + 1]))
        if gv > golden_val:
            golden_val, best_t = gv, gx

    value = max(best_val, golden_val)
    error = abs(value) * 1e-9
    evidence_reports = {}
    for side in ("lower", "upper"):
        levels = np.arange(1, cfg.refine_levels + 1)
        z_seq = cfg.edge_fraction * cfg.refine_factor ** (-levels.astype(float))
        if side == "upper":
            z_seq = 1.0 - z_seq
        t_seq = _scan_transform(z_seq, upper)
        with np.errstate(all="ignore"):
            v_seq = np.asarray(fn(t_seq), dtype=float)
        v_seq = np.where(np.isnan(v_seq), -math.inf, v_seq)
        report = classify_endpoint(v_seq, t_seq, threshold)
        if report.kind == "indeterminate":
            deeper = np.arange(cfg.refine_levels + 1, 2 * cfg.refine_levels + 1)
            z_deep = cfg.edge_fraction * cfg.refine_factor ** (-deeper.astype(float))
            if side == "upper":
                z_deep = 1.0 - z_deep
            z_deep = z_deep[(z_deep > 0.0) & (z_deep < 1.0)]
            t_deep = _scan_transform(z_deep, upper)
            with np.errstate(all="ignore"):
                v_deep = np.asarray(fn(t_deep), dtype=float)
            v_deep = np.where(np.isnan(v_deep), -math.inf, v_deep)
            report = classify_endpoint(
                np.concatenate([v_seq, v_deep]), np.concatenate([t_seq, t_deep]), threshold
            )
        evidence_reports[side] = report
        if report.kind == "diverges":
            return NormResult.diverges(
                report.evidence,
                reason=f"growth beyond 1e3 x interior median at the {side} endpoint",
                median_interior=median,
                threshold=threshold,
            )
        if report.kind == "indeterminate":
            return NormResult.indeterminate(
                f"unresolved monotone growth at the {side} endpoint",
                endpoint_values=report.values,
                median_interior=median,
            )
        value = max(value, report.max_value)
        error = max(error, report.limit_gap)

    return NormResult.finite(
        value,
        error,
        argmax=best_t,
        median_interior=median,
        nan_points=nan_count,
        endpoint_lower=evidence_reports["lower"].values,
        endpoint_upper=evidence_reports["upper"].values,
    )


def _probe_divergence(fn: VectorFn, t: np.ndarray, v: np.ndarray, idx: int) -> tuple:
    """Build a growth record approaching a grid point where the map is infinite."""
    t_star = float(t[idx])
    side = idx - 1 if idx > 0 and np.isfinite(v[idx - 1]) else idx + 1
    if not (0 <= side < len(t)):
        return ((0, t_star, math.inf),)
    t_ref = float(t[side])
    ev = []
    with np.errstate(all="ignore"):
        for k, frac in enumerate((0.5, 0.75, 0.9, 0.99)):
            x = t_ref + (t_star - t_ref) * frac
            y = float(np.asarray(fn(np.array([x])), dtype=float)[0])
            ev.append((k, x, y))
    ev.append((len(ev), t_star, math.inf))
    increasing = [e for e in ev if math.isfinite(e[2])]
    if len(increasing) >= 2 and increasing[-1][2] < increasing[0][2]:
        ev = [ev[-1]]
    return tuple(ev)


class RunningLowerIntegral:
    """Cumulative integral t -> integral of g over (0, t] with cached anchors.

    The singular head near 0 goes through
    :func:`integrate_lower_singular` once; everything above it is
    accumulated with log-spaced Gauss panels between anchor points so
    that a scan over many t values costs a single sweep.
    """

    def __init__(self, g: VectorFn, *, breaks: Sequence[float] = (),
                 cfg: GridConfig = DEFAULT_GRID):
        self.g = g
        self.breaks = tuple(sorted(set(b for b in breaks if b > 0.0 and math.isfinite(b))))
        self.cfg = cfg
        self._anchors_t: list[float] = []
        self._anchors_v: list[float] = []
        self.head: NormResult | None = None

    def _ensure_head(self, t_min: float) -> None:
        if self.head is None:
            self.head = integrate_lower_singular(
                self.g, t_min, breaks=self.breaks, cfg=self.cfg
            )
            if self.head.is_finite:
                self._anchors_t = [t_min]
                self._anchors_v = [self.head.value]

    @property
    def divergent(self) -> bool:
        return self.head is not None and not self.head.is_finite

    def _segment(self, a: float, b: float) -> float:
        return integrate_segment(self.g, a, b, breaks=self.breaks, nodes=self.cfg.panel_nodes)

    def values(self, ts: np.ndarray) -> np.ndarray:
        """Cumulative integral at each t (ts need not be sorted); nan if the head diverges."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        order = np.argsort(ts)
        t_sorted = ts[order]
        self._ensure_head(float(t_sorted[0]))
        if self.divergent:
            return np.full(ts.shape, math.nan)
        out_sorted = np.empty_like(t_sorted)
        for i, tq in enumerate(t_sorted):
            out_sorted[i] = self._value_scalar(float(tq))
        out = np.empty_like(out_sorted)
        out[order] = out_sorted
        return out

    def _value_scalar(self, t: float) -> float:
        import bisect

        at, av = self._anchors_t, self._anchors_v
        if t <= 0.0:
            return 0.0
        pos = bisect.bisect_right(at, t)
        if pos > 0 and at[pos - 1] == t:
            return av[pos - 1]
        if pos == 0:
            if t >= 0.1 * at[0]:
                value = max(av[0] - self._segment(t, at[0]), 0.0)
            else:
                # far below the lowest anchor the subtraction cancels badly;
                # integrate the head fresh
                head = integrate_lower_singular(self.g, t, breaks=self.breaks, cfg=self.cfg)
                value = head.value if head.is_finite else math.nan
        else:
            value = av[pos - 1] + self._segment(at[pos - 1], t)
        at.insert(pos, t)
        av.insert(pos, value)
        return value

    def value_result(self, t: float) -> NormResult:
        self._ensure_head(min(t, 1.0) if t > 0 else 1.0)
        if self.divergent:
            assert self.head is not None
            return self.head
        v = self._value_scalar(t)
        assert self.head is not None
        return NormResult.finite(v, self.head.error)
