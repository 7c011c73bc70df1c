"""Decreasing rearrangements, their running averages, and a set-based oracle.

The rearrangement of f is the generalized left inverse of its tail
function; the averaged rearrangement at t is the mean of the
rearrangement over (0, t], equivalently the largest average of |f| over
sets of measure t.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .model import (
    AnalyticTailSpec,
    EmpiricalSpec,
    FunctionSpec,
    PointwiseMonotoneSpec,
    TailFunction,
)
from .numerics import DEFAULT_GRID, GridConfig, NormResult, RunningLowerIntegral


def tail_of(f: FunctionSpec | TailFunction) -> TailFunction:
    """Tail function of any presentation (pass-through for TailFunction)."""
    if isinstance(f, TailFunction):
        return f
    return f.tail()


class Rearrangement:
    """Nonincreasing evaluator s -> f*(s) on (0, total_mass) with an
    attached cumulative integrator for running averages."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        source: FunctionSpec | None,
        *,
        seeds=(),
        cfg: GridConfig = DEFAULT_GRID,
        label: str = "f*",
    ):
        self._fn = fn
        self.source = source
        self.measure = source.measure if source is not None else None
        self.seeds = tuple(seeds)
        self.cfg = cfg
        self.label = label
        self._integral: RunningLowerIntegral | None = None
        self._empirical = source if isinstance(source, EmpiricalSpec) else None

    def __call__(self, s) -> np.ndarray:
        with np.errstate(all="ignore"):
            v = np.asarray(self._fn(np.asarray(s, dtype=float)), dtype=float)
        return np.maximum(v, 0.0)

    @property
    def total_mass(self) -> float:
        return self.measure.total_mass if self.measure is not None else math.inf

    def lower_integral(self, t) -> np.ndarray:
        """Integral of f* over (0, min(t, total_mass)]; nan when non-integrable at 0."""
        t_arr = np.minimum(np.asarray(t, dtype=float), self.total_mass)
        if self._empirical is not None:
            return self._empirical.lower_integral(t_arr)
        if self._integral is None:
            self._integral = RunningLowerIntegral(self.__call__, breaks=self.seeds, cfg=self.cfg)
        return self._integral.values(t_arr)

    def head_result(self, probe: float | None = None) -> NormResult:
        """Convergence status of the integral of f* near 0."""
        if self._empirical is not None:
            return NormResult.finite(float(self._empirical.lower_integral(
                probe if probe is not None else self.total_mass)))
        if self._integral is None:
            self._integral = RunningLowerIntegral(self.__call__, breaks=self.seeds, cfg=self.cfg)
        t0 = probe if probe is not None else min(1.0, 0.5 * self.total_mass)
        return self._integral.value_result(t0)

    def average(self, t) -> np.ndarray:
        """f**(t) = integral of f* over (0, t] divided by t."""
        t_arr = np.asarray(t, dtype=float)
        return self.lower_integral(t_arr) / t_arr


def rearrange(f: FunctionSpec, *, cfg: GridConfig = DEFAULT_GRID) -> Rearrangement:
    """Decreasing rearrangement of the function presented by ``f``.

    Pointwise monotone specs are already their own rearrangement;
    empirical specs become the sorted-descending step function (value at
    an atom boundary taken from the right); analytic tails go through
    their inverse, falling back to vectorized bisection.
    """
    if isinstance(f, PointwiseMonotoneSpec):
        return Rearrangement(f.func, f, seeds=f.seeds, cfg=cfg, label=f"rearr[{f.label}]")
    if isinstance(f, EmpiricalSpec):
        tail = f.tail()
        seeds = tuple(np.unique(f.cum_weights[:-1]))
        return Rearrangement(
            lambda s: tail.inverse_at(s, cfg=cfg), f, seeds=seeds, cfg=cfg,
            label=f"rearr[{f.label}]",
        )
    tail = tail_of(f)
    mass = f.measure.total_mass
    s_seeds = tuple(float(np.asarray(tail(np.array([t])))[0]) for t in tail.seeds)
    s_seeds = tuple(s for s in s_seeds if 0.0 < s < mass)

    def fn(s):
        return tail.inverse_at(s, cfg=cfg)

    return Rearrangement(fn, f, seeds=s_seeds, cfg=cfg, label=f"rearr[{f.label}]")


def averaged_rearrangement(f: FunctionSpec | Rearrangement, t: float,
                           *, cfg: GridConfig = DEFAULT_GRID) -> NormResult:
    """f**(t), the running average of the rearrangement, as a NormResult.

    Diverges when f* is not integrable at 0.  For t beyond the total
    mass the rearrangement is extended by zero.
    """
    rearr = f if isinstance(f, Rearrangement) else rearrange(f, cfg=cfg)
    if t <= 0.0:
        raise ValueError("average requires t > 0")
    head = rearr.head_result(min(t, rearr.total_mass))
    if not head.is_finite:
        return head
    value = float(rearr.lower_integral(t)) / t
    return NormResult.finite(value, head.error / t)


def averaged_rearrangement_oracle(f: EmpiricalSpec, t: float) -> float:
    """Best average of |f| over sets of measure at most t, filled greedily.

    Independent of the rearrangement path: walks the atoms from the
    largest down, taking each whole until the mass budget forces a
    fractional piece of the boundary atom.
    """
    if not isinstance(f, EmpiricalSpec):
        raise TypeError("the greedy oracle is defined for empirical specs")
    if not (0.0 < t <= f.measure.total_mass):
        raise ValueError("t must lie in (0, total_mass]")
    budget = t
    acc = 0.0
    for mag, w in zip(f.magnitudes, f.weights):
        take = min(w, budget)
        acc += take * mag
        budget -= take
        if budget <= 0.0:
            break
    return acc / t
