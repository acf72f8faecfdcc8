"""Dimension candidates from pressure curves.

``beta*`` is located by solving ``Z*_n(t) = threshold`` for increasing ``n``
and ``beta`` by solving ``Z_n(t) = threshold``; both curves are strictly
decreasing in ``t`` so each root is found by bisection. Neither limit is
computable exactly, so the raw per-``n`` roots are always returned and
convergence is reported, never assumed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .maps import TifsSpec
from .pressure import z_level, z_star
from .tree import reachable_states

BETA_WINDOW = 5


@dataclass
class DimensionEstimate:
    value: float
    n_used: int
    residual: float
    history: list[tuple[int, float]] = field(default_factory=list)
    converged: bool = False
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class RootResult:
    t: float
    residual: float
    lo: float
    hi: float
    diagnostic: str | None = None


def bisect_decreasing(
    curve: Callable[[float], float], threshold: float, t_tol: float, t_hi: float = 1.0
) -> RootResult:
    """Root of a strictly decreasing ``curve(t) = threshold`` on ``t >= 0``.

    ``t_hi`` is doubled until ``curve(t_hi) < threshold``; bisection stops
    once the bracket is narrower than ``t_tol / 4``. If ``curve(0)`` does not
    exceed the threshold the root is reported as 0 with a diagnostic.
    """
    if not t_tol > 0:
        raise DomainError("t_tol must be > 0")
    at_zero = curve(0.0)
    if not at_zero > threshold:
        return RootResult(0.0, abs(at_zero - threshold), 0.0, 0.0,
                          f"curve(0) = {at_zero:.6g} does not exceed the threshold {threshold:g}")
    lo, hi = 0.0, float(t_hi)
    while not curve(hi) < threshold:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise DomainError("no upper bracket below t = 1e6; is the curve decreasing to 0?")
    while hi - lo >= t_tol / 4:
        mid = 0.5 * (lo + hi)
        if curve(mid) > threshold:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    return RootResult(t, abs(curve(t) - threshold), lo, hi)


def _check_schedule(n_schedule: Sequence[int]) -> list[int]:
    schedule = [int(n) for n in n_schedule]
    if not schedule:
        raise DomainError("n_schedule is empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])) or schedule[0] < 1:
        raise DomainError("n_schedule must be strictly increasing positive integers")
    return schedule


def solve_beta_star(
    spec: TifsSpec, t_tol: float, n_schedule: Sequence[int], threshold: float = 1.0
) -> DimensionEstimate:
    """Estimate ``beta*`` from the roots of ``Z*_n(t) = threshold`` along ``n_schedule``.

    Stops as soon as two successive roots differ by less than ``t_tol``.
    """
    schedule = _check_schedule(n_schedule)
    t_hi = max(1.0, spec.dim)
    history: list[tuple[int, float]] = []
    diagnostics: list[str] = []
    result = None
    converged = False
    for n in schedule:
        result = bisect_decreasing(lambda t: z_star(spec, t, n).value, threshold, t_tol, t_hi)
        if result.diagnostic:
            diagnostics.append(f"n={n}: {result.diagnostic}")
        if history and abs(result.t - history[-1][1]) < t_tol:
            history.append((n, result.t))
            converged = True
            break
        history.append((n, result.t))
    return DimensionEstimate(result.t, history[-1][0], result.residual, history, converged, diagnostics)


def solve_beta(
    spec: TifsSpec, t_tol: float, n_schedule: Sequence[int], threshold: float = 1.0
) -> DimensionEstimate:
    """Estimate ``beta`` from the roots of ``Z_n(t) = threshold``.

    ``beta`` is governed by a liminf, so the estimate is the minimum root over
    the trailing window of the last five schedule entries. Convergence means
    that minimum moved by less than ``t_tol`` when the last entry was added.
    """
    schedule = _check_schedule(n_schedule)
    t_hi = max(1.0, spec.dim)
    history: list[tuple[int, float]] = []
    residuals: dict[int, float] = {}
    diagnostics: list[str] = []
    previous_min = None
    converged = False
    for n in schedule:
        result = bisect_decreasing(lambda t: z_level(spec, t, n).value, threshold, t_tol, t_hi)
        if result.diagnostic:
            diagnostics.append(f"n={n}: {result.diagnostic}")
        history.append((n, result.t))
        residuals[n] = result.residual
        window = history[-BETA_WINDOW:]
        current_min = min(t for _n, t in window)
        converged = (
            len(history) > BETA_WINDOW
            and previous_min is not None
            and abs(current_min - previous_min) < t_tol
        )
        previous_min = current_min
    window = history[-BETA_WINDOW:]
    n_min, t_min = min(window, key=lambda item: item[1])
    return DimensionEstimate(t_min, n_min, residuals[n_min], history, converged, diagnostics)


def moran_root(ratios: Sequence[float]) -> float:
    """The unique ``s >= 0`` with ``sum r_i^s = 1``."""
    ratios = [float(r) for r in ratios]
    if not ratios:
        raise DomainError("at least one ratio is required")
    if any(not 0.0 < r < 1.0 for r in ratios):
        raise DomainError("ratios must lie in (0, 1)")
    if len(ratios) == 1:
        return 0.0
    return bisect_decreasing(lambda s: math.fsum(r ** s for r in ratios), 1.0, 4e-12).t


@dataclass
class BranchGrowthReport:
    depths: list[int]
    values: list[float]
    slope: float
    holds: bool


def branch_growth_diagnostic(spec: TifsSpec, depth: int) -> BranchGrowthReport:
    """Per-depth maximum of ``(1/d) log #children`` over nodes of height ``d``.

    The condition is flagged as plausible when the tail of the sequence is
    decreasing, or already identically zero. A finite-depth heuristic only.
    """
    if depth < 2:
        raise DomainError("depth must be >= 2")
    limit = depth if spec.max_depth is None else min(depth, spec.max_depth - 1)
    if limit < 2:
        raise DomainError(f"the tree has no branching levels up to depth {depth}")
    levels = reachable_states(spec, limit)
    depths, values = [], []
    for d in range(1, limit + 1):
        counts = [len(spec.transitions(d, state)) for state in levels[d]]
        depths.append(d)
        values.append(max(math.log(c) for c in counts) / d)
    tail = max(2, len(values) // 2)
    x = np.array(depths[-tail:], dtype=float)
    y = np.array(values[-tail:])
    slope = float(np.polyfit(x, y, 1)[0]) if len(x) >= 2 else 0.0
    holds = bool(np.all(y <= 1e-12) or (slope < -1e-12 and np.all(np.diff(y) <= 1e-12)))
    return BranchGrowthReport(depths, values, slope, holds)
