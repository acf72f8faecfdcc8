"""Chain measures on the level ``T^(n)`` and their push-forward to the interval.

For every node ``rho`` with ``|rho| < n`` an optimal maximal antichain
``A_rho`` strictly below it is fixed (the coarsest optimum, as returned by
the pressure recursion). A chain descends from the root through successive
optimal antichains, and the mass of a node reached by the chain
``rho_0, ..., rho_k`` is

    m*(tau) = prod_i ||Phi_{rho_{i+1}}'||^t / Z*_{>rho_i,n}(t).

Masses are accumulated in log space.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .errors import CapacityError, DomainError, NotInAStarError, OscViolationError, UnsupportedError
from .maps import TifsSpec, check_osc, cylinder_set
from .pressure import StarTable
from .tree import ROOT, Antichain, Path, format_path, is_prefix

DEFAULT_NODE_CAP = 200_000
TINY_MASS = 1e-300


@dataclass
class _Node:
    level_index: int
    log_norm: float


@dataclass
class ChainMeasure:
    spec: TifsSpec
    t: float
    n: int
    masses: dict[Path, float]
    log_masses: dict[Path, float]
    antichain_cache: dict[Path, tuple[Antichain, float]] = field(repr=False)
    chain_cache: dict[Path, tuple[Path, ...]] = field(repr=False)
    z_star: float = 0.0
    _table: StarTable | None = field(default=None, repr=False)
    _nodes: dict[Path, _Node] = field(default_factory=dict, repr=False)

    def optimal_antichain(self, rho: Path) -> tuple[Antichain, float]:
        """``(A_rho, Z*_{>rho,n}(t))``, computed once and cached."""
        rho = tuple(rho)
        cached = self.antichain_cache.get(rho)
        if cached is None:
            if rho not in self._nodes or len(rho) >= self.n:
                raise DomainError(f"{rho!r} is not a node of height < {self.n}")
            node = self._nodes[rho]
            star = math.exp(self.t * node.log_norm) * self._table.below[len(rho)][node.level_index]
            cached = self.antichain_cache[rho] = (self._table.optimal_antichain(rho), star)
        return cached

    def log_mass(self, tau: Path) -> float:
        """``log m*(tau)`` for ``tau`` in ``A*``."""
        chain = tau_chain(self, tau)
        total = 0.0
        for parent, child in zip(chain, chain[1:]):
            _members, star = self.optimal_antichain(parent)
            total += self.t * self._nodes[child].log_norm - math.log(star)
        return total

    def mass(self, tau: Path) -> float:
        return math.exp(self.log_mass(tau))

    @property
    def a_star(self) -> set[Path]:
        nodes: set[Path] = set()
        for leaf in self.masses:
            nodes.update(tau_chain(self, leaf))
        return nodes

    def log_norm(self, node: Path) -> float:
        return self._nodes[tuple(node)].log_norm

    def nodes(self) -> list[Path]:
        return list(self._nodes)


def _materialize(spec: TifsSpec, table: StarTable, n: int, cap: int) -> dict[Path, _Node]:
    graph = table.graph
    oracle = spec.norm_oracle
    nodes = {ROOT: _Node(0, 0.0)}
    frontier = [ROOT]
    for level in range(n):
        nxt = []
        for path in frontier:
            parent = nodes[path]
            for label, payload, j in graph.edges[level][parent.level_index]:
                child = path + (label,)
                if oracle is None:
                    log_norm = parent.log_norm + math.log(payload.ratio)
                else:
                    log_norm = math.log(oracle(child))
                nodes[child] = _Node(j, log_norm)
                nxt.append(child)
                if len(nodes) > cap:
                    raise CapacityError(f"more than {cap} nodes up to depth {n}")
        frontier = nxt
    return nodes


def build_chain_measure(spec: TifsSpec, t: float, n: int, node_cap: int = DEFAULT_NODE_CAP) -> ChainMeasure:
    """Chain measure on ``T^(n)``; requires materializing every node up to height ``n``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    table = StarTable(spec, t, n)
    nodes = _materialize(spec, table, n, node_cap)
    cm = ChainMeasure(spec, table.t, n, {}, {}, {}, {}, table.value, table, nodes)
    for path in nodes:
        if len(path) == n:
            log_m = cm.log_mass(path)
            cm.log_masses[path] = log_m
            cm.masses[path] = math.exp(log_m) if log_m >= math.log(TINY_MASS) else 0.0
    return cm


def tau_chain(cm: ChainMeasure, tau: Path) -> tuple[Path, ...]:
    """The unique chain from the root to ``tau`` through the fixed optimal antichains."""
    tau = tuple(tau)
    cached = cm.chain_cache.get(tau)
    if cached is not None:
        return cached
    if tau not in cm._nodes:
        raise DomainError(f"{tau!r} is not a node of height <= {cm.n}")
    chain = [ROOT]
    while chain[-1] != tau:
        members, _z = cm.optimal_antichain(chain[-1])
        # maximality gives a comparable member; if one lies strictly below tau, tau is skipped
        step = [m for m in members if is_prefix(m, tau) or is_prefix(tau, m)]
        if len(step) != 1 or not is_prefix(step[0], tau):
            raise NotInAStarError(f"{tau!r} is skipped by the chain at {step[0]!r}")
        chain.append(step[0])
    result = tuple(chain)
    cm.chain_cache[tau] = result
    return result


def _cylinder_sums(cm: ChainMeasure) -> dict[Path, float]:
    sums = dict(cm.masses)
    by_depth: dict[int, list[Path]] = {}
    for path in cm._nodes:
        by_depth.setdefault(len(path), []).append(path)
    for depth in range(cm.n - 1, -1, -1):
        for path in by_depth.get(depth, ()):
            sums[path] = 0.0
        for path in by_depth.get(depth + 1, ()):
            sums[path[:-1]] += sums[path]
    return sums


@dataclass
class DistReport:
    ok: bool
    checked: int
    failures: list[tuple[Path, float, float]]


def verify_dist(cm: ChainMeasure, rtol: float = 1e-10) -> DistReport:
    """Check that the masses below every ``rho`` in ``A*`` add up to ``m*(rho)``."""
    sums = _cylinder_sums(cm)
    failures = []
    a_star = sorted(cm.a_star, key=lambda p: (len(p), p))
    for rho in a_star:
        expected = 1.0 if rho == ROOT else cm.mass(rho)
        if not math.isclose(sums[rho], expected, rel_tol=rtol, abs_tol=0.0):
            failures.append((rho, sums[rho], expected))
    return DistReport(not failures, len(a_star), failures)


@dataclass
class GibbsReport:
    ok: bool
    worst_ratio: float
    worst_node: Path | None
    checked: int


def gibbs_check(cm: ChainMeasure, tol: float = 1e-10) -> GibbsReport:
    """Worst ``mu*([w]|_n) Z*_n(t) / ||Phi_w'||^t`` over all non-root nodes; passes iff <= 1 + tol."""
    sums = _cylinder_sums(cm)
    log_z = math.log(cm.z_star)
    worst, worst_node, checked = -math.inf, None, 0
    for path, node in cm._nodes.items():
        if path == ROOT:
            continue
        checked += 1
        if sums[path] <= 0.0:
            continue
        ratio = math.exp(math.log(sums[path]) + log_z - cm.t * node.log_norm)
        if ratio > worst:
            worst, worst_node = ratio, path
    return GibbsReport(worst <= 1.0 + tol, worst, worst_node, checked)


@dataclass
class PushedMeasure1D:
    """``mu_{t,n}``: each level-``n`` mass spread uniformly over its cylinder interval."""

    chain_measure: ChainMeasure
    paths: list[Path]
    lower: np.ndarray
    upper: np.ndarray
    mass: np.ndarray


def push_forward(cm: ChainMeasure) -> PushedMeasure1D:
    spec = cm.spec
    if spec.norm_oracle is not None:
        raise UnsupportedError("the push-forward needs explicit similarity maps")
    if spec.dim != 1:
        raise UnsupportedError("the push-forward is implemented for intervals only")
    paths = sorted(cm.masses)
    boxes = [cylinder_set(spec, p) for p in paths]
    return PushedMeasure1D(
        cm,
        paths,
        np.array([b.lower[0] for b in boxes]),
        np.array([b.upper[0] for b in boxes]),
        np.array([cm.masses[p] for p in paths]),
    )


def _overlap_mass(pm: PushedMeasure1D, a: float, b: float) -> float:
    overlap = np.clip(np.minimum(pm.upper, b) - np.maximum(pm.lower, a), 0.0, None)
    return float(np.sum(pm.mass * overlap / (pm.upper - pm.lower)))


def mu_interval(pm: PushedMeasure1D, a: float, b: float) -> float:
    """``mu_{t,n}([a, b])``."""
    space = pm.chain_measure.spec.space
    lo, hi = space.lower[0], space.upper[0]
    if a > b:
        raise DomainError(f"reversed interval [{a}, {b}]")
    if a < lo - 1e-12 or b > hi + 1e-12:
        raise DomainError(f"[{a}, {b}] is not contained in [{lo}, {hi}]")
    return _overlap_mass(pm, a, b)


@dataclass
class GibXReport:
    ok: bool
    worst_slack: float
    worst_node: Path | None
    checked: int


def gib_x_check(pm: PushedMeasure1D, tol: float = 1e-10) -> GibXReport:
    """Check ``mu_{t,n}(X_w) <= ||Phi_w'||^t / Z*_n(t)`` for every non-root node up to height ``n``.

    Refuses (raises :class:`OscViolationError`) when sibling images overlap.
    """
    cm = pm.chain_measure
    osc = check_osc(cm.spec, cm.n)
    if not osc.ok:
        raise OscViolationError(f"open set condition fails: {osc.violations[:5]}")
    worst, worst_node = math.inf, None
    for path, node in cm._nodes.items():
        if path == ROOT:
            continue
        box = cylinder_set(cm.spec, path)
        measured = _overlap_mass(pm, box.lower[0], box.upper[0])
        bound = math.exp(cm.t * node.log_norm) / cm.z_star
        slack = bound - measured
        if slack < worst:
            worst, worst_node = slack, path
    return GibXReport(worst >= -tol, worst, worst_node, len(cm._nodes) - 1)


def write_mass_csv(cm: ChainMeasure, fh: IO[str]) -> None:
    """Mass table with columns ``path, mass, log_mass``; masses below 1e-300 are left blank."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["path", "mass", "log_mass"])
    for path in sorted(cm.masses):
        log_m = cm.log_masses[path]
        mass = f"{math.exp(log_m):.17g}" if log_m >= math.log(TINY_MASS) else ""
        writer.writerow([format_path(path), mass, f"{log_m:.17g}"])
