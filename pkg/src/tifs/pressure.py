"""Level pressure ``Z_n(t)`` and antichain-minimized pressure ``Z*_{>rho,n}(t)``.

The minimum over maximal antichains is computed by a tree recursion: a node
``c`` either joins the antichain or is replaced by an optimal antichain of its
subtree, independently for every child. Dividing the subtree value by
``||Phi_c'||^t`` gives the normalized value

    U(c) = 1                                 if |c| = n
    U(c) = min(1, sum_{c'} r_{c'}^t U(c'))   otherwise,

which for similarity systems depends only on ``(depth, state)``. Automaton
trees are therefore handled in time linear in the number of reachable
``(depth, state)`` pairs rather than in the number of nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .errors import CapacityError, DomainError, UnsupportedError
from .maps import TifsSpec, compose_norm
from .tree import ROOT, Antichain, ExplicitTree, Path, enumerate_maximal_antichains, state_of

TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PressureValue:
    value: float
    t: float
    n: int
    root: Path = ROOT
    witness: Antichain | None = None
    witness_size: int | None = None

    def __float__(self) -> float:
        return self.value


def _check_t(t: float) -> float:
    t = float(t)
    if not t >= 0.0 or math.isinf(t):
        raise DomainError(f"exponent t must be a finite number >= 0, got {t}")
    return t


def _require_state_memo(spec: TifsSpec) -> None:
    if spec.norm_oracle is not None and not isinstance(spec.source, ExplicitTree):
        raise UnsupportedError(
            "oracle-backed norms are path dependent and cannot be memoized on automaton states"
        )


class LevelGraph:
    """Reachable ``(depth, state)`` pairs below a root, with indexed edges.

    Level ``i`` holds the states at depth ``len(root) + i``; ``edges[i][j]``
    lists ``(label, payload, child_index)`` for state ``j``. Levels are
    extended on demand and shared between evaluations at different ``t``.
    """

    def __init__(self, spec: TifsSpec, root: Path = ROOT):
        self.spec = spec
        self.root = tuple(root)
        self.h = len(self.root)
        root_state = state_of(spec, self.root)
        self.states: list[list[Any]] = [[root_state]]
        self.index: list[dict[Any, int]] = [{root_state: 0}]
        self.paths: list[list[Path]] = [[self.root]]
        self.edges: list[list[list[tuple[int, Any, int]]]] = []

    @property
    def depth(self) -> int:
        return self.h + len(self.states) - 1

    def extend(self, n: int) -> "LevelGraph":
        if self.spec.max_depth is not None and n > self.spec.max_depth:
            raise DomainError(f"depth {n} exceeds the tree's max depth {self.spec.max_depth}")
        while self.depth < n:
            d = self.depth
            states, index, paths, level_edges = [], {}, [], []
            for i, state in enumerate(self.states[-1]):
                out = []
                for label, payload, child in self.spec.transitions(d, state):
                    j = index.get(child)
                    if j is None:
                        j = index[child] = len(states)
                        states.append(child)
                        paths.append(self.paths[-1][i] + (label,))
                    out.append((label, payload, j))
                level_edges.append(out)
            self.edges.append(level_edges)
            self.states.append(states)
            self.index.append(index)
            self.paths.append(paths)
        return self

    def locate(self, node: Path) -> tuple[int, int]:
        """Level offset and state index of ``node`` (which must lie below the root)."""
        node = tuple(node)
        if node[: self.h] != self.root:
            raise DomainError(f"{node!r} is not below {self.root!r}")
        self.extend(len(node))
        level = len(node) - self.h
        return level, self.index[level][state_of(self.spec, node)]

    def factors(self, t: float, levels: int) -> list[list[list[float]]]:
        """``||phi_c'||^t`` per edge relative to the parent, for the first ``levels`` levels."""
        if self.spec.norm_oracle is None:
            return [[[payload.ratio ** t for _l, payload, _j in out] for out in level]
                    for level in self.edges[:levels]]
        oracle = self.spec.norm_oracle
        result = []
        for i, level in enumerate(self.edges[:levels]):
            rows = []
            for parent, out in zip(self.paths[i], level):
                base = oracle(parent)
                rows.append([(oracle(self.paths[i + 1][j]) / base) ** t for _l, _p, j in out])
            result.append(rows)
        return result


def level_graph(spec: TifsSpec, root: Path = ROOT, n: int | None = None) -> LevelGraph:
    """Cached :class:`LevelGraph` of ``spec`` below ``root``, extended to depth ``n``."""
    _require_state_memo(spec)
    root = tuple(root)
    cache = spec.__dict__.setdefault("_level_graphs", {})
    graph = cache.get(root)
    if graph is None:
        graph = cache[root] = LevelGraph(spec, root)
    if n is not None:
        graph.extend(n)
    return graph


def _norm_t(spec: TifsSpec, node: Path, t: float) -> float:
    if spec.norm_oracle is not None:
        return spec.norm_oracle(node) ** t
    return compose_norm(spec, node) ** t


class StarTable:
    """Normalized antichain DP over all reachable ``(depth, state)`` pairs below ``root``.

    For the state at level ``i``, index ``j``: ``u[i][j]`` is the normalized
    optimum of the subtree with the node itself allowed, ``below[i][j]`` the
    normalized optimum strictly below the node, and ``keep[i][j]`` whether
    the node itself is chosen. Ties keep the node.
    """

    def __init__(self, spec: TifsSpec, t: float, n: int, root: Path = ROOT):
        self.spec = spec
        self.t = _check_t(t)
        self.n = int(n)
        self.root = tuple(root)
        if self.n <= len(self.root):
            raise DomainError(f"horizon n={n} must exceed the root height {len(self.root)}")
        graph = self.graph = level_graph(spec, self.root, self.n)
        levels = self.n - graph.h
        factors = graph.factors(self.t, levels)
        width = len(graph.states[levels])
        self.u = [None] * (levels + 1)
        self.below: list = [None] * levels
        self.keep = [None] * (levels + 1)
        self.u[levels] = [1.0] * width
        self.keep[levels] = [True] * width
        for i in range(levels - 1, -1, -1):
            nxt = self.u[i + 1]
            below = [
                sum(f * nxt[j] for f, (_l, _p, j) in zip(frow, out))
                for frow, out in zip(factors[i], graph.edges[i])
            ]
            self.below[i] = below
            self.keep[i] = [b >= 1.0 for b in below]
            self.u[i] = [min(1.0, b) for b in below]

    def _where(self, node: Path, state=None) -> tuple[int, int]:
        node = tuple(node)
        if state is None:
            return self.graph.locate(node)
        level = len(node) - self.graph.h
        return level, self.graph.index[level][state]

    def star_below(self, node: Path, state=None) -> float:
        """``Z*_{>node,n}(t)`` for any node at or below the table root with height < n."""
        node = tuple(node)
        if len(node) >= self.n:
            raise DomainError(f"{node!r} has no nodes strictly below it within height {self.n}")
        i, j = self._where(node, state)
        return _norm_t(self.spec, node, self.t) * self.below[i][j]

    @property
    def value(self) -> float:
        return self.star_below(self.root, self.graph.states[0][0])

    def is_kept(self, node: Path, state=None) -> bool:
        i, j = self._where(node, state)
        return self.keep[i][j]

    def optimal_antichain(self, node: Path | None = None, cap: int = 1_000_000) -> Antichain:
        """The optimal maximal antichain strictly below ``node`` (``A_node``)."""
        node = self.root if node is None else tuple(node)
        i0, j0 = self._where(node)
        edges = self.graph.edges
        members: list[Path] = []
        stack = [(node, i0, j0)]
        while stack:
            path, i, j = stack.pop()
            for label, _payload, k in reversed(edges[i][j]):
                child = path + (label,)
                if self.keep[i + 1][k]:
                    members.append(child)
                    if len(members) > cap:
                        raise CapacityError(f"witness has more than {cap} members")
                else:
                    stack.append((child, i + 1, k))
        return Antichain.of(members, self.n, node)

    def antichain_size(self, node: Path | None = None) -> int:
        """Cardinality of ``A_node`` without materializing it."""
        node = self.root if node is None else tuple(node)
        i0, j0 = self._where(node)
        edges = self.graph.edges
        levels = self.n - self.graph.h
        sizes = [1] * len(self.keep[levels])
        for i in range(levels - 1, i0, -1):
            sizes = [
                1 if kept else sum(sizes[k] for _l, _p, k in out)
                for kept, out in zip(self.keep[i], edges[i])
            ]
        return sum(sizes[k] for _l, _p, k in edges[i0][j0])


def z_star(
    spec: TifsSpec,
    t: float,
    n: int,
    root: Path = ROOT,
    want_witness: bool = False,
    witness_cap: int = 1_000_000,
) -> PressureValue:
    """Minimum of ``sum ||Phi_w'||^t`` over maximal antichains strictly below ``root`` up to height ``n``."""
    table = StarTable(spec, t, n, root)
    witness = table.optimal_antichain(table.root, witness_cap) if want_witness else None
    size = len(witness) if witness is not None else table.antichain_size()
    return PressureValue(table.value, table.t, table.n, table.root, witness, size)


def z_level(spec: TifsSpec, t: float, n: int) -> PressureValue:
    """``Z_n(t)``, the sum of ``||Phi_w'||^t`` over the nodes of height ``n``.

    Path products are pushed forward as per-state aggregates, one depth at a time.
    """
    t = _check_t(t)
    if n < 1:
        raise DomainError("n must be >= 1")
    graph = level_graph(spec, ROOT, n)
    factors = graph.factors(t, n)
    mass = [1.0]
    for i in range(n):
        nxt = [0.0] * len(graph.states[i + 1])
        for m, frow, out in zip(mass, factors[i], graph.edges[i]):
            for f, (_l, _p, j) in zip(frow, out):
                nxt[j] += m * f
        mass = nxt
    return PressureValue(sum(mass), t, n, ROOT, None, None)


def z_star_bruteforce(
    spec: TifsSpec, t: float, n: int, root: Path = ROOT, cap: int = 100_000
) -> PressureValue:
    """Exhaustive minimum over every maximal antichain; a test oracle for :func:`z_star`.

    Among antichains within ``TIE_RTOL`` of the minimum, the one with the
    smallest total height wins: that is the coarsest optimal antichain, which
    is the one the recursion returns when it keeps nodes on ties.
    """
    t = _check_t(t)
    root = tuple(root)
    if n <= len(root):
        raise DomainError(f"horizon n={n} must exceed the root height {len(root)}")
    weight: dict[Path, float] = {}

    def w(node: Path) -> float:
        if node not in weight:
            weight[node] = compose_norm(spec, node) ** t
        return weight[node]

    scored = []
    for antichain in enumerate_maximal_antichains(spec, root, n, cap):
        total = sum(w(m) for m in antichain)
        scored.append((total, sum(len(m) for m in antichain), antichain))
    best_value = min(s[0] for s in scored)
    near = [s for s in scored if s[0] <= best_value * (1 + TIE_RTOL)]
    value, _height, witness = min(near, key=lambda s: s[1])
    return PressureValue(best_value, t, n, root, witness, len(witness))


def z_star_monotonicity_probe(spec: TifsSpec, t: float, n_list: Sequence[int]) -> list[PressureValue]:
    """``Z*_n(t)`` for each ``n`` in a strictly increasing list."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be strictly increasing")
    return [z_star(spec, t, n) for n in n_list]


def antichain_sum(spec: TifsSpec, t: float, members: Iterable[Path]) -> float:
    return sum(compose_norm(spec, m) ** t for m in members)
