"""Contraction maps on axis-aligned boxes and the TIFS container.

Maps are similarities ``x -> ratio * Q x + offset`` where ``Q`` is a signed
permutation matrix (a reflection in 1D, a quarter turn with optional
reflection in 2D), so images of boxes stay axis-aligned boxes and cylinder
sets are exact. Non-similarity conformal systems are supported only through
a :class:`DerivativeNormOracle` that supplies ``||Phi_tau'||`` per node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidNodeError, UnsupportedError
from .tree import ROOT, AutomatonTree, ExplicitTree, Path, children, reachable_states, state_of

BOX_TOL = 1e-12


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lower, upper]`` in ``R^d``."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or len(lo) not in (1, 2):
            raise DomainError("boxes must have matching dimension 1 or 2")
        if any(not b > a for a, b in zip(lo, hi)):
            raise DomainError(f"degenerate box {lo} -> {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lower, self.upper))

    @property
    def diam(self) -> float:
        return math.hypot(*self.widths)

    @property
    def volume(self) -> float:
        return math.prod(self.widths)

    def corners(self) -> np.ndarray:
        axes = [(a, b) for a, b in zip(self.lower, self.upper)]
        return np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.dim, -1).T

    def contains(self, point, tol: float = BOX_TOL) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=float))
        return p.shape == (self.dim,) and bool(
            np.all(p >= np.array(self.lower) - tol) and np.all(p <= np.array(self.upper) + tol)
        )

    def contains_box(self, other: "Box", tol: float = BOX_TOL) -> bool:
        return all(a - tol <= c and d <= b + tol
                   for a, b, c, d in zip(self.lower, self.upper, other.lower, other.upper))

    def interiors_overlap(self, other: "Box", tol: float = BOX_TOL) -> bool:
        """True iff the open boxes intersect; shared boundary does not count."""
        return all(min(b, d) - max(a, c) > tol
                   for a, b, c, d in zip(self.lower, self.upper, other.lower, other.upper))


# The ambient space X of a system is a box.
AmbientSpace = Box


def unit_interval() -> Box:
    return Box((0.0,), (1.0,))


def unit_square() -> Box:
    return Box((0.0, 0.0), (1.0, 1.0))


def _signed_permutation(d: int, flip: bool = False, quarter_turns: int = 0, reflect: bool = False) -> np.ndarray:
    if d == 1:
        return np.array([[-1.0 if flip else 1.0]])
    q = np.array([[1.0, 0.0], [0.0, 1.0]])
    if reflect:
        q = np.array([[1.0, 0.0], [0.0, -1.0]])
    turn = np.array([[0.0, -1.0], [1.0, 0.0]])
    for _ in range(quarter_turns % 4):
        q = turn @ q
    return q


@dataclass(frozen=True, eq=False)
class SimilarityMap:
    """``x -> ratio * Q x + offset`` with ``Q`` a signed permutation matrix."""

    ratio: float
    offset: tuple[float, ...]
    orthogonal: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise DomainError(f"similarity ratio must lie in (0, 1), got {self.ratio}")
        off = tuple(float(v) for v in np.atleast_1d(self.offset))
        q = np.asarray(self.orthogonal, dtype=float).reshape(len(off), len(off))
        if not (np.all(np.isin(q, (-1.0, 0.0, 1.0))) and np.allclose(np.abs(q).sum(axis=0), 1)
                and np.allclose(np.abs(q).sum(axis=1), 1)):
            raise DomainError("the linear part must be a signed permutation matrix")
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "orthogonal", q)

    @classmethod
    def line(cls, ratio: float, offset: float, flip: bool = False) -> "SimilarityMap":
        return cls(ratio, (offset,), _signed_permutation(1, flip=flip))

    @classmethod
    def plane(cls, ratio: float, offset: Sequence[float], quarter_turns: int = 0,
              reflect: bool = False) -> "SimilarityMap":
        return cls(ratio, tuple(offset), _signed_permutation(2, quarter_turns=quarter_turns, reflect=reflect))

    @property
    def dim(self) -> int:
        return len(self.offset)

    @property
    def linear(self) -> np.ndarray:
        return self.ratio * self.orthogonal

    def __call__(self, x):
        return self.linear @ np.atleast_1d(np.asarray(x, dtype=float)) + np.array(self.offset)

    def image(self, box: Box) -> Box:
        return affine_image(self.linear, np.array(self.offset), box)

    def maps_into(self, box: Box, tol: float = BOX_TOL) -> bool:
        return box.contains_box(self.image(box), tol)

    def __repr__(self) -> str:
        return f"SimilarityMap(ratio={self.ratio!r}, offset={self.offset!r})"


def affine_image(linear: np.ndarray, offset: np.ndarray, box: Box) -> Box:
    """Image of ``box`` under ``x -> linear x + offset`` for a scaled signed permutation."""
    lo = linear * np.array(box.lower)
    hi = linear * np.array(box.upper)
    lower = offset + np.minimum(lo, hi).sum(axis=1)
    upper = offset + np.maximum(lo, hi).sum(axis=1)
    return Box(tuple(lower), tuple(upper))


@dataclass(frozen=True)
class DerivativeNormOracle:
    """User-supplied ``||Phi_tau'||`` for systems that are not similarities.

    The callback must return 1 for the root and values in (0, 1] elsewhere.
    Whether the supremum is taken over X or over an open neighbourhood is the
    caller's responsibility; downstream results are conditional on it.
    """

    callback: Callable[[Path], float]
    distortion: float = 1.0

    def __post_init__(self):
        if self.distortion < 1.0:
            raise DomainError("distortion constant K must be >= 1")

    def __call__(self, node: Path) -> float:
        value = float(self.callback(tuple(node)))
        if not 0.0 < value <= 1.0:
            raise DomainError(f"derivative norm {value} at {node!r} is outside (0, 1]")
        if not node and value != 1.0:
            raise DomainError("derivative norm at the root must be 1")
        return value


class TifsSpec:
    """A tree iterated function system: ambient box, tree source and edge maps.

    Edge payloads are :class:`SimilarityMap` instances unless a
    ``norm_oracle`` is given, in which case payloads are opaque and only the
    oracle's norms are used. ``contraction_bound`` is the system-wide ``s``;
    for explicit trees it defaults to the largest edge ratio, for automata it
    must be declared and is enforced lazily as edges are visited.
    """

    def __init__(
        self,
        source: ExplicitTree | AutomatonTree,
        space: Box | None = None,
        contraction_bound: float | None = None,
        norm_oracle: DerivativeNormOracle | None = None,
        name: str = "",
    ):
        self.source = source
        self.space = space if space is not None else unit_interval()
        self.norm_oracle = norm_oracle
        self.name = name
        self._checked: set[int] = set()
        if norm_oracle is not None:
            if contraction_bound is None:
                raise DomainError("oracle-backed systems must declare a contraction bound")
        elif isinstance(source, ExplicitTree):
            ratios = []
            for node in source.internal_nodes():
                for _label, payload, _child in source.transitions(len(node), node):
                    ratios.append(self._map(payload).ratio)
            if contraction_bound is None:
                contraction_bound = max(ratios)
        elif contraction_bound is None:
            raise DomainError("automaton systems must declare a contraction bound")
        if not 0.0 < contraction_bound < 1.0 - 1e-9:
            raise DomainError(f"contraction bound {contraction_bound} must lie in (0, 1 - 1e-9)")
        self.contraction_bound = float(contraction_bound)
        if norm_oracle is None and isinstance(source, ExplicitTree):
            for node in source.internal_nodes():
                for _label, payload, _child in source.transitions(len(node), node):
                    self._validate(payload)

    # tree-source protocol, delegated
    @property
    def root_state(self):
        return self.source.root_state

    @property
    def max_depth(self) -> int | None:
        return self.source.max_depth

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def is_similarity(self) -> bool:
        return self.norm_oracle is None

    def transitions(self, depth: int, state):
        entries = self.source.transitions(depth, state)
        if self.norm_oracle is None:
            for _label, payload, _next in entries:
                self._validate(payload)
        return entries

    def _map(self, payload: Any) -> SimilarityMap:
        if not isinstance(payload, SimilarityMap):
            raise UnsupportedError(f"edge payload {payload!r} is not a SimilarityMap")
        return payload

    def _validate(self, payload: Any) -> None:
        if id(payload) in self._checked:
            return
        m = self._map(payload)
        if m.dim != self.dim:
            raise DomainError(f"map dimension {m.dim} differs from the ambient dimension {self.dim}")
        if m.ratio > self.contraction_bound + 1e-15:
            raise DomainError(f"edge ratio {m.ratio} exceeds the contraction bound {self.contraction_bound}")
        if not m.maps_into(self.space):
            raise DomainError(f"{m!r} does not map the ambient box into itself")
        self._checked.add(id(payload))

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"TifsSpec({label}{self.source!r}, space={self.space!r})"


def edge_maps(spec: TifsSpec, node: Path) -> list[SimilarityMap]:
    """The maps ``phi_{node|1}, ..., phi_{node|n}`` along ``node``."""
    maps = []
    state = spec.root_state
    for depth, label in enumerate(node):
        for lab, payload, nxt in spec.transitions(depth, state):
            if lab == label:
                maps.append(spec._map(payload))
                state = nxt
                break
        else:
            raise InvalidNodeError(f"{node!r} is not a node of the tree")
    return maps


def compose_norm(spec: TifsSpec, node: Path) -> float:
    """``||Phi_node'||``; the product of edge ratios for similarity systems, 1 at the root."""
    node = tuple(node)
    if spec.norm_oracle is not None:
        state_of(spec, node)
        return spec.norm_oracle(node)
    value = 1.0
    for m in edge_maps(spec, node):
        value *= m.ratio
    return value


def composite(spec: TifsSpec, node: Path) -> tuple[np.ndarray, np.ndarray]:
    """Linear part and offset of ``Phi_node = phi_{node|1} o ... o phi_{node|n}``."""
    if spec.norm_oracle is not None:
        raise UnsupportedError("oracle-backed systems carry no explicit maps")
    linear = np.eye(spec.dim)
    offset = np.zeros(spec.dim)
    for m in edge_maps(spec, tuple(node)):
        offset = linear @ np.array(m.offset) + offset
        linear = linear @ m.linear
    return linear, offset


def apply_map(spec: TifsSpec, node: Path, x):
    """``Phi_node(x)``; a float in 1D when ``x`` is a scalar."""
    point = np.atleast_1d(np.asarray(x, dtype=float))
    if not spec.space.contains(point):
        raise DomainError(f"{x!r} lies outside the ambient space")
    linear, offset = composite(spec, node)
    y = linear @ point + offset
    return float(y[0]) if np.ndim(x) == 0 else y


def cylinder_set(spec: TifsSpec, node: Path) -> Box:
    """The box ``X_node = Phi_node(X)``."""
    linear, offset = composite(spec, node)
    return affine_image(linear, offset, spec.space)


@dataclass
class OscReport:
    ok: bool
    depth: int
    violations: list[tuple[Path, int, int]]

    def __bool__(self) -> bool:
        return self.ok


def check_osc(spec: TifsSpec, depth: int) -> OscReport:
    """Check that sibling images ``phi_a(X)``, ``phi_b(X)`` have disjoint interiors.

    Every node of height below ``depth`` is covered; for automata each
    reachable ``(depth, state)`` pair is checked once and reported through a
    representative path.
    """
    if spec.norm_oracle is not None:
        raise UnsupportedError("the open set condition needs explicit maps")
    violations = []
    limit = depth if spec.max_depth is None else min(depth, spec.max_depth)
    levels = reachable_states(spec, limit - 1) if limit >= 1 else []
    for d, states in enumerate(levels):
        for state, path in states.items():
            images = [(label, spec._map(payload).image(spec.space))
                      for label, payload, _ in spec.transitions(d, state)]
            for i, (la, box_a) in enumerate(images):
                for lb, box_b in images[i + 1:]:
                    if box_a.interiors_overlap(box_b):
                        violations.append((path, la, lb))
    return OscReport(not violations, depth, violations)


__all__ = [
    "AmbientSpace", "Box", "DerivativeNormOracle", "OscReport", "SimilarityMap", "TifsSpec",
    "affine_image", "apply_map", "check_osc", "children", "compose_norm", "composite",
    "cylinder_set", "edge_maps", "unit_interval", "unit_square", "ROOT",
]
