"""Built-in systems: the ternary Cantor set, non-autonomous IFSs, and the
two-scale spine counterexample separating ``beta*`` from ``beta``.

The counterexample lives on the full binary tree over ``X = [0, 1]``. With
``n_0 = 0 < n_1 < n_2 < ...`` and ``k(d)`` the index with
``n_k <= d < n_{k+1}``, the edge into a node ``w`` of height ``d`` carries
ratio 1/2 when ``1^{k(d)}`` is a prefix of ``w`` and ratio 1/3 otherwise;
the translation is picked by the last label of ``w``.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import CapacityError, DomainError
from .maps import Box, SimilarityMap, TifsSpec, unit_interval
from .tree import AutomatonTree

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

# psi_{i, 1/2} and psi_{i, 1/3} on [0, 1]
PSI = {
    (0, HALF): SimilarityMap.line(0.5, 0.0),
    (1, HALF): SimilarityMap.line(0.5, 0.5),
    (0, THIRD): SimilarityMap.line(1 / 3, 0.0),
    (1, THIRD): SimilarityMap.line(1 / 3, 2 / 3),
}


def cantor_tifs() -> TifsSpec:
    """Middle-thirds Cantor system as a one-state automaton."""
    entries = [(0, PSI[0, THIRD], "c"), (1, PSI[1, THIRD], "c")]
    source = AutomatonTree("c", lambda depth, state: entries, branching_bound=2)
    return TifsSpec(source, unit_interval(), contraction_bound=1 / 3, name="cantor")


def non_autonomous_tifs(
    levels: Sequence[Sequence[SimilarityMap]],
    space: Box | None = None,
    cycle: bool = False,
) -> TifsSpec:
    """Non-autonomous IFS: the maps at depth ``d`` are ``levels[d-1]`` regardless of the path.

    The automaton state is the depth alone. With ``cycle=True`` the levels
    repeat periodically and the tree is infinite; otherwise it stops at
    ``len(levels)``.
    """
    levels = [list(level) for level in levels]
    if not levels:
        raise DomainError("at least one level is required")
    for i, level in enumerate(levels):
        if not level:
            raise DomainError(f"level {i + 1} has an empty alphabet")
    table = [[(label, m, None) for label, m in enumerate(level)] for level in levels]
    source = AutomatonTree(
        None,
        lambda depth, state: table[depth % len(table)],
        max_depth=None if cycle else len(levels),
        branching_bound=max(len(level) for level in levels),
    )
    bound = max(m.ratio for level in levels for m in level)
    spec = TifsSpec(source, space or unit_interval(), contraction_bound=bound, name="non_autonomous")
    # the alphabet is finite, so check every map now rather than lazily
    for depth in range(len(levels)):
        spec.transitions(depth, None)
    return spec


def default_t(k: int) -> Fraction:
    return Fraction(k, k + 1)


@dataclass(frozen=True)
class CounterexampleParams:
    """Sequences ``t_k`` and ``n_k`` for the spine counterexample.

    ``t_rule(k)`` gives ``t_k`` for ``k >= 1``. ``n_rule(k)`` defaults to the
    smallest integer ``>= k / (1 - t_k)``; with the default ``t_k = k/(k+1)``
    this is ``n_k = k(k+1)``. Only ``k <= k_cap`` is materialized, which
    bounds the supported depth at ``n_{k_cap+1} - 1``.
    """

    t_rule: Callable[[int], float | Fraction] = default_t
    n_rule: Callable[[int], int] | None = None
    k_cap: int = 40
    _t: tuple = field(init=False, repr=False, compare=False)
    _n: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.k_cap < 1:
            raise DomainError("k_cap must be >= 1")
        ks = range(1, self.k_cap + 2)
        t = [self.t_rule(k) for k in ks]
        if self.n_rule is None:
            n = [_ceil_ratio(k, tk) for k, tk in zip(ks, t)]
        else:
            n = [int(self.n_rule(k)) for k in ks]
        for i, (k, tk, nk) in enumerate(zip(ks, t, n)):
            if not 0 < tk < 1:
                raise DomainError(f"t_{k} = {tk} is not in (0, 1)")
            if i and not tk > t[i - 1]:
                raise DomainError(f"t_k must be strictly increasing (t_{k} = {tk})")
            if i and not nk > n[i - 1]:
                raise DomainError(f"n_k must be strictly increasing (n_{k} = {nk})")
            if not _meets_condition(k, tk, nk):
                raise DomainError(f"n_{k} = {nk} violates n_k >= k / (1 - t_k) = {k / (1 - float(tk)):.6g}")
        object.__setattr__(self, "_t", (Fraction(0),) + tuple(t))
        object.__setattr__(self, "_n", (0,) + tuple(n))

    @classmethod
    def from_sequences(cls, t_values: Sequence[float], n_values: Sequence[int]) -> "CounterexampleParams":
        """Explicit ``t_1, t_2, ...`` and ``n_1, n_2, ...``; ``k_cap`` is one less than their length."""
        if len(t_values) != len(n_values) or len(t_values) < 2:
            raise DomainError("t_k and n_k lists must have equal length >= 2")
        t_values, n_values = list(t_values), list(n_values)
        return cls(lambda k: t_values[k - 1], lambda k: n_values[k - 1], len(t_values) - 1)

    def t(self, k: int) -> float:
        return float(self._t[k])

    def n(self, k: int) -> int:
        return self._n[k]

    @property
    def max_depth(self) -> int:
        return self._n[-1] - 1

    def k_of(self, depth: int) -> int:
        """The unique ``k`` with ``n_k <= depth < n_{k+1}``."""
        if depth < 0:
            raise DomainError("depth must be >= 0")
        if depth > self.max_depth:
            needed = self._required_k(depth)
            hint = f"k_cap >= {needed}" if needed else "longer t_k/n_k sequences"
            raise CapacityError(f"depth {depth} needs {hint} (have k_cap = {self.k_cap})")
        return bisect.bisect_right(self._n, depth) - 1

    def _required_k(self, depth: int) -> int | None:
        for k in range(self.k_cap + 1, 100_000):
            try:
                nk = self.n_rule(k + 1) if self.n_rule else _ceil_ratio(k + 1, self.t_rule(k + 1))
            except IndexError:
                # explicit sequences ran out
                return None
            if nk - 1 >= depth:
                return k
        return None

    def k0(self, t: float) -> int:
        """Smallest ``k >= 1`` with ``t_k >= t``.

        A float ``t`` is read as the decimal it prints as, so ``k0(0.8)`` is 4
        for ``t_k = k/(k+1)`` even though the binary 0.8 exceeds 4/5.
        """
        target = Fraction(repr(t)) if isinstance(t, float) else Fraction(t)
        for k in range(1, self.k_cap + 2):
            if Fraction(self._t[k]) >= target:
                return k
        raise CapacityError(f"no t_k >= {t} with k <= {self.k_cap + 1}")


def _ceil_ratio(k: int, tk) -> int:
    if isinstance(tk, Fraction):
        return math.ceil(k / (1 - tk))
    return math.ceil(k / (1 - tk) - 1e-9)


def _meets_condition(k: int, tk, nk: int) -> bool:
    if isinstance(tk, Fraction):
        return nk >= k / (1 - tk)
    return nk >= k / (1 - tk) * (1 - 1e-12)


ON_SPINE = "on"


def counterexample_tifs(params: CounterexampleParams | None = None) -> TifsSpec:
    """Spine counterexample as a depth-indexed automaton.

    States are ``"on"`` for the spine ``1^d`` and ``("off", p)`` for nodes
    whose leading run of ones has length exactly ``p``, with ``p`` capped at
    ``k_cap`` (beyond it every reachable depth sees ratio 1/2 anyway).
    """
    params = params or CounterexampleParams()

    def transition(depth: int, state):
        k = params.k_of(depth + 1)
        out = []
        for label in (0, 1):
            if state == ON_SPINE:
                ones = depth + 1 if label == 1 else depth
                nxt = ON_SPINE if label == 1 else ("off", min(depth, params.k_cap))
            else:
                ones = state[1]
                nxt = state
            ratio = HALF if ones >= k else THIRD
            out.append((label, PSI[label, ratio], nxt))
        return out

    source = AutomatonTree(ON_SPINE, transition, branching_bound=2)
    spec = TifsSpec(source, unit_interval(), contraction_bound=0.5, name="counterexample")
    spec.params = params
    return spec

