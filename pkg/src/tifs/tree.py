"""Rooted trees, paths, cylinders and maximal antichains.

A node of a tree is a :data:`Path`, the tuple of child labels read from the
root. Two kinds of tree sources are supported:

* :class:`ExplicitTree` stores a children table down to a fixed depth.
* :class:`AutomatonTree` generates children lazily from a depth-indexed state
  machine, so exponentially large trees can be handled through their
  ``(depth, state)`` quotient.

Both expose the same protocol: ``root_state``, ``max_depth`` and
``transitions(depth, state)`` returning ``(label, payload, next_state)``
triples. For explicit trees the state *is* the path.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import CapacityError, DomainError, InvalidNodeError, PrunedViolationError

Path = tuple[int, ...]
Transition = tuple[int, Any, Hashable]

ROOT: Path = ()


def is_prefix(a: Path, b: Path) -> bool:
    """True iff ``a`` is an initial segment of ``b`` (``a`` ⪯ ``b``)."""
    return len(a) <= len(b) and b[: len(a)] == a


def comparable(a: Path, b: Path) -> bool:
    return is_prefix(a, b) or is_prefix(b, a)


def format_path(path: Path) -> str:
    """Render a path as dot-separated labels; the root is the empty string."""
    return ".".join(str(label) for label in path)


def parse_path(text: str) -> Path:
    text = text.strip()
    if not text:
        return ROOT
    try:
        return tuple(int(part) for part in text.split("."))
    except ValueError:
        raise DomainError(f"malformed path {text!r}") from None


def _check_children(node: Any, entries: Sequence[tuple], bound: int | None) -> None:
    if not entries:
        raise PrunedViolationError(f"node {node!r} has no children")
    labels = [entry[0] for entry in entries]
    if len(set(labels)) != len(labels):
        raise DomainError(f"duplicate child labels {labels} at {node!r}")
    if any(not isinstance(label, int) or label < 0 for label in labels):
        raise DomainError(f"child labels must be non-negative integers, got {labels}")
    if bound is not None and len(entries) > bound:
        raise DomainError(f"node {node!r} has {len(entries)} children, bound is {bound}")


class ExplicitTree:
    """A finite tree given by an explicit children table.

    ``children`` maps every internal path to its ordered list of
    ``(label, payload)`` pairs. Every node above ``max_depth`` must have at
    least one child; nodes at ``max_depth`` are leaves of the truncation.
    """

    def __init__(
        self,
        children: Mapping[Path, Sequence[tuple[int, Any]]],
        max_depth: int,
        branching_bound: int | None = None,
    ):
        if max_depth < 1:
            raise DomainError("an explicit tree needs max_depth >= 1")
        self.max_depth = int(max_depth)
        self.branching_bound = branching_bound
        table: dict[Path, tuple[tuple[int, Any], ...]] = {}
        frontier = [ROOT]
        for _depth in range(self.max_depth):
            nxt = []
            for node in frontier:
                entries = tuple((int(label), payload) for label, payload in children.get(node, ()))
                _check_children(node, entries, branching_bound)
                table[node] = entries
                nxt.extend(node + (label,) for label, _ in entries)
            frontier = nxt
        self._table = table

    @property
    def root_state(self) -> Path:
        return ROOT

    def transitions(self, depth: int, state: Path) -> list[Transition]:
        try:
            entries = self._table[state]
        except KeyError:
            raise InvalidNodeError(f"{state!r} is not an internal node of the tree") from None
        return [(label, payload, state + (label,)) for label, payload in entries]

    def internal_nodes(self) -> Iterator[Path]:
        return iter(self._table)

    def __repr__(self) -> str:
        return f"ExplicitTree(max_depth={self.max_depth}, internal_nodes={len(self._table)})"


class AutomatonTree:
    """A tree generated by a depth-indexed, deterministic state machine.

    ``transition(depth, state)`` returns the ordered children of any node at
    ``depth`` in ``state`` as ``(label, payload, next_state)`` triples.
    Results are memoized, so the callable must be pure. ``max_depth=None``
    means the tree is conceptually infinite and cut per call.
    """

    def __init__(
        self,
        initial_state: Hashable,
        transition: Callable[[int, Any], Sequence[Transition]],
        max_depth: int | None = None,
        branching_bound: int | None = None,
    ):
        if max_depth is not None and max_depth < 1:
            raise DomainError("an automaton tree needs max_depth >= 1")
        self.initial_state = initial_state
        self.max_depth = max_depth
        self.branching_bound = branching_bound
        self._transition = transition
        self._memo: dict[tuple[int, Hashable], list[Transition]] = {}

    @property
    def root_state(self) -> Hashable:
        return self.initial_state

    def transitions(self, depth: int, state: Hashable) -> list[Transition]:
        key = (depth, state)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if depth < 0 or (self.max_depth is not None and depth >= self.max_depth):
            raise InvalidNodeError(f"depth {depth} is outside the tree (max depth {self.max_depth})")
        entries = [tuple(entry) for entry in self._transition(depth, state)]
        _check_children((depth, state), entries, self.branching_bound)
        self._memo[key] = entries
        return entries

    def __repr__(self) -> str:
        return f"AutomatonTree(initial_state={self.initial_state!r}, max_depth={self.max_depth})"


TreeSource = ExplicitTree | AutomatonTree


def _check_depth(source, n: int) -> None:
    if n < 0:
        raise DomainError(f"depth {n} is negative")
    if source.max_depth is not None and n > source.max_depth:
        raise DomainError(f"depth {n} exceeds the tree's max depth {source.max_depth}")


def state_of(source, node: Path):
    """Walk from the root along ``node`` and return the state reached."""
    state = source.root_state
    for depth, label in enumerate(node):
        for lab, _payload, nxt in source.transitions(depth, state):
            if lab == label:
                state = nxt
                break
        else:
            raise InvalidNodeError(f"{node!r} is not a node of the tree")
    return state


def children(source, node: Path) -> list[tuple[int, Any, Path]]:
    """Ordered ``(label, payload, child_path)`` triples of ``node``."""
    node = tuple(node)
    state = state_of(source, node)
    return [(label, payload, node + (label,)) for label, payload, _ in source.transitions(len(node), state)]


def iter_level(source, n: int, root: Path = ROOT, cap: int | None = None) -> Iterator[tuple[Path, Any]]:
    """Yield ``(path, state)`` for every height-``n`` descendant of ``root``.

    Order is lexicographic in declaration order of children.
    """
    root = tuple(root)
    _check_depth(source, n)
    if n < len(root):
        raise DomainError(f"height {n} is above node {root!r}")
    count = 0

    def walk(path: Path, state) -> Iterator[tuple[Path, Any]]:
        nonlocal count
        if len(path) == n:
            count += 1
            if cap is not None and count > cap:
                raise CapacityError(f"more than {cap} nodes at depth {n}")
            yield path, state
            return
        for label, _payload, nxt in source.transitions(len(path), state):
            yield from walk(path + (label,), nxt)

    yield from walk(root, state_of(source, root))


def cylinder(node: Path, n: int, source) -> list[Path]:
    """All height-``n`` descendants of ``node`` (the cylinder ``[node]|_n``)."""
    return [path for path, _ in iter_level(source, n, tuple(node))]


def reachable_states(source, n: int, root: Path = ROOT) -> list[dict[Any, Path]]:
    """Per depth ``d`` in ``len(root)..n``, map each reachable state to one path reaching it.

    Entry ``i`` of the result describes depth ``len(root) + i``.
    """
    root = tuple(root)
    _check_depth(source, n)
    levels = [{state_of(source, root): root}]
    for depth in range(len(root), n):
        nxt: dict[Any, Path] = {}
        for state, path in levels[-1].items():
            for label, _payload, child in source.transitions(depth, state):
                nxt.setdefault(child, path + (label,))
        levels.append(nxt)
    return levels


@dataclass(frozen=True)
class Antichain:
    """A finite set of pairwise incomparable nodes below ``root`` of height at most ``horizon``."""

    members: frozenset[Path]
    horizon: int
    root: Path = ROOT
    _order: tuple[Path, ...] = field(default=(), compare=False, repr=False)

    @classmethod
    def of(cls, members: Iterable[Sequence[int]], horizon: int, root: Path = ROOT) -> "Antichain":
        ordered = tuple(sorted({tuple(m) for m in members}))
        return cls(frozenset(ordered), horizon, tuple(root), ordered)

    def __iter__(self) -> Iterator[Path]:
        return iter(self._order or sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, item) -> bool:
        return tuple(item) in self.members


def _members(A) -> list[Path]:
    if isinstance(A, Antichain):
        return list(A)
    return [tuple(m) for m in A]


def is_maximal_antichain(source, A, root: Path = ROOT, n: int | None = None) -> bool:
    """Decide maximality of ``A`` in the nodes strictly below ``root`` of height at most ``n``.

    Uses the partition criterion: ``A`` is a maximal antichain iff every
    height-``n`` descendant of ``root`` has exactly one prefix in ``A``.
    """
    root = tuple(root)
    if n is None:
        if not isinstance(A, Antichain):
            raise DomainError("horizon n is required for a plain set of paths")
        n = A.horizon
    if n <= len(root):
        raise DomainError(f"horizon {n} must exceed the root height {len(root)}")
    members = _members(A)
    if len(set(members)) != len(members):
        return False
    for m in members:
        if not (len(root) < len(m) <= n and is_prefix(root, m)):
            raise DomainError(f"{m!r} is not strictly below {root!r} with height <= {n}")
        state_of(source, m)
    if not members:
        return False
    member_set = set(members)
    seen: set[Path] = set()
    for leaf, _ in iter_level(source, n, root):
        hits = [leaf[:h] for h in range(len(root) + 1, n + 1) if leaf[:h] in member_set]
        if len(hits) != 1:
            return False
        seen.add(hits[0])
    # a member whose cylinder is empty cannot occur in a pruned tree
    return seen == member_set


def count_maximal_antichains(source, root: Path = ROOT, n: int = 1) -> int:
    """Number of maximal antichains below ``root`` up to height ``n`` (exact integer)."""
    root = tuple(root)
    if n <= len(root):
        raise DomainError(f"horizon {n} must exceed the root height {len(root)}")

    def below(path: Path, state) -> int:
        # number of maximal antichains of the nodes strictly below path
        return math.prod(
            1 + (below(path + (label,), nxt) if len(path) + 1 < n else 0)
            for label, _payload, nxt in source.transitions(len(path), state)
        )

    return below(root, state_of(source, root))


def enumerate_maximal_antichains(
    source, root: Path = ROOT, n: int = 1, cap: int = 100_000
) -> Iterator[Antichain]:
    """Yield every maximal antichain below ``root`` up to height ``n`` exactly once.

    Each child ``c`` of ``root`` contributes either ``{c}`` or a maximal
    antichain strictly below ``c``; the product of the per-child choices is
    the full family. Raises :class:`CapacityError` before emitting anything
    if the family has more than ``cap`` members.
    """
    root = tuple(root)
    _check_depth(source, n)
    total = count_maximal_antichains(source, root, n)
    if total > cap:
        raise CapacityError(f"{total} maximal antichains exceed the cap {cap}")

    def options(path: Path, state) -> Iterator[tuple[Path, ...]]:
        per_child = []
        for label, _payload, nxt in source.transitions(len(path), state):
            child = path + (label,)
            choices = [(child,)]
            if len(child) < n:
                choices.extend(options(child, nxt))
            per_child.append(choices)
        for combo in itertools.product(*per_child):
            yield tuple(itertools.chain.from_iterable(combo))

    for members in options(root, state_of(source, root)):
        yield Antichain.of(members, n, root)
