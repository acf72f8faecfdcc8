import itertools

import pytest

from tifs import (
    ROOT,
    Antichain,
    AutomatonTree,
    CapacityError,
    DomainError,
    ExplicitTree,
    InvalidNodeError,
    PrunedViolationError,
    count_maximal_antichains,
    cylinder,
    enumerate_maximal_antichains,
    is_maximal_antichain,
    iter_level,
)
from tifs.tree import comparable, format_path, is_prefix, parse_path, reachable_states, state_of


def binary(depth):
    table = {p: [(0, "a"), (1, "b")] for d in range(depth) for p in itertools.product((0, 1), repeat=d)}
    return ExplicitTree(table, depth)


def test_prefix_relations():
    assert is_prefix((), (1, 2))
    assert is_prefix((1,), (1, 2))
    assert not is_prefix((2,), (1, 2))
    assert not is_prefix((1, 2, 3), (1, 2))
    assert comparable((1, 2), (1,))
    assert not comparable((0,), (1,))


def test_path_round_trip():
    for path in [(), (0,), (3, 1, 4)]:
        assert parse_path(format_path(path)) == path
    with pytest.raises(DomainError):
        parse_path("1.x")


def test_explicit_tree_validation():
    with pytest.raises(PrunedViolationError):
        ExplicitTree({(): [(0, None)]}, 2)
    with pytest.raises(DomainError):
        ExplicitTree({(): [(0, None), (0, None)]}, 1)
    with pytest.raises(DomainError):
        ExplicitTree({(): [(0, None), (1, None), (2, None)]}, 1, branching_bound=2)
    with pytest.raises(DomainError):
        ExplicitTree({}, 0)


def test_automaton_tree_memoizes_and_bounds_depth():
    calls = []

    def transition(depth, state):
        calls.append((depth, state))
        return [(0, None, state), (1, None, state + 1)]

    tree = AutomatonTree(0, transition, max_depth=3)
    tree.transitions(1, 0)
    tree.transitions(1, 0)
    assert calls == [(1, 0)]
    with pytest.raises(InvalidNodeError):
        tree.transitions(3, 0)
    assert state_of(tree, (1, 1, 0)) == 2


def test_iter_level_order_and_cap():
    tree = binary(3)
    paths = [p for p, _ in iter_level(tree, 2)]
    assert paths == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert cylinder((1,), 3, tree) == [(1, 0, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1)]
    with pytest.raises(CapacityError):
        list(iter_level(tree, 3, cap=5))
    with pytest.raises(DomainError):
        list(iter_level(tree, 4))
    with pytest.raises(InvalidNodeError):
        cylinder((2,), 3, tree)


def test_reachable_states_on_automaton():
    tree = AutomatonTree("s", lambda d, s: [(0, None, "s"), (1, None, "t")] if s == "s" else [(0, None, "t")])
    levels = reachable_states(tree, 3)
    assert [set(level) for level in levels] == [{"s"}, {"s", "t"}, {"s", "t"}, {"s", "t"}]
    assert levels[2]["t"] == (0, 1)


def test_maximal_antichain_partition_criterion():
    tree = binary(3)
    assert is_maximal_antichain(tree, [(0,), (1,)], ROOT, 3)
    assert is_maximal_antichain(tree, [(0,), (1, 0), (1, 1, 0), (1, 1, 1)], ROOT, 3)
    assert not is_maximal_antichain(tree, [(0,)], ROOT, 3)
    assert not is_maximal_antichain(tree, [(0,), (0, 1), (1,)], ROOT, 3)
    assert not is_maximal_antichain(tree, [], ROOT, 3)
    assert is_maximal_antichain(tree, Antichain.of([(1, 0), (1, 1)], 2, (1,)), (1,))
    with pytest.raises(DomainError):
        is_maximal_antichain(tree, [(0, 0, 0, 0)], ROOT, 3)
    with pytest.raises(DomainError):
        is_maximal_antichain(tree, [()], ROOT, 3)


def test_antichain_counts():
    # a(d) = (1 + a(d-1))^2 with a(0) = 0 on the binary tree
    counts = [count_maximal_antichains(binary(d), ROOT, d) for d in range(1, 5)]
    assert counts == [1, 4, 25, 676]


def test_enumeration_is_exact_and_capped():
    tree = binary(3)
    listed = list(enumerate_maximal_antichains(tree, ROOT, 3))
    assert len(listed) == len({a.members for a in listed}) == 25
    assert all(is_maximal_antichain(tree, a) for a in listed)
    below = list(enumerate_maximal_antichains(tree, (0,), 3))
    assert len(below) == 4
    with pytest.raises(CapacityError):
        list(enumerate_maximal_antichains(binary(4), ROOT, 4, cap=100))


def test_antichain_value_semantics():
    a = Antichain.of([(1,), (0,)], 1)
    assert list(a) == [(0,), (1,)]
    assert (0,) in a and [1] in a
    assert a == Antichain.of([(0,), (1,)], 1)
