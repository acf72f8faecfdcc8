import math
from fractions import Fraction

import numpy as np
import pytest

from tifs import (
    CapacityError,
    CounterexampleParams,
    DomainError,
    SimilarityMap,
    cantor_tifs,
    check_osc,
    compose_norm,
    counterexample_tifs,
    non_autonomous_tifs,
    z_level,
)
from tifs.maps import edge_maps


def k_of(depth, n_seq):
    """Index k with n_k <= depth < n_{k+1}, by linear scan."""
    k = 0
    while n_seq[k + 1] <= depth:
        k += 1
    return k


def direct_ratios(path, n_seq):
    """Edge ratios along ``path`` read off the prefix rule without any automaton."""
    out = []
    for d in range(1, len(path) + 1):
        k = k_of(d, n_seq)
        out.append(0.5 if all(label == 1 for label in path[:k]) else 1 / 3)
    return out


def closed_form_level(t, n, n_seq):
    """Z_n(t) grouped by the length p of the leading run of ones."""
    total = 0.0
    for p in range(n + 1):
        count = 1 if p == n else 2 ** (n - p - 1)
        weight = 1.0
        for d in range(1, n + 1):
            weight *= (0.5 if p >= k_of(d, n_seq) else 1 / 3) ** t
        total += count * weight
    return total


N_SEQ = [k * (k + 1) for k in range(60)]


def test_default_params():
    params = CounterexampleParams()
    assert [params.n(k) for k in range(1, 6)] == [2, 6, 12, 20, 30]
    assert params.t(3) == 0.75
    assert params.k_of(0) == 0 and params.k_of(5) == 1 and params.k_of(6) == 2
    assert params.max_depth == 41 * 42 - 1
    assert params.k0(0.5) == 1 and params.k0(0.8) == 4 and params.k0(0.81) == 5


def test_param_validation():
    with pytest.raises(DomainError):
        CounterexampleParams(t_rule=lambda k: Fraction(1, 2))
    with pytest.raises(DomainError):
        CounterexampleParams.from_sequences([0.5, 0.6, 0.7], [2, 3, 4])
    with pytest.raises(DomainError):
        CounterexampleParams(t_rule=lambda k: 1 - 0.5 ** k, n_rule=lambda k: k)
    fast = CounterexampleParams.from_sequences([0.5, 0.75, 0.875], [2, 8, 24])
    assert fast.k_of(10) == 2
    with pytest.raises(CapacityError):
        fast.k_of(24)


def test_capacity_error_reports_needed_k():
    spec = counterexample_tifs(CounterexampleParams(k_cap=3))
    with pytest.raises(CapacityError, match="k_cap >= 4"):
        z_level(spec, 1.0, 20)


def test_automaton_matches_prefix_rule_on_random_paths():
    spec = counterexample_tifs()
    rng = np.random.default_rng(5)
    for _ in range(100):
        depth = int(rng.integers(1, 31))
        # bias towards long runs of ones so both ratios show up deep in the tree
        ones = int(rng.integers(0, depth + 1))
        path = tuple([1] * ones + list(rng.integers(0, 2, size=depth - ones)))
        ratios = [m.ratio for m in edge_maps(spec, path)]
        assert ratios == pytest.approx(direct_ratios(path, N_SEQ), rel=0, abs=0)
        assert compose_norm(spec, path) == pytest.approx(math.prod(direct_ratios(path, N_SEQ)), rel=1e-14)


def test_translations_follow_last_label():
    spec = counterexample_tifs()
    maps = edge_maps(spec, (1, 1, 0))
    assert maps[0].offset == (0.5,) and maps[2].offset == (0.0,)
    third = edge_maps(spec, (0, 1))[1]
    assert third.ratio == pytest.approx(1 / 3) and third.offset[0] == pytest.approx(2 / 3)


def test_level_pressure_matches_closed_form():
    spec = counterexample_tifs()
    for t in (0.5, 0.9, 1.0, 1.5):
        for n in (1, 7, 40, 120):
            assert z_level(spec, t, n).value == pytest.approx(closed_form_level(t, n, N_SEQ), rel=1e-12)


def test_osc_holds_on_builtins():
    assert check_osc(counterexample_tifs(), 12).ok
    assert check_osc(cantor_tifs(), 12).ok


def test_non_autonomous_levels():
    levels = [
        [SimilarityMap.line(0.5, 0.0), SimilarityMap.line(0.5, 0.5)],
        [SimilarityMap.line(0.25, 0.0), SimilarityMap.line(0.25, 0.375), SimilarityMap.line(0.25, 0.75)],
    ]
    spec = non_autonomous_tifs(levels)
    assert spec.max_depth == 2
    assert z_level(spec, 1.0, 2).value == pytest.approx(2 * 0.5 * 3 * 0.25)
    cyclic = non_autonomous_tifs(levels, cycle=True)
    assert cyclic.max_depth is None
    assert z_level(cyclic, 1.0, 4).value == pytest.approx((2 * 0.5 * 3 * 0.25) ** 2)
    with pytest.raises(DomainError):
        non_autonomous_tifs([[]])
