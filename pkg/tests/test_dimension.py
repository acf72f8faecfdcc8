import math

import pytest

from tifs import (
    DomainError,
    ExplicitTree,
    SimilarityMap,
    TifsSpec,
    bisect_decreasing,
    branch_growth_diagnostic,
    cantor_tifs,
    counterexample_tifs,
    moran_root,
    non_autonomous_tifs,
    solve_beta,
    solve_beta_star,
)

LOG2_LOG3 = math.log(2) / math.log(3)


def test_bisection_finds_root():
    result = bisect_decreasing(lambda t: 2.0 ** -t, 0.25, 1e-9)
    assert result.t == pytest.approx(2.0, abs=1e-9)
    assert result.lo <= 2.0 <= result.hi


def test_bisection_reports_root_at_zero():
    result = bisect_decreasing(lambda t: 0.5 * 2.0 ** -t, 1.0, 1e-6)
    assert result.t == 0.0 and result.diagnostic
    with pytest.raises(DomainError):
        bisect_decreasing(lambda t: 2.0, 1.0, 1e-6)
    with pytest.raises(DomainError):
        bisect_decreasing(lambda t: 2.0 ** -t, 0.5, 0.0)


def test_moran_root():
    assert moran_root([1 / 3, 1 / 3]) == pytest.approx(LOG2_LOG3, abs=1e-11)
    assert moran_root([0.5, 0.5]) == pytest.approx(1.0, abs=1e-11)
    assert moran_root([0.5, 0.25]) == pytest.approx(math.log2((1 + 5 ** 0.5) / 2), abs=1e-11)
    assert moran_root([0.4]) == 0.0
    with pytest.raises(DomainError):
        moran_root([1.0, 0.5])
    with pytest.raises(DomainError):
        moran_root([])


def test_cantor_estimates():
    spec = cantor_tifs()
    star = solve_beta_star(spec, 1e-6, [4, 8, 16])
    level = solve_beta(spec, 1e-6, [4, 8, 16])
    assert star.value == pytest.approx(LOG2_LOG3, abs=1e-6)
    assert level.value == pytest.approx(LOG2_LOG3, abs=1e-6)
    assert star.converged and star.n_used == 8
    assert [n for n, _ in level.history] == [4, 8, 16]


def test_unequal_ratios_match_moran():
    levels = [[SimilarityMap.line(0.5, 0.0), SimilarityMap.line(0.25, 0.75)]]
    spec = non_autonomous_tifs(levels, cycle=True)
    expected = moran_root([0.5, 0.25])
    assert solve_beta_star(spec, 1e-6, [10, 20, 40]).value == pytest.approx(expected, abs=1e-5)
    assert solve_beta(spec, 1e-6, [10, 20, 40]).value == pytest.approx(expected, abs=1e-5)


def test_beta_uses_trailing_window_minimum():
    spec = counterexample_tifs()
    schedule = [10, 20, 30, 40, 50, 60, 70]
    est = solve_beta(spec, 1e-3, schedule)
    window = est.history[-5:]
    assert est.value == min(t for _n, t in window)
    assert est.n_used == min(window, key=lambda item: item[1])[0]


def test_counterexample_beta_star_bracket():
    est = solve_beta_star(counterexample_tifs(), 1e-3, list(range(25, 201, 25)))
    assert LOG2_LOG3 - 1e-6 <= est.value <= 0.651
    assert est.converged


def test_counterexample_level_roots_stay_below_one():
    spec = counterexample_tifs()
    params = spec.params
    est = solve_beta(spec, 1e-3, [50, 100, 200])
    for n, t in est.history:
        # at depth n the level pressure is at least 1 at t_{k(n)}, and the tree is binary with ratios <= 1/2
        assert params.t(params.k_of(n)) - 1e-3 <= t <= 1 + 1e-3
    assert [t for _n, t in est.history] == sorted(t for _n, t in est.history)


def test_schedule_validation():
    with pytest.raises(DomainError):
        solve_beta_star(cantor_tifs(), 1e-3, [])
    with pytest.raises(DomainError):
        solve_beta(cantor_tifs(), 1e-3, [5, 5])


def test_branch_growth_diagnostic():
    report = branch_growth_diagnostic(counterexample_tifs(), 40)
    assert report.holds
    assert report.values[0] == pytest.approx(math.log(2))
    assert report.values[-1] == pytest.approx(math.log(2) / 40)
    # a depth-1 tree has no levels to inspect
    shallow = ExplicitTree({(): [(0, SimilarityMap.line(0.1, 0.0))]}, 1)
    with pytest.raises(DomainError):
        branch_growth_diagnostic(TifsSpec(shallow), 5)
    with pytest.raises(DomainError):
        branch_growth_diagnostic(cantor_tifs(), 1)
