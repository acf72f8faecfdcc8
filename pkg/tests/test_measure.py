import io
import math

import numpy as np
import pytest

from conftest import random_tree_spec
from tifs import (
    ROOT,
    DomainError,
    ExplicitTree,
    NotInAStarError,
    OscViolationError,
    SimilarityMap,
    TifsSpec,
    build_chain_measure,
    cantor_tifs,
    compose_norm,
    counterexample_tifs,
    gib_x_check,
    gibbs_check,
    mu_interval,
    push_forward,
    tau_chain,
    verify_dist,
    z_star_bruteforce,
)
from tifs.measure import write_mass_csv

LOG2_LOG3 = math.log(2) / math.log(3)


def bruteforce_masses(spec, t, n):
    """m* on every height-n node, from exhaustive optimal antichains at every chain step."""
    masses = {}

    def descend(rho, mass):
        if len(rho) == n:
            masses[rho] = mass
            return
        best = z_star_bruteforce(spec, t, n, root=rho)
        for member in best.witness:
            descend(member, mass * compose_norm(spec, member) ** t / best.value)

    descend(ROOT, 1.0)
    return masses


def test_cantor_masses_are_uniform_at_dimension():
    cm = build_chain_measure(cantor_tifs(), LOG2_LOG3, 3)
    assert len(cm.masses) == 8
    assert all(m == pytest.approx(0.125, rel=1e-12) for m in cm.masses.values())
    pm = push_forward(cm)
    assert mu_interval(pm, 0.0, 1 / 3) == pytest.approx(0.5, rel=1e-12)
    assert mu_interval(pm, 1 / 3, 2 / 3) == pytest.approx(0.0, abs=1e-15)
    assert mu_interval(pm, 0.0, 1.0) == pytest.approx(1.0, rel=1e-12)


def test_masses_match_bruteforce_chains():
    rng = np.random.default_rng(4)
    for _ in range(8):
        spec = random_tree_spec(rng, 3, 3, osc=True, max_antichains=3000)
        t = float(rng.uniform(0.2, 1.5))
        cm = build_chain_measure(spec, t, 3)
        expected = bruteforce_masses(spec, t, 3)
        assert set(expected) == set(cm.masses)
        for leaf, mass in cm.masses.items():
            assert mass == pytest.approx(expected[leaf], rel=1e-10)


def test_reports_pass_on_counterexample():
    cm = build_chain_measure(counterexample_tifs(), 0.9, 10)
    assert math.fsum(cm.masses.values()) == pytest.approx(1.0, abs=1e-12)
    assert verify_dist(cm).ok
    report = gibbs_check(cm)
    assert report.ok and report.worst_ratio <= 1 + 1e-10
    assert gib_x_check(push_forward(cm)).ok


def test_chain_through_a_star():
    cm = build_chain_measure(cantor_tifs(), 0.5, 4)
    # at t below the dimension the coarsest antichain is optimal at every step
    assert tau_chain(cm, (0, 1, 1, 0)) == ((), (0,), (0, 1), (0, 1, 1), (0, 1, 1, 0))
    cm_fine = build_chain_measure(cantor_tifs(), 1.0, 4)
    assert tau_chain(cm_fine, (0, 1, 1, 0)) == ((), (0, 1, 1, 0))
    with pytest.raises(NotInAStarError):
        tau_chain(cm_fine, (0, 1))
    with pytest.raises(NotInAStarError):
        cm_fine.mass((0,))
    with pytest.raises(DomainError):
        tau_chain(cm_fine, (0, 1, 1, 0, 1))
    assert cm_fine.a_star == {()} | set(cm_fine.masses)


def test_optimal_antichain_cache():
    cm = build_chain_measure(cantor_tifs(), 0.5, 3)
    first = cm.optimal_antichain(())
    assert cm.optimal_antichain(()) is first
    assert set(first[0]) == {(0,), (1,)}
    with pytest.raises(DomainError):
        cm.optimal_antichain((0, 0, 0))


def test_gib_x_refuses_overlaps():
    overlap = {(): [(0, SimilarityMap.line(0.6, 0.0)), (1, SimilarityMap.line(0.6, 0.4))]}
    cm = build_chain_measure(TifsSpec(ExplicitTree(overlap, 1)), 1.0, 1)
    assert verify_dist(cm).ok
    with pytest.raises(OscViolationError):
        gib_x_check(push_forward(cm))


def test_mu_interval_domain():
    pm = push_forward(build_chain_measure(cantor_tifs(), 0.5, 2))
    with pytest.raises(DomainError):
        mu_interval(pm, 0.5, 0.25)
    with pytest.raises(DomainError):
        mu_interval(pm, -0.5, 0.25)


def test_mass_csv():
    cm = build_chain_measure(cantor_tifs(), LOG2_LOG3, 2)
    buf = io.StringIO()
    write_mass_csv(cm, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "path,mass,log_mass"
    path, mass, log_mass = lines[1].split(",")
    assert path == "0.0"
    assert float(mass) == pytest.approx(0.25, rel=1e-12)
    assert float(log_mass) == pytest.approx(math.log(0.25), rel=1e-12)
    assert len(lines) == 5


def test_bad_horizon():
    with pytest.raises(DomainError):
        build_chain_measure(cantor_tifs(), 1.0, 0)


def test_interval_bound_on_random_osc_systems():
    rng = np.random.default_rng(9)
    for _ in range(10):
        spec = random_tree_spec(rng, 4, 3, osc=True)
        for t in (0.3, 1.0, 1.8):
            report = gib_x_check(push_forward(build_chain_measure(spec, t, 4)))
            assert report.ok, report
