import numpy as np
import pytest

from tifs import ExplicitTree, SimilarityMap, TifsSpec, count_maximal_antichains, unit_interval

ACCEPTANCE_LINES: list[str] = []


def random_tree_spec(rng, max_depth=4, max_branch=3, ratio_range=(0.1, 0.6), osc=False, max_antichains=None):
    """Random pruned tree of depth ``max_depth`` carrying random 1D similarities.

    With ``osc=True`` sibling images are laid out left to right without
    overlap; this needs the sibling ratios to sum to at most 1, so the ratios
    are rescaled when they do not. ``max_antichains`` rejects trees with too
    many maximal antichains for brute force.
    """
    lo, hi = ratio_range
    while True:
        table = {}
        frontier = [()]
        for _ in range(max_depth):
            nxt = []
            for node in frontier:
                k = int(rng.integers(1, max_branch + 1))
                ratios = rng.uniform(lo, hi, size=k)
                if osc and ratios.sum() > 1:
                    ratios = ratios / ratios.sum() * 0.95
                entries = []
                if osc:
                    gap = (1 - ratios.sum()) / (k + 1)
                    x = gap
                    for label, r in enumerate(ratios):
                        flip = bool(rng.integers(2))
                        entries.append((label, SimilarityMap.line(float(r), x + r if flip else x, flip)))
                        x += r + gap
                else:
                    for label, r in enumerate(ratios):
                        offset = float(rng.uniform(0, 1 - r))
                        entries.append((label, SimilarityMap.line(float(r), offset)))
                table[node] = entries
                nxt.extend(node + (label,) for label, _ in entries)
            frontier = nxt
        spec = TifsSpec(ExplicitTree(table, max_depth), unit_interval(), name="random")
        if max_antichains is None or count_maximal_antichains(spec, (), max_depth) <= max_antichains:
            return spec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
