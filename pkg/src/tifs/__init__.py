"""Tree iterated function systems: pressures, dimension estimates, chain measures and covers."""
from .dimension import (
    DimensionEstimate,
    bisect_decreasing,
    branch_growth_diagnostic,
    moran_root,
    solve_beta,
    solve_beta_star,
)
from .errors import (
    CapacityError,
    DomainError,
    InvalidNodeError,
    NotInAStarError,
    OscViolationError,
    PrunedViolationError,
    TifsError,
    UnsupportedError,
)
from .geometry import CoverAtDepth, PointCloud, box_count_dimension, cover_at_depth, sample_points
from .maps import (
    AmbientSpace,
    Box,
    DerivativeNormOracle,
    SimilarityMap,
    TifsSpec,
    apply_map,
    check_osc,
    compose_norm,
    cylinder_set,
    unit_interval,
    unit_square,
)
from .measure import (
    ChainMeasure,
    build_chain_measure,
    gib_x_check,
    gibbs_check,
    mu_interval,
    push_forward,
    tau_chain,
    verify_dist,
)
from .pressure import PressureValue, z_level, z_star, z_star_bruteforce, z_star_monotonicity_probe
from .systems import CounterexampleParams, cantor_tifs, counterexample_tifs, non_autonomous_tifs
from .tree import (
    ROOT,
    Antichain,
    AutomatonTree,
    ExplicitTree,
    count_maximal_antichains,
    cylinder,
    enumerate_maximal_antichains,
    is_maximal_antichain,
    iter_level,
)

__version__ = "0.1.0"
