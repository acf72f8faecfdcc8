"""Depth-``n`` covers of the limit set, point clouds, and box counting."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np
from scipy import stats

from .errors import CapacityError, DomainError, UnsupportedError
from .maps import Box, TifsSpec
from .tree import ROOT, Path, format_path

DEFAULT_CAP = 1 << 20
# slack for grid indices of points lying on cell boundaries
GRID_TOL = 1e-6


def _level_affines(spec: TifsSpec, n: int, cap: int) -> tuple[list[Path], np.ndarray, np.ndarray]:
    """Paths of ``T^(n)`` with the linear parts and offsets of ``Phi_tau``, stacked."""
    if spec.norm_oracle is not None:
        raise UnsupportedError("covers need explicit similarity maps")
    if n < 0:
        raise DomainError("n must be >= 0")
    d = spec.dim
    paths = [ROOT]
    states = [spec.root_state]
    linear = np.eye(d)[None, :, :]
    offset = np.zeros((1, d))
    for depth in range(n):
        parent, new_paths, new_states, maps = [], [], [], []
        for i, (path, state) in enumerate(zip(paths, states)):
            for label, payload, nxt in spec.transitions(depth, state):
                parent.append(i)
                new_paths.append(path + (label,))
                new_states.append(nxt)
                maps.append(payload)
        if len(new_paths) > cap:
            raise CapacityError(f"{len(new_paths)} nodes at depth {depth + 1} exceed the cap {cap}")
        idx = np.array(parent)
        child_linear = np.array([m.linear for m in maps])
        child_offset = np.array([m.offset for m in maps])
        offset = np.einsum("nij,nj->ni", linear[idx], child_offset) + offset[idx]
        linear = np.einsum("nij,njk->nik", linear[idx], child_linear)
        paths, states = new_paths, new_states
    return paths, linear, offset


@dataclass
class CoverAtDepth:
    depth: int
    paths: list[Path]
    lower: np.ndarray
    upper: np.ndarray

    @property
    def boxes(self) -> list[tuple[Path, Box]]:
        return [(p, Box(tuple(lo), tuple(hi))) for p, lo, hi in zip(self.paths, self.lower, self.upper)]

    @property
    def diameters(self) -> np.ndarray:
        return np.linalg.norm(self.upper - self.lower, axis=1)

    def __len__(self) -> int:
        return len(self.paths)


def cover_at_depth(spec: TifsSpec, n: int, cap: int = DEFAULT_CAP) -> CoverAtDepth:
    """The cylinders ``X_tau`` for every ``tau`` of height ``n``."""
    paths, linear, offset = _level_affines(spec, n, cap)
    lo = np.array(spec.space.lower)
    hi = np.array(spec.space.upper)
    a = linear * lo
    b = linear * hi
    return CoverAtDepth(n, paths, offset + np.minimum(a, b).sum(axis=2), offset + np.maximum(a, b).sum(axis=2))


@dataclass
class PointCloud:
    depth: int
    paths: list[Path]
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.paths)


def sample_points(spec: TifsSpec, n: int, anchor=None, cap: int = DEFAULT_CAP) -> PointCloud:
    """``Phi_tau(anchor)`` for every ``tau`` of height ``n``; each lies within ``s^n diam(X)`` of J."""
    if anchor is None:
        anchor = spec.space.lower
    point = np.atleast_1d(np.asarray(anchor, dtype=float))
    if not spec.space.contains(point):
        raise DomainError(f"anchor {anchor!r} lies outside the ambient space")
    paths, linear, offset = _level_affines(spec, n, cap)
    return PointCloud(n, paths, np.einsum("nij,j->ni", linear, point) + offset)


@dataclass
class BoxCountSeries:
    scales: np.ndarray
    counts: np.ndarray
    slope: float
    stderr: float
    intercept: float


def _check_scales(scales: Sequence[float]) -> np.ndarray:
    eps = np.sort(np.asarray(scales, dtype=float))[::-1]
    if len(eps) < 4:
        raise DomainError("at least 4 scales are required")
    if np.any(eps <= 0):
        raise DomainError("scales must be positive")
    if eps[0] / eps[-1] < 100.0 * (1 - 1e-12):
        raise DomainError(f"scales span {math.log10(eps[0] / eps[-1]):.2f} decades, at least 2 are required")
    return eps


def _cover_counts(cover: CoverAtDepth, origin: np.ndarray, eps: float) -> int:
    # cells whose interior meets the box interior
    first = np.floor((cover.lower - origin) / eps + GRID_TOL).astype(np.int64)
    last = np.ceil((cover.upper - origin) / eps - GRID_TOL).astype(np.int64) - 1
    last = np.maximum(last, first)
    d = cover.lower.shape[1]
    cells = set()
    for lo, hi in zip(first, last):
        ranges = [range(lo[k], hi[k] + 1) for k in range(d)]
        if d == 1:
            cells.update((i,) for i in ranges[0])
        else:
            cells.update((i, j) for i in ranges[0] for j in ranges[1])
    return len(cells)


def _cloud_counts(points: np.ndarray, origin: np.ndarray, upper: np.ndarray, eps: float) -> int:
    idx = np.floor((points - origin) / eps + GRID_TOL).astype(np.int64)
    top = np.ceil((upper - origin) / eps - GRID_TOL).astype(np.int64) - 1
    idx = np.clip(idx, 0, top)
    return len(np.unique(idx, axis=0))


def box_count_dimension(
    data: CoverAtDepth | PointCloud | np.ndarray,
    scales: Sequence[float],
    space: Box | None = None,
) -> BoxCountSeries:
    """Grid box counts at each scale and the least-squares slope of ``log N`` against ``log(1/eps)``.

    The grid is anchored at the lower corner of ``space`` (default: the unit
    interval or square matching the data). Covers count cells whose interior
    meets some cylinder; point clouds count occupied cells, a lower estimate.
    """
    eps = _check_scales(scales)
    if isinstance(data, CoverAtDepth):
        dim = data.lower.shape[1]
        deepest = float(data.diameters.max())
        if deepest > eps[-1] * (1 + 1e-9):
            raise DomainError(
                f"depth-{data.depth} cylinders have diameter {deepest:.3g} > smallest scale {eps[-1]:.3g}; "
                "use a deeper cover"
            )
    else:
        points = data.points if isinstance(data, PointCloud) else np.asarray(data, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        dim = points.shape[1]
    if space is None:
        space = Box((0.0,) * dim, (1.0,) * dim)
    origin = np.array(space.lower)
    upper = np.array(space.upper)
    if isinstance(data, CoverAtDepth):
        counts = np.array([_cover_counts(data, origin, e) for e in eps])
    else:
        counts = np.array([_cloud_counts(points, origin, upper, e) for e in eps])
    x = np.log(1.0 / eps)
    y = np.log(counts)
    if np.all(y == y[0]):
        slope, intercept, stderr = 0.0, float(y[0]), 0.0
    else:
        fit = stats.linregress(x, y)
        slope, intercept, stderr = float(fit.slope), float(fit.intercept), float(fit.stderr)
    return BoxCountSeries(eps, counts, slope, stderr, intercept)


def required_depth(spec: TifsSpec, smallest_scale: float) -> int:
    """Smallest depth whose cylinders are guaranteed no wider than ``smallest_scale``."""
    s = spec.contraction_bound
    return max(0, math.ceil(math.log(smallest_scale / spec.space.diam) / math.log(s)))


def write_cover_csv(cover: CoverAtDepth, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    axes = "xy"[: cover.lower.shape[1]]
    writer.writerow(["path"] + [f"{a}_{end}" for a in axes for end in ("lo", "hi")])
    for path, lo, hi in zip(cover.paths, cover.lower, cover.upper):
        row = [format_path(path)]
        for k in range(len(axes)):
            row += [f"{lo[k]:.17g}", f"{hi[k]:.17g}"]
        writer.writerow(row)


def write_cloud_csv(cloud: PointCloud, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    axes = "xy"[: cloud.points.shape[1]]
    writer.writerow(["path"] + list(axes))
    for path, p in zip(cloud.paths, cloud.points):
        writer.writerow([format_path(path)] + [f"{v:.17g}" for v in p])


def write_box_count_csv(series: BoxCountSeries, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["epsilon", "count"])
    for e, c in zip(series.scales, series.counts):
        writer.writerow([f"{e:.17g}", int(c)])
