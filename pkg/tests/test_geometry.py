import io
import math

import numpy as np
import pytest

from tifs import (
    CapacityError,
    DomainError,
    SimilarityMap,
    box_count_dimension,
    cantor_tifs,
    cover_at_depth,
    non_autonomous_tifs,
    sample_points,
    unit_square,
)
from tifs.geometry import required_depth, write_box_count_csv, write_cover_csv

LOG2_LOG3 = math.log(2) / math.log(3)


def sierpinski_carpet_like():
    # four corner squares of side 1/3, one of them rotated a quarter turn
    maps = [
        SimilarityMap.plane(1 / 3, (0.0, 0.0)),
        SimilarityMap.plane(1 / 3, (2 / 3, 0.0)),
        SimilarityMap.plane(1 / 3, (0.0, 2 / 3)),
        SimilarityMap.plane(1 / 3, (1.0, 2 / 3), quarter_turns=1),
    ]
    return non_autonomous_tifs([maps], unit_square(), cycle=True)


def test_cantor_cover():
    cover = cover_at_depth(cantor_tifs(), 3)
    assert len(cover) == 8
    assert np.allclose(cover.diameters, 1 / 27)
    assert cover.lower[1, 0] == pytest.approx(2 / 27)
    boxes = dict(cover.boxes)
    assert boxes[(1, 1, 1)].upper[0] == pytest.approx(1.0)


def test_cantor_box_counts_are_exact():
    cover = cover_at_depth(cantor_tifs(), 9)
    series = box_count_dimension(cover, [3.0 ** -k for k in range(1, 10)])
    assert list(series.counts) == [2 ** k for k in range(1, 10)]
    assert series.slope == pytest.approx(LOG2_LOG3, abs=1e-12)


def test_planar_system_counts():
    spec = sierpinski_carpet_like()
    cover = cover_at_depth(spec, 7)
    series = box_count_dimension(cover, [3.0 ** -k for k in range(1, 7)], spec.space)
    assert list(series.counts) == [4 ** k for k in range(1, 7)]
    assert series.slope == pytest.approx(math.log(4) / math.log(3), abs=1e-9)


def test_point_cloud_lower_estimate():
    spec = cantor_tifs()
    cloud = sample_points(spec, 10)
    assert len(cloud) == 1024
    series = box_count_dimension(cloud, [3.0 ** -k for k in range(2, 8)])
    assert abs(series.slope - LOG2_LOG3) < 0.05
    with pytest.raises(DomainError):
        sample_points(spec, 3, anchor=2.0)


def test_scale_validation():
    cover = cover_at_depth(cantor_tifs(), 4)
    with pytest.raises(DomainError):
        box_count_dimension(cover, [0.1, 0.05, 0.02])
    with pytest.raises(DomainError):
        box_count_dimension(cover, [0.5, 0.4, 0.3, 0.2])
    with pytest.raises(DomainError):
        box_count_dimension(cover, [3.0 ** -k for k in range(1, 7)])


def test_constant_counts_give_zero_slope():
    series = box_count_dimension(np.array([[0.5]]), [1.0, 0.1, 0.01, 0.001])
    assert series.slope == 0.0 and list(series.counts) == [1, 1, 1, 1]


def test_cap_and_required_depth():
    with pytest.raises(CapacityError):
        cover_at_depth(cantor_tifs(), 12, cap=1000)
    assert required_depth(cantor_tifs(), 3.0 ** -5) == 5


def test_csv_writers():
    cover = cover_at_depth(cantor_tifs(), 1)
    buf = io.StringIO()
    write_cover_csv(cover, buf)
    assert buf.getvalue().splitlines()[0] == "path,x_lo,x_hi"
    series = box_count_dimension(cover_at_depth(cantor_tifs(), 6), [3.0 ** -k for k in range(1, 7)])
    buf = io.StringIO()
    write_box_count_csv(series, buf)
    assert buf.getvalue().splitlines()[1].endswith(",2")
