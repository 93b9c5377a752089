import json

import numpy as np
import pytest

from canyonsim.errors import ParameterError
from canyonsim.geometry import (
    BoundedPlane,
    Building,
    CanyonGeometry,
    CanyonParams,
    SurfaceKind,
    building_count,
    empty_canyon,
    generate_canyon,
    rice_mean,
    ring_cells,
)


def test_default_building_count():
    params = CanyonParams()
    assert params.buildings_per_edge == 10
    # 9 blocks, each ringed by 4 * 10 - 4 buildings
    assert building_count(params) == 9 * 36
    assert len(generate_canyon(params).buildings) == 324


def test_ring_cells():
    assert ring_cells(1) == [(0, 0)]
    assert len(ring_cells(2)) == 4
    assert len(ring_cells(10)) == 36
    assert (5, 5) not in ring_cells(10)


def test_default_heights_positive_and_centered():
    g = generate_canyon(CanyonParams())
    h = g.heights
    assert np.all(h > 0.0)
    se = h.std(ddof=1) / np.sqrt(h.size)
    assert abs(h.mean() - rice_mean(25.0, 5.0)) < 3.0 * se


def test_footprints_independent_of_height_params():
    lo = generate_canyon(CanyonParams(rice_nu=5.0))
    hi = generate_canyon(CanyonParams(rice_nu=60.0))
    fp = lambda g: [(b.x_min, b.y_min, b.x_max, b.y_max) for b in g.buildings]
    assert fp(lo) == fp(hi)
    assert np.all(lo.heights != hi.heights)


def test_generation_is_deterministic():
    a = generate_canyon(CanyonParams(rng_seed=9))
    b = generate_canyon(CanyonParams(rng_seed=9))
    assert a.to_json() == b.to_json()
    assert a.to_json() != generate_canyon(CanyonParams(rng_seed=10)).to_json()


def test_footprints_lie_on_block_rings():
    p = CanyonParams()
    g = generate_canyon(p)
    half = p.block_side_b / 2.0
    # nothing in the street between the central block and its neighbors
    for b in g.buildings:
        for lo, hi in ((b.x_min, b.x_max), (b.y_min, b.y_max)):
            assert not (half < lo < half + p.road_width_db)
            assert not (-half - p.road_width_db < hi < -half)
        assert b.x_max - b.x_min == pytest.approx(p.building_width_w)
    # central block interior is a courtyard
    assert not any(b.x_min >= -100 and b.x_max <= 100 and b.y_min >= -100 and b.y_max <= 100 for b in g.buildings)


def test_plane_set_per_building():
    g = generate_canyon(CanyonParams())
    assert len(g.planes) == 5 * len(g.buildings)
    kinds = [p.surface_kind for p in g.planes[:5]]
    assert kinds.count(SurfaceKind.BUILDING_WALL) == 4
    assert kinds.count(SurfaceKind.BUILDING_ROOF) == 1
    b = g.buildings[0]
    center = np.array([(b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2, b.height / 2])
    for p in g.planes[:5]:
        # outward normals
        assert np.dot(center - np.asarray(p.point_p), p.normal_n) < 0.0


def test_json_round_trip():
    g = generate_canyon(CanyonParams(rice_nu=40.0))
    data = json.loads(g.to_json())
    assert data["schema_version"] == 1
    back = CanyonGeometry.from_dict(data)
    assert len(back.buildings) == len(g.buildings)
    assert np.allclose(back.heights, g.heights, atol=1e-6)


def test_empty_canyon():
    g = empty_canyon()
    assert g.planes == ()
    lo, hi = g.box_arrays
    assert lo.shape == (0, 3)


def test_bounded_plane_contains():
    plane = BoundedPlane((0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0), -1, 1, -2, 2, SurfaceKind.BUILDING_ROOF)
    assert plane.contains((0.5, 1.5, 0.0))
    assert not plane.contains((1.5, 0.0, 0.0))
    assert not plane.contains((0.0, 0.0, 0.1))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(normal_n=(0, 0, 2)),
        dict(axis_u=(1, 0, 1)),
        dict(u_min=1, u_max=-1),
    ],
)
def test_bounded_plane_validation(kwargs):
    base = dict(
        point_p=(0, 0, 0), normal_n=(0, 0, 1), axis_u=(1, 0, 0), axis_v=(0, 1, 0),
        u_min=-1, u_max=1, v_min=-1, v_max=1, surface_kind=SurfaceKind.BUILDING_ROOF,
    )
    base.update(kwargs)
    with pytest.raises(ParameterError):
        BoundedPlane(**base)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(block_side_b=260.0),
        dict(road_width_db=0.0),
        dict(rice_nu=-1.0),
        dict(rice_sigma=0.0),
        dict(rng_seed=-1),
        dict(building_width_w=float("nan")),
    ],
)
def test_canyon_params_validation(kwargs):
    with pytest.raises(ParameterError):
        CanyonParams(**kwargs)


def test_building_validation():
    with pytest.raises(ParameterError):
        Building(0, 0, 1, 1, 0.0)
    with pytest.raises(ParameterError):
        Building(1, 0, 0, 1, 5.0)
