"""Single-bounce specular reflections and segment occlusion.

The per-case functions here (``mirror_point``, ``reflection_point``,
``path_delay``, ``segment_occluded``) are plain numpy and serve both as the
public API and as readable references.  ``trace_epoch`` and
``trace_satellites`` route through :mod:`canyonsim.kernels`, which uses the
compiled core when it is built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .geometry import (
    SURFACE_FROM_CODE,
    BoundedPlane,
    CanyonGeometry,
    PlaneArrays,
    SurfaceKind,
)
from .orbits import SatelliteState

OCCLUSION_EPS = 1e-9


@dataclass(frozen=True, slots=True)
class ReflectionEvent:
    sat_id: int
    epoch: float
    reflection_point_r: tuple[float, float, float]
    delay_d: float
    plane_index: int
    surface_kind: SurfaceKind


def mirror_point(antenna_a, plane: BoundedPlane) -> np.ndarray:
    """Mirror image of the antenna in the plane's supporting plane."""
    a = np.asarray(antenna_a, dtype=float)
    p = np.asarray(plane.point_p, dtype=float)
    n = np.asarray(plane.normal_n, dtype=float)
    return a + 2.0 * n * (((p - a) @ n) / (n @ n))


def reflection_point(satellite_s, antenna_a, plane: BoundedPlane):
    """Specular reflection point on ``plane``, or None.

    None is returned when the satellite and antenna lie on opposite sides of
    the plane (or either lies on it), when the ray is parallel to the plane,
    or when the point falls outside the plane's extent.
    """
    s = np.asarray(satellite_s, dtype=float)
    a = np.asarray(antenna_a, dtype=float)
    p = np.asarray(plane.point_p, dtype=float)
    n = np.asarray(plane.normal_n, dtype=float)
    side_s = (s - p) @ n
    side_a = (a - p) @ n
    if side_s * side_a <= 0.0:
        return None
    a_m = mirror_point(a, plane)
    denom = (a_m - s) @ n
    if denom == 0.0:
        return None
    r = s + ((p - s) @ n) / denom * (a_m - s)
    if not plane.contains(r):
        return None
    return r


def path_delay(satellite_s, antenna_a, reflection_r) -> float:
    """Extra path length of ``s -> r -> a`` over ``s -> a``, never negative."""
    s = np.asarray(satellite_s, dtype=float)
    a = np.asarray(antenna_a, dtype=float)
    r = np.asarray(reflection_r, dtype=float)
    rs = np.linalg.norm(r - s)
    as_ = np.linalg.norm(a - s)
    # |r-s| - |a-s| via a difference of squares; avoids cancellation for far s
    diff = ((r - a) @ (r + a - 2.0 * s)) / (rs + as_) if rs + as_ > 0.0 else 0.0
    return max(0.0, float(diff + np.linalg.norm(a - r)))


def _owner_of(geometry: CanyonGeometry, plane_index: int | None) -> int:
    if plane_index is None or plane_index < 0 or plane_index >= len(geometry.planes):
        return -1
    return geometry.planes[plane_index].owner


def segment_occluded(
    start, end, geometry: CanyonGeometry, ignore_plane: int | None = None
) -> bool:
    """True when the open segment passes strictly through a building.

    ``ignore_plane`` excludes the building owning that plane, which is how a
    reflected leg leaves the wall it bounced off.
    """
    lo, hi = geometry.box_arrays
    hit = kernels.segments_occluded(
        np.asarray(start, dtype=float).reshape(1, 3),
        np.asarray(end, dtype=float).reshape(1, 3),
        lo,
        hi,
        np.array([_owner_of(geometry, ignore_plane)], dtype=np.int64),
        OCCLUSION_EPS,
    )
    return bool(hit[0])


def vehicle_roof_plane(position, heading: float, length: float, width: float, height: float) -> BoundedPlane:
    """Horizontal roof rectangle of a vehicle centered on ``position`` (x, y)."""
    c, s = math.cos(heading), math.sin(heading)
    # axes rounded to exact values on the cardinal headings the loop uses
    fwd = (round(c, 15) + 0.0, round(s, 15) + 0.0, 0.0)
    side = (-fwd[1] + 0.0, fwd[0], 0.0)
    return BoundedPlane(
        point_p=(float(position[0]), float(position[1]), float(height)),
        normal_n=(0.0, 0.0, 1.0),
        axis_u=fwd,
        axis_v=side,
        u_min=-length / 2.0,
        u_max=length / 2.0,
        v_min=-width / 2.0,
        v_max=width / 2.0,
        surface_kind=SurfaceKind.VEHICLE_ROOF,
        owner=-1,
    )


def _combined_planes(geometry: CanyonGeometry, vehicle_planes: Sequence[BoundedPlane]) -> PlaneArrays:
    arrays = geometry.plane_arrays
    if vehicle_planes:
        arrays = arrays.concat(PlaneArrays.from_planes(vehicle_planes))
    return arrays


def trace_satellites(
    satellites_enu: np.ndarray,
    antenna_a,
    geometry: CanyonGeometry,
    vehicle_planes: Sequence[BoundedPlane] = (),
):
    """Raw batch trace.

    Returns ``(los_clear, ev_sat, ev_plane, ev_r, ev_d)`` arrays; ``ev_sat``
    indexes rows of ``satellites_enu`` and ``ev_plane`` indexes the geometry's
    planes followed by ``vehicle_planes``.
    """
    arrays = _combined_planes(geometry, vehicle_planes)
    lo, hi = geometry.box_arrays
    return kernels.trace_epoch_batch(
        np.asarray(antenna_a, dtype=float),
        np.asarray(satellites_enu, dtype=float).reshape(-1, 3),
        arrays.point,
        arrays.normal,
        arrays.axis_u,
        arrays.axis_v,
        arrays.extent,
        arrays.owner,
        lo,
        hi,
        OCCLUSION_EPS,
    )


def surface_kind_of(geometry: CanyonGeometry, vehicle_planes: Sequence[BoundedPlane], index: int) -> SurfaceKind:
    n = len(geometry.planes)
    if index < n:
        return geometry.planes[index].surface_kind
    return vehicle_planes[index - n].surface_kind


def trace_epoch(
    satellite: SatelliteState,
    antenna_a,
    geometry: CanyonGeometry,
    vehicle_planes: Sequence[BoundedPlane] = (),
    epoch: float = 0.0,
) -> tuple[bool, list[ReflectionEvent]]:
    """Direct-path visibility and all unobstructed single-bounce reflections.

    Satellites at or below the horizon are skipped: ``(False, [])``.
    """
    if not satellite.elevation_theta > 0.0:
        return False, []
    los, ev_sat, ev_plane, ev_r, ev_d = trace_satellites(
        np.asarray(satellite.position_s, dtype=float)[None, :], antenna_a, geometry, vehicle_planes
    )
    arrays_kind = _combined_planes(geometry, vehicle_planes).kind
    events = [
        ReflectionEvent(
            sat_id=satellite.sat_id,
            epoch=float(epoch),
            reflection_point_r=(float(r[0]), float(r[1]), float(r[2])),
            delay_d=float(d),
            plane_index=int(i),
            surface_kind=SURFACE_FROM_CODE[int(arrays_kind[i])],
        )
        for i, r, d in zip(ev_plane, ev_r, ev_d)
    ]
    return bool(los[0]), events
