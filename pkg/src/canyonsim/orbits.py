"""Nominal GPS constellation and the frame chain into the local canyon frame.

Orbits are circular and Keplerian; the Earth is a sphere.  Both choices keep
the model self-contained (no almanac download) while preserving the
geometry that matters for urban visibility: elevation and azimuth seen from a
mid-latitude observer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, ParameterError

EARTH_RADIUS = 6371.0e3
EARTH_ROTATION_RATE = 7.2921159e-5  # rad/s


def _default_offsets() -> tuple[float, ...]:
    return tuple(k * 7200.0 for k in range(6))


@dataclass(frozen=True)
class ConstellationConfig:
    satellite_count: int = 31
    semi_major_axis: float = 26559.7e3
    inclination: float = 55.0
    plane_count: int = 6
    orbital_period: float = 43082.0
    epoch_offsets: tuple[float, ...] = field(default_factory=_default_offsets)
    observer_latitude: float = 40.0
    observer_longitude: float = -70.0
    observer_height: float = 0.0
    # Angle of the first orbital plane's ascending node in the Earth-fixed
    # frame at constellation time zero.
    raan0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "epoch_offsets", tuple(float(t) for t in self.epoch_offsets))
        if self.satellite_count < 1:
            raise ParameterError("satellite_count must be >= 1")
        if self.plane_count < 1:
            raise ParameterError("plane_count must be >= 1")
        if not 0.0 < self.inclination <= 90.0:
            raise ParameterError(f"inclination must be in (0, 90], got {self.inclination}")
        if self.semi_major_axis <= EARTH_RADIUS:
            raise ParameterError("semi_major_axis must exceed the Earth radius")
        if self.orbital_period <= 0.0:
            raise ParameterError("orbital_period must be > 0")
        if not -90.0 <= self.observer_latitude <= 90.0:
            raise ParameterError("observer_latitude must be in [-90, 90]")
        if any(t < 0 for t in self.epoch_offsets):
            raise ParameterError("epoch_offsets must be >= 0")

    @property
    def observer(self) -> tuple[float, float, float]:
        return (self.observer_latitude, self.observer_longitude, self.observer_height)


@dataclass(frozen=True)
class SatelliteState:
    sat_id: int
    position_s: tuple[float, float, float]
    elevation_theta: float
    azimuth_beta: float


def satellite_slots(config: ConstellationConfig) -> tuple[np.ndarray, np.ndarray]:
    """Right ascension of the node and initial argument of latitude per satellite, in radians.

    Satellites are dealt round-robin onto the planes, so with 31 satellites on
    6 planes the first plane holds the extra slot.  In-plane spacing is
    uniform; consecutive planes are phased by ``360 / satellite_count`` degrees.
    """
    counts = [config.satellite_count // config.plane_count] * config.plane_count
    for j in range(config.satellite_count % config.plane_count):
        counts[j] += 1
    raan = []
    phase = []
    for j, count in enumerate(counts):
        node = math.radians(config.raan0) + 2.0 * math.pi * j / config.plane_count
        shift = 2.0 * math.pi * j / config.satellite_count
        for k in range(count):
            raan.append(node)
            phase.append(shift + 2.0 * math.pi * k / count)
    return np.array(raan), np.array(phase)


def propagate_constellation(config: ConstellationConfig, time_since_epoch: float) -> np.ndarray:
    """Earth-fixed satellite positions, shape (satellite_count, 3), meters."""
    t = float(time_since_epoch)
    if not t >= 0.0:
        raise ParameterError(f"time_since_epoch must be >= 0, got {time_since_epoch}")
    raan, phase = satellite_slots(config)
    inc = math.radians(config.inclination)
    a = config.semi_major_axis
    u = phase + 2.0 * math.pi * t / config.orbital_period
    cu, su = np.cos(u), np.sin(u)
    ci, si = math.cos(inc), math.sin(inc)
    # Earth rotation folded into the node angle
    node = raan - EARTH_ROTATION_RATE * t
    cn, sn = np.cos(node), np.sin(node)
    x = a * (cn * cu - sn * su * ci)
    y = a * (sn * cu + cn * su * ci)
    z = a * (su * si)
    return np.stack([x, y, z], axis=-1)


def geodetic_to_ecef(lat: float, lon: float, height: float) -> np.ndarray:
    la, lo = math.radians(lat), math.radians(lon)
    r = EARTH_RADIUS + height
    return np.array([r * math.cos(la) * math.cos(lo), r * math.cos(la) * math.sin(lo), r * math.sin(la)])


def _enu_rotation(lat: float, lon: float) -> np.ndarray:
    la, lo = math.radians(lat), math.radians(lon)
    sl, cl = math.sin(la), math.cos(la)
    so, co = math.sin(lo), math.cos(lo)
    return np.array(
        [
            [-so, co, 0.0],
            [-sl * co, -sl * so, cl],
            [cl * co, cl * so, sl],
        ]
    )


def to_local_enu(earth_fixed_position, observer: tuple[float, float, float]) -> np.ndarray:
    """Earth-fixed position(s) into the East-North-Up frame at ``observer``.

    ``observer`` is ``(latitude_deg, longitude_deg, height_m)``; accepts a
    single 3-vector or an (N, 3) array.
    """
    lat, lon, h = observer
    if not -90.0 <= lat <= 90.0:
        raise ParameterError(f"observer latitude must be in [-90, 90], got {lat}")
    origin = geodetic_to_ecef(lat, lon, h)
    rot = _enu_rotation(lat, lon)
    return (np.asarray(earth_fixed_position, dtype=float) - origin) @ rot.T


def from_local_enu(enu_position, observer: tuple[float, float, float]) -> np.ndarray:
    lat, lon, h = observer
    origin = geodetic_to_ecef(lat, lon, h)
    rot = _enu_rotation(lat, lon)
    return np.asarray(enu_position, dtype=float) @ rot + origin


def elevation_azimuth(satellite_enu, antenna_enu) -> tuple[float, float]:
    """Elevation and azimuth (clockwise from North) in degrees."""
    d = np.asarray(satellite_enu, dtype=float) - np.asarray(antenna_enu, dtype=float)
    rng = float(np.linalg.norm(d))
    if rng == 0.0 or not math.isfinite(rng):
        raise DegenerateGeometryError("satellite and antenna positions coincide")
    el = math.degrees(math.asin(max(-1.0, min(1.0, d[2] / rng))))
    az = math.degrees(math.atan2(d[0], d[1])) % 360.0
    return el, az


def elevation_azimuth_many(satellites_enu: np.ndarray, antenna_enu) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(satellites_enu, dtype=float) - np.asarray(antenna_enu, dtype=float)
    rng = np.linalg.norm(d, axis=-1)
    if np.any(rng == 0.0):
        raise DegenerateGeometryError("satellite and antenna positions coincide")
    el = np.degrees(np.arcsin(np.clip(d[..., 2] / rng, -1.0, 1.0)))
    az = np.degrees(np.arctan2(d[..., 0], d[..., 1])) % 360.0
    return el, az


def line_of_sight_unit(elevation: float, azimuth: float) -> np.ndarray:
    """Unit ENU vector pointing at (elevation, azimuth), degrees."""
    el, az = math.radians(elevation), math.radians(azimuth)
    return np.array([math.cos(el) * math.sin(az), math.cos(el) * math.cos(az), math.sin(el)])


def constellation_enu(config: ConstellationConfig, time_since_epoch: float) -> np.ndarray:
    return to_local_enu(propagate_constellation(config, time_since_epoch), config.observer)


def mean_open_sky_count(
    config: ConstellationConfig,
    mask: float = 15.0,
    duration: float = 224.0,
    step: float = 1.0,
    *,
    per_epoch: bool = False,
):
    """Average number of satellites strictly above ``mask`` degrees, no buildings.

    Epochs are ``offset + k*step`` for ``k < duration/step`` and every offset in
    ``config.epoch_offsets``.  With ``per_epoch=True`` the per-epoch counts are
    returned instead of their mean.
    """
    if not 0.0 <= mask <= 90.0:
        raise ParameterError(f"mask must be in [0, 90], got {mask}")
    if step <= 0.0:
        raise ParameterError("step must be > 0")
    n_steps = int(round(duration / step))
    counts = []
    for offset in config.epoch_offsets or (0.0,):
        for k in range(n_steps):
            enu = constellation_enu(config, offset + k * step)
            el, _ = elevation_azimuth_many(enu, (0.0, 0.0, 0.0))
            counts.append(int(np.count_nonzero(el > mask)))
    counts = np.array(counts)
    if per_epoch:
        return counts
    return float(counts.mean())
