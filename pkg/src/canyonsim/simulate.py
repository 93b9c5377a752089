"""Experiment driver: vehicle loop, time stepping, repetitions and the
building-height sweep.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .geometry import SURFACE_FROM_CODE, CanyonGeometry, CanyonParams, generate_canyon, rice_mean
from .orbits import ConstellationConfig, constellation_enu, elevation_azimuth_many
from .raytrace import ReflectionEvent, trace_satellites, vehicle_roof_plane

DEFAULT_MASTER_SEED = 42


class ReceptionMode(str, enum.Enum):
    SPLOS = "SPLOS"
    MP = "MP"
    NLOS = "NLOS"
    BLOCKED = "BLOCKED"

    @property
    def received(self) -> bool:
        return self is not ReceptionMode.BLOCKED


def classify(los_clear: bool, has_reflections: bool) -> ReceptionMode:
    if los_clear:
        return ReceptionMode.MP if has_reflections else ReceptionMode.SPLOS
    return ReceptionMode.NLOS if has_reflections else ReceptionMode.BLOCKED


def _default_sweep() -> tuple[float, ...]:
    return tuple(float(v) for v in range(5, 65, 5))


@dataclass(frozen=True)
class ScenarioConfig:
    canyon: CanyonParams = field(default_factory=CanyonParams)
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    vehicle_speed: float = 5.0
    # length, width, height
    vehicle_dims: tuple[float, float, float] = (2.0, 2.0, 1.5)
    antenna_offset_delta: float = 0.01
    duration: float = 224.0
    sample_period: float = 1.0
    repetitions: int = 6
    repetition_spacing: float = 7200.0
    # Vehicle-roof bounces have delay 2*delta*sin(elevation), so the default
    # threshold is 2*delta to drop all of them.
    min_delay_filter: float = 0.02
    nu_sweep: tuple[float, ...] = field(default_factory=_default_sweep)
    master_seed: int = DEFAULT_MASTER_SEED
    # distance along the loop at t = 0, measured from the south-west corner
    start_offset: float = 0.0
    # satellites at or below this elevation are not traced (receiver mask)
    trace_elevation_mask: float = 15.0
    open_sky_mask: float = 15.0

    def __post_init__(self):
        object.__setattr__(self, "vehicle_dims", tuple(float(v) for v in self.vehicle_dims))
        object.__setattr__(self, "nu_sweep", tuple(float(v) for v in self.nu_sweep))
        for name in ("vehicle_speed", "duration", "sample_period", "antenna_offset_delta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ParameterError(f"{name} must be finite and > 0, got {value}")
        if len(self.vehicle_dims) != 3 or min(self.vehicle_dims) <= 0.0:
            raise ParameterError("vehicle_dims must be three positive lengths")
        if self.repetitions < 1:
            raise ParameterError("repetitions must be >= 1")
        if self.repetition_spacing < 0.0:
            raise ParameterError("repetition_spacing must be >= 0")
        if self.min_delay_filter < 0.0:
            raise ParameterError("min_delay_filter must be >= 0")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ParameterError("master_seed must be an unsigned 64-bit integer")
        for name in ("trace_elevation_mask", "open_sky_mask"):
            if not 0.0 <= getattr(self, name) < 90.0:
                raise ParameterError(f"{name} must be in [0, 90), got {getattr(self, name)}")
        if any(not (math.isfinite(v) and v >= 0.0) for v in self.nu_sweep):
            raise ParameterError("nu_sweep values must be finite and >= 0")
        distance = self.duration * self.vehicle_speed
        if abs(distance - self.loop_perimeter) > 1e-6 * self.loop_perimeter:
            raise ParameterError(
                f"duration * vehicle_speed = {distance} m must equal the loop perimeter "
                f"{self.loop_perimeter} m"
            )

    @property
    def loop_side(self) -> float:
        return self.canyon.block_side_b + self.canyon.road_width_db

    @property
    def loop_perimeter(self) -> float:
        return 4.0 * self.loop_side

    @property
    def sample_count(self) -> int:
        return int(round(self.duration / self.sample_period))

    @property
    def antenna_height(self) -> float:
        return self.vehicle_dims[2] + self.antenna_offset_delta

    def to_dict(self) -> dict:
        out = asdict(self)
        out["vehicle_dims"] = list(self.vehicle_dims)
        out["nu_sweep"] = list(self.nu_sweep)
        out["constellation"]["epoch_offsets"] = list(self.constellation.epoch_offsets)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        try:
            if "canyon" in data:
                data["canyon"] = CanyonParams(**data["canyon"])
            if "constellation" in data:
                data["constellation"] = ConstellationConfig(**data["constellation"])
            return cls(**data)
        except TypeError as exc:
            raise ParameterError(str(exc)) from exc


@dataclass(frozen=True, slots=True)
class EpochObservation:
    """One satellite at one sample time.

    ``epoch`` is the drive time in seconds; the constellation time is
    ``repetition * repetition_spacing + epoch``.
    """

    epoch: float
    repetition: int
    sat_id: int
    mode: ReceptionMode
    reflections: tuple[ReflectionEvent, ...]
    elevation_theta: float
    azimuth_beta: float = 0.0


@dataclass(frozen=True)
class EnvironmentRun:
    nu_h: float
    mu_h: float
    seed: int
    observations: list[EpochObservation]
    epoch_count: int


def derive_seed(master_seed: int, nu_h: float) -> int:
    """Per-environment seed from ``(master_seed, nu_h)``; independent of sweep order.

    ``nu_h`` enters at millimeter resolution.
    """
    master = int(master_seed)
    seq = np.random.SeedSequence([master & 0xFFFFFFFF, master >> 32, int(round(nu_h * 1000.0))])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def vehicle_position(t: float, config: ScenarioConfig) -> tuple[np.ndarray, float]:
    """Antenna position and heading (radians from East, counter-clockwise) at drive time ``t``.

    The vehicle runs counter-clockwise along the road midlines around the
    central block, starting at the south-west corner plus ``start_offset``.
    """
    if not (0.0 <= t <= config.duration):
        raise ParameterError(f"t must be in [0, {config.duration}], got {t}")
    side = config.loop_side
    half = side / 2.0
    s = (config.start_offset + config.vehicle_speed * t) % config.loop_perimeter
    leg = min(int(s // side), 3)
    along = s - leg * side
    corners = ((-half, -half), (half, -half), (half, half), (-half, half))
    directions = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))
    x0, y0 = corners[leg]
    dx, dy = directions[leg]
    pos = np.array([x0 + dx * along, y0 + dy * along, config.antenna_height])
    return pos, leg * math.pi / 2.0


def _constellation_track(config: ScenarioConfig) -> list[np.ndarray]:
    """Satellite ENU positions per (repetition, sample), flattened in that order."""
    out = []
    for k in range(config.repetitions):
        for i in range(config.sample_count):
            t = k * config.repetition_spacing + i * config.sample_period
            out.append(constellation_enu(config.constellation, t))
    return out


def environment_geometry(config: ScenarioConfig, nu_h: float) -> tuple[CanyonGeometry, int]:
    seed = derive_seed(config.master_seed, nu_h)
    params = replace(config.canyon, rice_nu=float(nu_h), rng_seed=seed)
    return generate_canyon(params), seed


def run_environment(
    config: ScenarioConfig,
    nu_h: float,
    geometry: CanyonGeometry | None = None,
    _track: Sequence[np.ndarray] | None = None,
) -> EnvironmentRun:
    """Simulate every repetition and sample for one building-height setting.

    ``geometry`` overrides the generated city (used for open-sky checks).
    Reflections shorter than ``min_delay_filter`` are dropped before the
    reception mode is assigned.
    """
    if not (math.isfinite(nu_h) and nu_h >= 0.0):
        raise ParameterError(f"nu_h must be finite and >= 0, got {nu_h}")
    seed = derive_seed(config.master_seed, nu_h)
    if geometry is None:
        geometry, seed = environment_geometry(config, nu_h)
    track = _track if _track is not None else _constellation_track(config)
    length, width, height = config.vehicle_dims
    n_building_planes = len(geometry.planes)
    kinds = geometry.plane_arrays.kind
    observations: list[EpochObservation] = []
    idx = 0
    for k in range(config.repetitions):
        for i in range(config.sample_count):
            t = i * config.sample_period
            sats = track[idx]
            idx += 1
            antenna, heading = vehicle_position(t, config)
            el, az = elevation_azimuth_many(sats, antenna)
            visible = np.nonzero(el > config.trace_elevation_mask)[0]
            if visible.size == 0:
                continue
            roof = vehicle_roof_plane(antenna, heading, length, width, height)
            los, ev_sat, ev_plane, ev_r, ev_d = trace_satellites(sats[visible], antenna, geometry, [roof])
            keep = ev_d >= config.min_delay_filter
            ev_sat, ev_plane, ev_r, ev_d = ev_sat[keep], ev_plane[keep], ev_r[keep], ev_d[keep]
            epoch_abs = k * config.repetition_spacing + t
            per_sat: dict[int, list[ReflectionEvent]] = {}
            for j, p, r, d in zip(ev_sat.tolist(), ev_plane.tolist(), ev_r.tolist(), ev_d.tolist()):
                kind = SURFACE_FROM_CODE[int(kinds[p])] if p < n_building_planes else roof.surface_kind
                per_sat.setdefault(j, []).append(
                    ReflectionEvent(int(visible[j]), epoch_abs, tuple(r), d, p, kind)
                )
            for j, sat in enumerate(visible.tolist()):
                refl = tuple(per_sat.get(j, ()))
                observations.append(
                    EpochObservation(
                        epoch=t,
                        repetition=k,
                        sat_id=sat,
                        mode=classify(bool(los[j]), bool(refl)),
                        reflections=refl,
                        elevation_theta=float(el[sat]),
                        azimuth_beta=float(az[sat]),
                    )
                )
    return EnvironmentRun(
        nu_h=float(nu_h),
        mu_h=rice_mean(float(nu_h), config.canyon.rice_sigma),
        seed=seed,
        observations=observations,
        epoch_count=config.repetitions * config.sample_count,
    )


def _run_one(args):
    config, nu = args
    return run_environment(config, nu)


def run_sweep(
    config: ScenarioConfig, nus: Iterable[float] | None = None, jobs: int = 1
) -> dict[float, EnvironmentRun]:
    """Run every environment of the sweep; keys are sorted by ``nu_h``.

    With ``jobs > 1`` environments run in worker processes; results do not
    depend on scheduling.
    """
    values = sorted({float(v) for v in (config.nu_sweep if nus is None else nus)})
    if not values:
        raise ParameterError("nu_sweep must not be empty")
    if jobs > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_one, [(config, v) for v in values]))
    else:
        track = _constellation_track(config)
        runs = [run_environment(config, v, _track=track) for v in values]
    return {run.nu_h: run for run in runs}
