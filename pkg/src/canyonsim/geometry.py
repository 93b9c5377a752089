"""Procedural urban canyon: a 3 x 3 grid of city blocks lined with cuboid
buildings whose heights follow a Rice distribution.

Coordinates are local East-North-Up meters with the origin at the center of
the central block.  Every building is a cuboid standing on the ground plane
``z = 0`` and is exposed to the tracer as four wall planes and one roof plane.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ._bessel import i0e, i1e
from .errors import ParameterError

GEOMETRY_SCHEMA_VERSION = 1


class SurfaceKind(str, enum.Enum):
    BUILDING_WALL = "building_wall"
    BUILDING_ROOF = "building_roof"
    VEHICLE_ROOF = "vehicle_roof"


# Integer codes used by the array kernels.
SURFACE_CODES = {
    SurfaceKind.BUILDING_WALL: 0,
    SurfaceKind.BUILDING_ROOF: 1,
    SurfaceKind.VEHICLE_ROOF: 2,
}
SURFACE_FROM_CODE = {v: k for k, v in SURFACE_CODES.items()}


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value!r}")


def make_rng(seed: int) -> np.random.Generator:
    """Seeded PCG64 stream; the bit generator output is fixed across platforms."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_rice(nu: float, sigma: float, rng: np.random.Generator, size=None):
    """Draw Rice(nu, sigma) samples as ``sqrt(X**2 + Y**2)``.

    ``X ~ N(nu, sigma**2)`` and ``Y ~ N(0, sigma**2)``.  Returns a float when
    ``size`` is None, otherwise an array.
    """
    _check_finite(nu=nu, sigma=sigma)
    if sigma <= 0.0:
        raise ParameterError(f"rice sigma must be > 0, got {sigma}")
    if nu < 0.0:
        raise ParameterError(f"rice nu must be >= 0, got {nu}")
    x = rng.normal(nu, sigma, size)
    y = rng.normal(0.0, sigma, size)
    out = np.hypot(x, y)
    if size is None:
        return float(out)
    return out


def laguerre_half(x: float) -> float:
    """Laguerre function of degree 1/2 for ``x <= 0``."""
    z = -0.5 * x
    # exp(x/2) * I_k(-x/2) is exactly the scaled Bessel function at z >= 0
    return (1.0 - x) * i0e(z) - x * i1e(z)


def rice_mean(nu: float, sigma: float) -> float:
    """Analytic mean of Rice(nu, sigma)."""
    _check_finite(nu=nu, sigma=sigma)
    if sigma <= 0.0:
        raise ParameterError(f"rice sigma must be > 0, got {sigma}")
    if nu < 0.0:
        raise ParameterError(f"rice nu must be >= 0, got {nu}")
    x = -(nu * nu) / (2.0 * sigma * sigma)
    return sigma * math.sqrt(math.pi / 2.0) * laguerre_half(x)


@dataclass(frozen=True)
class CanyonParams:
    block_side_b: float = 250.0
    road_width_db: float = 30.0
    building_width_w: float = 25.0
    rice_nu: float = 25.0
    rice_sigma: float = 5.0
    rng_seed: int = 42

    def __post_init__(self):
        _check_finite(
            block_side_b=self.block_side_b,
            road_width_db=self.road_width_db,
            building_width_w=self.building_width_w,
            rice_nu=self.rice_nu,
            rice_sigma=self.rice_sigma,
        )
        for name in ("block_side_b", "road_width_db", "building_width_w", "rice_sigma"):
            if getattr(self, name) <= 0.0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.rice_nu < 0.0:
            raise ParameterError(f"rice_nu must be >= 0, got {self.rice_nu}")
        ratio = self.block_side_b / self.building_width_w
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ParameterError(
                "block_side_b must be an integer multiple of building_width_w "
                f"(got {self.block_side_b} / {self.building_width_w})"
            )
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ParameterError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")

    @property
    def buildings_per_edge(self) -> int:
        return int(round(self.block_side_b / self.building_width_w))

    @property
    def block_pitch(self) -> float:
        return self.block_side_b + self.road_width_db


@dataclass(frozen=True)
class BoundedPlane:
    """A rectangle ``p + s*u + t*v`` with ``s in [u_min, u_max]``, ``t in [v_min, v_max]``.

    ``normal_n`` points to the reflecting side.  ``owner`` is the index of the
    building the plane belongs to, or -1 for surfaces that do not occlude.
    """

    point_p: tuple[float, float, float]
    normal_n: tuple[float, float, float]
    axis_u: tuple[float, float, float]
    axis_v: tuple[float, float, float]
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    surface_kind: SurfaceKind
    owner: int = -1

    def __post_init__(self):
        n = np.asarray(self.normal_n, dtype=float)
        u = np.asarray(self.axis_u, dtype=float)
        v = np.asarray(self.axis_v, dtype=float)
        for name, vec in (("normal_n", n), ("axis_u", u), ("axis_v", v)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
                raise ParameterError(f"{name} must be unit length, got {tuple(vec)}")
        if max(abs(n @ u), abs(n @ v), abs(u @ v)) > 1e-12:
            raise ParameterError("plane axes must be mutually orthogonal")
        if not (self.u_min <= self.u_max and self.v_min <= self.v_max):
            raise ParameterError("plane extent must have min <= max")

    def contains(self, point, tol: float = 1e-9) -> bool:
        d = np.asarray(point, dtype=float) - np.asarray(self.point_p)
        if abs(d @ np.asarray(self.normal_n)) > tol:
            return False
        s = d @ np.asarray(self.axis_u)
        t = d @ np.asarray(self.axis_v)
        return (
            self.u_min - tol <= s <= self.u_max + tol
            and self.v_min - tol <= t <= self.v_max + tol
        )


@dataclass(frozen=True)
class Building:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    height: float

    def __post_init__(self):
        _check_finite(x_min=self.x_min, y_min=self.y_min, x_max=self.x_max, y_max=self.y_max, height=self.height)
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ParameterError("building footprint must have positive extent")
        if self.height <= 0.0:
            raise ParameterError(f"building height must be > 0, got {self.height}")

    @property
    def corners(self) -> list[tuple[float, float]]:
        return [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]

    def planes(self, owner: int) -> list[BoundedPlane]:
        x0, y0, x1, y1, h = self.x_min, self.y_min, self.x_max, self.y_max, self.height
        wall = SurfaceKind.BUILDING_WALL
        up = (0.0, 0.0, 1.0)
        return [
            BoundedPlane((x1, y0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), up, 0.0, y1 - y0, 0.0, h, wall, owner),
            BoundedPlane((x0, y0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), up, 0.0, y1 - y0, 0.0, h, wall, owner),
            BoundedPlane((x0, y1, 0.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0), up, 0.0, x1 - x0, 0.0, h, wall, owner),
            BoundedPlane((x0, y0, 0.0), (0.0, -1.0, 0.0), (1.0, 0.0, 0.0), up, 0.0, x1 - x0, 0.0, h, wall, owner),
            BoundedPlane(
                (x0, y0, h), up, (1.0, 0.0, 0.0), (0.0, 1.0, 0.0),
                0.0, x1 - x0, 0.0, y1 - y0, SurfaceKind.BUILDING_ROOF, owner,
            ),
        ]


@dataclass(frozen=True)
class PlaneArrays:
    """Structure-of-arrays view of a plane list, as consumed by the kernels."""

    point: np.ndarray  # (N, 3)
    normal: np.ndarray  # (N, 3)
    axis_u: np.ndarray  # (N, 3)
    axis_v: np.ndarray  # (N, 3)
    extent: np.ndarray  # (N, 4): u_min, u_max, v_min, v_max
    owner: np.ndarray  # (N,) int64
    kind: np.ndarray  # (N,) int64

    @classmethod
    def from_planes(cls, planes: Sequence[BoundedPlane]) -> "PlaneArrays":
        n = len(planes)

        def vecs(attr):
            if n == 0:
                return np.zeros((0, 3))
            return np.ascontiguousarray([getattr(p, attr) for p in planes], dtype=np.float64)

        extent = np.ascontiguousarray(
            [[p.u_min, p.u_max, p.v_min, p.v_max] for p in planes] if n else np.zeros((0, 4)),
            dtype=np.float64,
        ).reshape(n, 4)
        return cls(
            point=vecs("point_p"),
            normal=vecs("normal_n"),
            axis_u=vecs("axis_u"),
            axis_v=vecs("axis_v"),
            extent=extent,
            owner=np.array([p.owner for p in planes], dtype=np.int64),
            kind=np.array([SURFACE_CODES[p.surface_kind] for p in planes], dtype=np.int64),
        )

    def concat(self, other: "PlaneArrays") -> "PlaneArrays":
        return PlaneArrays(
            *(
                np.ascontiguousarray(np.concatenate([a, b]))
                for a, b in zip(
                    (self.point, self.normal, self.axis_u, self.axis_v, self.extent, self.owner, self.kind),
                    (other.point, other.normal, other.axis_u, other.axis_v, other.extent, other.owner, other.kind),
                )
            )
        )


@dataclass(frozen=True)
class CanyonGeometry:
    buildings: tuple[Building, ...]
    params: CanyonParams
    planes: tuple[BoundedPlane, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        planes = []
        for idx, b in enumerate(self.buildings):
            planes.extend(b.planes(idx))
        object.__setattr__(self, "planes", tuple(planes))

    @cached_property
    def plane_arrays(self) -> PlaneArrays:
        return PlaneArrays.from_planes(self.planes)

    @cached_property
    def box_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Building cuboids as ``(lo, hi)`` corner arrays of shape (B, 3)."""
        if not self.buildings:
            return np.zeros((0, 3)), np.zeros((0, 3))
        lo = np.array([[b.x_min, b.y_min, 0.0] for b in self.buildings], dtype=np.float64)
        hi = np.array([[b.x_max, b.y_max, b.height] for b in self.buildings], dtype=np.float64)
        return lo, hi

    @property
    def heights(self) -> np.ndarray:
        return np.array([b.height for b in self.buildings], dtype=float)

    def to_dict(self) -> dict:
        return {
            "schema_version": GEOMETRY_SCHEMA_VERSION,
            "params": asdict(self.params),
            "buildings": [
                {
                    "footprint_m": [[round(x, 6), round(y, 6)] for x, y in b.corners],
                    "height_m": round(b.height, 6),
                }
                for b in self.buildings
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "CanyonGeometry":
        if data.get("schema_version") != GEOMETRY_SCHEMA_VERSION:
            raise ParameterError(f"unsupported geometry schema version {data.get('schema_version')!r}")
        buildings = []
        for entry in data["buildings"]:
            xs = [c[0] for c in entry["footprint_m"]]
            ys = [c[1] for c in entry["footprint_m"]]
            buildings.append(Building(min(xs), min(ys), max(xs), max(ys), float(entry["height_m"])))
        return cls(tuple(buildings), CanyonParams(**data["params"]))


def ring_cells(n: int) -> list[tuple[int, int]]:
    """Cells of an ``n x n`` grid on its outer ring, row-major."""
    if n == 1:
        return [(0, 0)]
    return [(i, j) for j in range(n) for i in range(n) if i in (0, n - 1) or j in (0, n - 1)]


def building_count(params: CanyonParams) -> int:
    return 9 * len(ring_cells(params.buildings_per_edge))


def generate_canyon(params: CanyonParams) -> CanyonGeometry:
    """Tile the perimeter of each of the nine blocks with square buildings.

    Blocks are ``b x b`` squares on a pitch of ``b + road_width``; the central
    block is centered on the origin.  Heights are independent Rice draws taken
    in a fixed order (blocks south to north, west to east; cells row-major),
    so footprints never depend on the height parameters.
    """
    rng = make_rng(params.rng_seed)
    n = params.buildings_per_edge
    w = params.building_width_w
    half = params.block_side_b / 2.0
    cells = ring_cells(n)
    buildings = []
    for by in (-1, 0, 1):
        for bx in (-1, 0, 1):
            x0 = bx * params.block_pitch - half
            y0 = by * params.block_pitch - half
            heights = sample_rice(params.rice_nu, params.rice_sigma, rng, size=len(cells))
            for (i, j), h in zip(cells, heights):
                buildings.append(
                    Building(x0 + i * w, y0 + j * w, x0 + (i + 1) * w, y0 + (j + 1) * w, float(h))
                )
    return CanyonGeometry(tuple(buildings), params)


def empty_canyon(params: CanyonParams | None = None) -> CanyonGeometry:
    """A geometry with no buildings, used for open-sky checks."""
    return CanyonGeometry((), params or CanyonParams())
