"""On-disk formats for sweep outputs.

Every JSON file carries a top-level ``schema_version``; every CSV starts with
a ``# schema_version=N`` comment line followed by a header whose column names
include units.  Read the CSVs with e.g. ``pandas.read_csv(path, comment="#")``.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import EnvironmentSummary, QuadraticModel, PUBLISHED_MODEL, histogram_delays
from .errors import CanyonSimError
from .orbits import ConstellationConfig, constellation_enu, elevation_azimuth_many
from .simulate import EnvironmentRun

SCHEMA_VERSION = 1

EVENT_COLUMNS = ("epoch_s", "sat_id", "surface_kind", "delay_m", "rx_m", "ry_m", "rz_m", "plane_index")
OBSERVATION_COLUMNS = (
    "epoch_s", "repetition", "drive_time_s", "sat_id", "mode", "elevation_deg", "azimuth_deg", "n_reflections",
)
HISTOGRAM_COLUMNS = ("bin_low_m", "bin_high_m", "density")
SATELLITE_COLUMNS = ("epoch_s", "sat_id", "east_m", "north_m", "up_m", "elevation_deg", "azimuth_deg")

SUMMARY_FILE = "summary.json"
MODEL_FILE = "model.json"
MANIFEST_FILE = "manifest.json"

HISTOGRAM_BIN_WIDTH = 1.0
HISTOGRAM_MAX_DELAY = 100.0


class SchemaMismatchError(CanyonSimError):
    pass


def nu_tag(nu: float) -> str:
    return f"nu{nu:g}m"


def events_name(nu: float) -> str:
    return f"events_{nu_tag(nu)}.csv"


def observations_name(nu: float) -> str:
    return f"observations_{nu_tag(nu)}.csv"


def histogram_name(nu: float) -> str:
    return f"histogram_{nu_tag(nu)}.csv"


def dumps_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def events_csv(run: EnvironmentRun) -> str:
    rows = (
        (
            f"{e.epoch:.1f}",
            e.sat_id,
            e.surface_kind.value,
            f"{e.delay_d:.4f}",
            f"{e.reflection_point_r[0]:.4f}",
            f"{e.reflection_point_r[1]:.4f}",
            f"{e.reflection_point_r[2]:.4f}",
            e.plane_index,
        )
        for o in run.observations
        for e in o.reflections
    )
    return _csv_text(EVENT_COLUMNS, rows)


def observations_csv(run: EnvironmentRun, repetition_spacing: float) -> str:
    rows = (
        (
            f"{o.repetition * repetition_spacing + o.epoch:.1f}",
            o.repetition,
            f"{o.epoch:.1f}",
            o.sat_id,
            o.mode.value,
            f"{o.elevation_theta:.6f}",
            f"{o.azimuth_beta:.6f}",
            len(o.reflections),
        )
        for o in run.observations
    )
    return _csv_text(OBSERVATION_COLUMNS, rows)


def histogram_csv(summary: EnvironmentSummary) -> str:
    h = histogram_delays(summary.pooled_delays, HISTOGRAM_BIN_WIDTH, HISTOGRAM_MAX_DELAY)
    rows = [(f"{lo:g}", f"{hi:g}", f"{d:.8f}") for lo, hi, d in zip(h.bin_low, h.bin_high, h.density)]
    return _csv_text(HISTOGRAM_COLUMNS, rows)


def satellites_csv(config: ConstellationConfig, times: Iterable[float], antenna=(0.0, 0.0, 0.0)) -> str:
    rows = []
    for t in times:
        enu = constellation_enu(config, t)
        el, az = elevation_azimuth_many(enu, antenna)
        for sat in range(enu.shape[0]):
            e, n, u = enu[sat]
            rows.append((f"{t:.1f}", sat, f"{e:.3f}", f"{n:.3f}", f"{u:.3f}", f"{el[sat]:.6f}", f"{az[sat]:.6f}"))
    return _csv_text(SATELLITE_COLUMNS, rows)


def summary_payload(master_seed: int, summaries: Sequence[EnvironmentSummary]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "master_seed": int(master_seed),
        "environments": [s.to_dict() for s in summaries],
    }


def model_payload(model: QuadraticModel | None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "fitted": model.to_dict() if model is not None else None,
        "published": PUBLISHED_MODEL.to_dict(),
    }


def read_json(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatchError(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")
    return data


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema_version={SCHEMA_VERSION}":
            raise SchemaMismatchError(f"{path}: unexpected schema line {first!r}")
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def read_event_delays(path: Path) -> np.ndarray:
    header, rows = read_csv(path)
    col = header.index("delay_m")
    return np.array([float(r[col]) for r in rows], dtype=float)
