"""Acceptance checks against a completed sweep.

Each check returns one or more :class:`CriterionResult`.  Checks that need the
sweep read the artifacts written by ``canyonsim sweep``; the geometry and Rice
suites recompute from scratch with fixed seeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import PUBLISHED_MODEL, estimate_median_delay, fit_quadratic
from .artifacts import (
    MANIFEST_FILE,
    MODEL_FILE,
    SUMMARY_FILE,
    events_name,
    read_event_delays,
    read_json,
)
from .errors import CanyonSimError
from .geometry import empty_canyon, make_rng, rice_mean, sample_rice
from .oracles import angle_between, grid_reflection_point, random_reflection_case, rice_mean_quadrature
from .orbits import mean_open_sky_count
from .raytrace import mirror_point, path_delay, reflection_point
from .simulate import ScenarioConfig, run_environment

OPEN_SKY_TARGET = 7.88
OPEN_SKY_TOL = 1.0
THRESHOLD_BAND = (30.0, 55.0)
GAMMA_MIN_DELAYS = 500
GAMMA_SCALE_BAND = (0.5, 2.0)
RMS_BOUND = 1.0
SWEEP_TIME_LIMIT_S = 300.0
ORACLE_SEED = 20201122


class MissingArtifactError(CanyonSimError, FileNotFoundError):
    pass


@dataclass(frozen=True)
class CriterionResult:
    key: str
    name: str
    observed: str
    bound: str
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"[{verdict}] {self.key:<4} {self.name}: observed {self.observed}; bound {self.bound}"


def _fmt(x, digits=4) -> str:
    return "none" if x is None else f"{x:.{digits}f}"


def count_increases(values: Sequence[float]) -> int:
    """Adjacent pairs where the sequence goes up."""
    return sum(1 for a, b in zip(values, values[1:]) if b > a)


def _sorted_envs(envs: list[dict]) -> list[dict]:
    return sorted(envs, key=lambda e: e["mu_h_m"])


def check_open_sky(config: ScenarioConfig) -> CriterionResult:
    offsets = tuple(k * config.repetition_spacing for k in range(config.repetitions))
    constellation = replace(config.constellation, epoch_offsets=offsets)
    value = mean_open_sky_count(constellation, config.open_sky_mask, config.duration, config.sample_period)
    return CriterionResult(
        "1", "open-sky satellites above mask",
        _fmt(value, 3), f"{OPEN_SKY_TARGET} +/- {OPEN_SKY_TOL}",
        abs(value - OPEN_SKY_TARGET) <= OPEN_SKY_TOL,
    )


def threshold_crossing(envs: list[dict], level: float = 4.0) -> float | None:
    """Building height at which mean Ns first drops below ``level`` (linear interpolation)."""
    envs = _sorted_envs(envs)
    for lo, hi in zip(envs, envs[1:]):
        n0, n1 = lo["mean_received_Ns"], hi["mean_received_Ns"]
        if n0 >= level > n1:
            frac = (n0 - level) / (n0 - n1)
            return lo["mu_h_m"] + frac * (hi["mu_h_m"] - lo["mu_h_m"])
    return None


def check_threshold(envs: list[dict]) -> CriterionResult:
    mu = threshold_crossing(envs)
    ns = [e["mean_received_Ns"] for e in _sorted_envs(envs)]
    observed = f"mu_h {_fmt(mu, 2)} m" if mu is not None else f"no crossing (Ns range {min(ns):.2f}..{max(ns):.2f})"
    return CriterionResult(
        "2", "Ns drops below 4",
        observed, f"crossing mu_h in [{THRESHOLD_BAND[0]:g}, {THRESHOLD_BAND[1]:g}] m",
        mu is not None and THRESHOLD_BAND[0] <= mu <= THRESHOLD_BAND[1],
    )


def check_trends(envs: list[dict]) -> list[CriterionResult]:
    envs = _sorted_envs(envs)
    refl = [e["reflections_per_epoch"] for e in envs]
    ns = [e["mean_received_Ns"] for e in envs]
    by_nu = {e["nu_h_m"]: e for e in envs}
    shallow = by_nu.get(5.0, envs[0])
    deep = by_nu.get(60.0, envs[-1])
    splos = (shallow["mode_fractions"]["SPLOS"], deep["mode_fractions"]["SPLOS"])
    blocked = (shallow["mode_fractions"]["BLOCKED"], deep["mode_fractions"]["BLOCKED"])
    inv_r = count_increases(refl)
    inv_n = count_increases(ns)
    return [
        CriterionResult(
            "3a", "reflections per epoch non-increasing in mu_h",
            f"{inv_r} increases ({refl[0]:.2f} -> {refl[-1]:.2f})", "<= 1 increase", inv_r <= 1,
        ),
        CriterionResult(
            "3b", "mean Ns non-increasing in mu_h",
            f"{inv_n} increases ({ns[0]:.2f} -> {ns[-1]:.2f})", "<= 1 increase", inv_n <= 1,
        ),
        CriterionResult(
            "3c", "SPLOS falls and BLOCKED rises from shallow to deep",
            f"SPLOS {splos[0]:.3f} -> {splos[1]:.3f}, BLOCKED {blocked[0]:.3f} -> {blocked[1]:.3f}",
            "strict", splos[0] > splos[1] and blocked[0] < blocked[1],
        ),
    ]


def check_gamma(envs: list[dict]) -> list[CriterionResult]:
    envs = [e for e in _sorted_envs(envs) if e["pooled_delay_count"] >= GAMMA_MIN_DELAYS and e["gamma_scale"] is not None]
    scales = [e["gamma_scale"] for e in envs]
    shapes = [e["gamma_shape"] for e in envs]
    lo, hi = GAMMA_SCALE_BAND
    bad = [f"nu={e['nu_h_m']:g}:{e['gamma_scale']:.2f}" for e in envs if not lo <= e["gamma_scale"] <= hi]
    inv = count_increases(shapes)
    return [
        CriterionResult(
            "4a", "gamma scale per environment",
            (f"{len(envs)} envs, scale {min(scales):.2f}..{max(scales):.2f}" if envs else "no eligible environments")
            + (f"; outside: {', '.join(bad)}" if bad else ""),
            f"[{lo}, {hi}] for envs with >= {GAMMA_MIN_DELAYS} delays",
            bool(envs) and not bad,
        ),
        CriterionResult(
            "4b", "gamma shape decreasing in mu_h",
            f"{inv} increases ({', '.join(f'{s:.2f}' for s in shapes)})", "<= 1 increase",
            bool(envs) and inv <= 1,
        ),
    ]


def check_quadratic(envs: list[dict]) -> list[CriterionResult]:
    points = [(e["mean_received_Ns"], e["median_delay_dm_m"]) for e in envs if e["median_delay_dm_m"] is not None]
    model = fit_quadratic(points)
    at5 = estimate_median_delay(PUBLISHED_MODEL, 5.0)
    at8 = estimate_median_delay(PUBLISHED_MODEL, 8.0)
    return [
        CriterionResult(
            "5a", "refit quadratic RMS error",
            f"{model.rms_error:.3f} m (c2={model.c2:.3f}, c1={model.c1:.3f}, c0={model.c0:.3f})",
            f"<= {RMS_BOUND} m", model.rms_error <= RMS_BOUND,
        ),
        CriterionResult(
            "5b", "published model at Ns=5 and Ns=8",
            f"{at5:.6f} m, {at8:.6f} m", "15.57 m, 21.84 m (1e-9)",
            abs(at5 - 15.57) <= 1e-9 and abs(at8 - 21.84) <= 1e-9,
        ),
    ]


def geometry_oracle_suite(n_grid: int = 100, n_props: int = 10_000, seed: int = ORACLE_SEED) -> dict:
    """Failure counts for the grid oracle and the three per-case properties."""
    rng = np.random.default_rng(seed)
    grid_fail = 0
    worst_grid = 0.0
    for _ in range(n_grid):
        plane, s, a = random_reflection_case(rng)
        r = reflection_point(s, a, plane)
        g, res = grid_reflection_point(s, a, plane)
        if r is None:
            grid_fail += 1
            continue
        len_r = np.linalg.norm(r - s) + np.linalg.norm(a - r)
        len_g = np.linalg.norm(g - s) + np.linalg.norm(a - g)
        dist = float(np.linalg.norm(r - g))
        worst_grid = max(worst_grid, dist / res)
        if len_r > len_g + 1e-9 or dist > 3.0 * res:
            grid_fail += 1
    inv_fail = law_fail = neg_fail = 0
    worst_inv = worst_law = 0.0
    for _ in range(n_props):
        plane, s, a = random_reflection_case(rng)
        back = mirror_point(mirror_point(a, plane), plane)
        err = float(np.max(np.abs(back - a)))
        worst_inv = max(worst_inv, err)
        inv_fail += err > 1e-12
        r = reflection_point(s, a, plane)
        if r is None:
            law_fail += 1
            continue
        n = np.asarray(plane.normal_n)
        d_err = abs(angle_between(s - r, n) - angle_between(a - r, n))
        worst_law = max(worst_law, d_err)
        law_fail += d_err > 1e-9
        neg_fail += path_delay(s, a, r) < 0.0
        neg_fail += path_delay(s, a, rng.uniform(-100, 100, size=3)) < 0.0
    return {
        "grid_failures": grid_fail,
        "grid_worst_over_resolution": worst_grid,
        "involution_failures": inv_fail,
        "involution_worst_m": worst_inv,
        "law_failures": law_fail,
        "law_worst_rad": worst_law,
        "delay_negative": neg_fail,
        "n_grid": n_grid,
        "n_props": n_props,
    }


def check_geometry_oracles(n_grid: int = 100, n_props: int = 10_000) -> CriterionResult:
    out = geometry_oracle_suite(n_grid, n_props)
    failures = out["grid_failures"] + out["involution_failures"] + out["law_failures"] + out["delay_negative"]
    return CriterionResult(
        "6", "reflection geometry oracles",
        f"grid {out['n_grid'] - out['grid_failures']}/{out['n_grid']}, "
        f"involution max {out['involution_worst_m']:.1e} m, law max {out['law_worst_rad']:.1e} rad, "
        f"negative delays {out['delay_negative']}",
        "all pass (involution 1e-12 m, law 1e-9 rad)", failures == 0,
    )


def check_rice(draws: int = 1_000_000, sigma: float = 5.0, seed: int = ORACLE_SEED) -> CriterionResult:
    rng = make_rng(seed)
    worst_sample = 0.0
    worst_quad = 0.0
    for nu in (0.0, 5.0, 25.0, 60.0):
        analytic = rice_mean(nu, sigma)
        sample = float(np.mean(sample_rice(nu, sigma, rng, size=draws)))
        worst_sample = max(worst_sample, abs(sample - analytic) / analytic)
        worst_quad = max(worst_quad, abs(analytic - rice_mean_quadrature(nu, sigma)) / analytic)
    return CriterionResult(
        "7", "Rice mean: sampling and quadrature",
        f"sample rel err {worst_sample:.2e}, quadrature rel err {worst_quad:.2e}",
        "< 1e-2 and < 1e-6", worst_sample < 1e-2 and worst_quad < 1e-6,
    )


def check_determinism(out_dir: Path, config: ScenarioConfig) -> CriterionResult:
    from .pipeline import run_pipeline

    rerun = run_pipeline(config)
    same = []
    for name in (SUMMARY_FILE, MODEL_FILE):
        on_disk = (out_dir / name).read_bytes()
        same.append(on_disk == rerun.files[name].encode("utf-8"))
    return CriterionResult(
        "8", "rerun from manifest is byte-identical",
        f"summary {'identical' if same[0] else 'differs'}, model {'identical' if same[1] else 'differs'}",
        "both identical", all(same),
    )


def check_delta_filter(out_dir: Path, config: ScenarioConfig) -> CriterionResult:
    delta = config.antenna_offset_delta
    smallest = math.inf
    for nu in config.nu_sweep:
        delays = read_event_delays(out_dir / "events" / events_name(nu))
        if delays.size:
            smallest = min(smallest, float(delays.min()))
    empty_run = run_environment(config, config.nu_sweep[0], geometry=empty_canyon(config.canyon))
    empty_events = sum(len(o.reflections) for o in empty_run.observations)
    return CriterionResult(
        "9", "small-delay filter",
        f"min retained delay {smallest:.4f} m, zero-building events {empty_events}",
        f">= {delta} m and 0 events", smallest >= delta and empty_events == 0,
    )


def check_runtime(elapsed_s: float) -> CriterionResult:
    return CriterionResult(
        "T", "full sweep runtime", f"{elapsed_s:.1f} s", f"< {SWEEP_TIME_LIMIT_S:g} s",
        elapsed_s < SWEEP_TIME_LIMIT_S,
    )


def load_sweep(out_dir: Path) -> tuple[dict, dict, dict]:
    out_dir = Path(out_dir)
    missing = [name for name in (MANIFEST_FILE, SUMMARY_FILE, MODEL_FILE) if not (out_dir / name).is_file()]
    if missing:
        raise MissingArtifactError(f"missing artifacts in {out_dir}: {', '.join(missing)}")
    manifest = read_json(out_dir / MANIFEST_FILE)
    summary = read_json(out_dir / SUMMARY_FILE)
    model = read_json(out_dir / MODEL_FILE)
    config = ScenarioConfig.from_dict(manifest["config"])
    absent = [
        f"events/{events_name(nu)}" for nu in config.nu_sweep if not (out_dir / "events" / events_name(nu)).is_file()
    ]
    if absent:
        raise MissingArtifactError(f"missing artifacts in {out_dir}: {', '.join(absent)}")
    return manifest, summary, model


def run_verification(out_dir: Path, rerun: bool = True) -> list[CriterionResult]:
    out_dir = Path(out_dir)
    manifest, summary, _ = load_sweep(out_dir)
    config = ScenarioConfig.from_dict(manifest["config"])
    envs = summary["environments"]
    results = [check_open_sky(config), check_threshold(envs)]
    results += check_trends(envs)
    results += check_gamma(envs)
    results += check_quadratic(envs)
    results.append(check_geometry_oracles())
    results.append(check_rice())
    if rerun:
        results.append(check_determinism(out_dir, config))
    results.append(check_delta_filter(out_dir, config))
    results.append(check_runtime(float(manifest["sweep_elapsed_s"])))
    return results
