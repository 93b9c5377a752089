"""Sweep -> summaries -> fitted model -> file contents, assembled in memory.

File bodies are rendered to strings before anything touches the disk, so the
bytes written never depend on execution order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__, kernels
from .analysis import EnvironmentSummary, QuadraticModel, fit_quadratic, summarize_environment, sweep_points
from .artifacts import (
    MANIFEST_FILE,
    MODEL_FILE,
    SCHEMA_VERSION,
    SUMMARY_FILE,
    dumps_json,
    events_csv,
    events_name,
    histogram_csv,
    histogram_name,
    model_payload,
    observations_csv,
    observations_name,
    summary_payload,
)
from .errors import SingularFitError
from .simulate import EnvironmentRun, ScenarioConfig, run_sweep


@dataclass
class SweepResult:
    config: ScenarioConfig
    runs: dict[float, EnvironmentRun]
    summaries: list[EnvironmentSummary]
    model: QuadraticModel | None
    files: dict[str, str]
    elapsed_s: float

    @property
    def seeds(self) -> dict[str, int]:
        return {f"{nu:g}": run.seed for nu, run in self.runs.items()}


def run_pipeline(config: ScenarioConfig, jobs: int = 1) -> SweepResult:
    start = time.perf_counter()
    runs = run_sweep(config, jobs=jobs)
    elapsed = time.perf_counter() - start
    summaries = []
    files: dict[str, str] = {}
    for nu, run in runs.items():
        if run.observations:
            summary = summarize_environment(run.observations, nu, config.canyon.rice_sigma, run.epoch_count)
            summaries.append(summary)
            files[f"histograms/{histogram_name(nu)}"] = histogram_csv(summary)
        files[f"events/{events_name(nu)}"] = events_csv(run)
        files[f"observations/{observations_name(nu)}"] = observations_csv(run, config.repetition_spacing)
    try:
        model = fit_quadratic(sweep_points(summaries))
    except SingularFitError:
        model = None
    files[SUMMARY_FILE] = dumps_json(summary_payload(config.master_seed, summaries))
    files[MODEL_FILE] = dumps_json(model_payload(model))
    return SweepResult(config, runs, summaries, model, files, elapsed)


def manifest_payload(result: SweepResult) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "master_seed": int(result.config.master_seed),
        "config": result.config.to_dict(),
        "per_environment_seeds": result.seeds,
        "output_paths": sorted(result.files),
        "sweep_elapsed_s": round(result.elapsed_s, 3),
    }


def write_result(result: SweepResult, out_dir: Path) -> list[Path]:
    """Write every artifact plus the manifest; returns the paths written."""
    out_dir = Path(out_dir)
    written = []
    payloads = dict(result.files)
    payloads[MANIFEST_FILE] = dumps_json(manifest_payload(result))
    for rel, text in sorted(payloads.items()):
        path = out_dir / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written
