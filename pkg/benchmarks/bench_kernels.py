"""Compare the compiled and numpy kernel backends on sweep-like workloads.

    python benchmarks/bench_kernels.py [--epochs N] [--repeat R]

Each workload traces one environment's epochs (satellites above the mask,
vehicle roof included) exactly as the simulator does.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from canyonsim import kernels
from canyonsim.geometry import PlaneArrays
from canyonsim.orbits import elevation_azimuth_many
from canyonsim.raytrace import OCCLUSION_EPS, vehicle_roof_plane
from canyonsim.simulate import ScenarioConfig, _constellation_track, environment_geometry, vehicle_position


def build_workload(config: ScenarioConfig, nu: float, epochs: int):
    geometry, _ = environment_geometry(config, nu)
    track = _constellation_track(config)[:epochs]
    lo, hi = geometry.box_arrays
    calls = []
    for i, sats in enumerate(track):
        t = (i * config.sample_period) % config.duration
        antenna, heading = vehicle_position(t, config)
        el, _ = elevation_azimuth_many(sats, antenna)
        visible = sats[el > config.trace_elevation_mask]
        roof = vehicle_roof_plane(antenna, heading, *config.vehicle_dims)
        arr = geometry.plane_arrays.concat(PlaneArrays.from_planes([roof]))
        calls.append(
            (antenna, visible, arr.point, arr.normal, arr.axis_u, arr.axis_v, arr.extent, arr.owner, lo, hi, OCCLUSION_EPS)
        )
    return calls


def time_backend(module, calls, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for args in calls:
            module.trace_epoch_batch(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--epochs", type=int, default=224)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    config = ScenarioConfig()
    print(f"backends available: {', '.join(sorted(kernels.BACKENDS))}")
    print(f"{'nu':>5} {'backend':>9} {'epochs':>7} {'total s':>9} {'ms/epoch':>9} {'speedup':>8}")
    for nu in (5.0, 30.0, 60.0):
        calls = build_workload(config, nu, args.epochs)
        baseline = None
        for name in ("python", "compiled"):
            if name not in kernels.BACKENDS:
                continue
            elapsed = time_backend(kernels.BACKENDS[name], calls, args.repeat)
            baseline = baseline or elapsed
            print(
                f"{nu:5.0f} {name:>9} {len(calls):7d} {elapsed:9.3f} "
                f"{1e3 * elapsed / len(calls):9.3f} {baseline / elapsed:7.1f}x"
            )
        if len(kernels.BACKENDS) == 2:
            a = kernels.BACKENDS["python"].trace_epoch_batch(*calls[0])
            b = kernels.BACKENDS["compiled"].trace_epoch_batch(*calls[0])
            assert all(np.allclose(x, y) for x, y in zip(a, b)), "backends disagree"


if __name__ == "__main__":
    main()
