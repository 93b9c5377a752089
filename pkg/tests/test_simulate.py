import math
from dataclasses import replace

import numpy as np
import pytest

from canyonsim.errors import ParameterError
from canyonsim.geometry import empty_canyon
from canyonsim.simulate import (
    ReceptionMode,
    ScenarioConfig,
    classify,
    derive_seed,
    environment_geometry,
    run_environment,
    run_sweep,
    vehicle_position,
)


def test_classify():
    assert classify(True, False) is ReceptionMode.SPLOS
    assert classify(True, True) is ReceptionMode.MP
    assert classify(False, True) is ReceptionMode.NLOS
    assert classify(False, False) is ReceptionMode.BLOCKED
    assert not ReceptionMode.BLOCKED.received
    assert ReceptionMode.NLOS.received


def test_loop_closes():
    cfg = ScenarioConfig()
    p0, h0 = vehicle_position(0.0, cfg)
    p1, _ = vehicle_position(cfg.duration, cfg)
    assert np.allclose(p0, (-140.0, -140.0, 1.51))
    assert np.linalg.norm(p1 - p0) < 1e-9
    assert h0 == 0.0


def test_half_side_after_28_seconds():
    cfg = ScenarioConfig()
    p, _ = vehicle_position(28.0, cfg)
    assert np.allclose(p, (0.0, -140.0, 1.51))
    p, heading = vehicle_position(56.0 + 10.0, cfg)
    assert np.allclose(p, (140.0, -90.0, 1.51))
    assert heading == pytest.approx(math.pi / 2)


def test_antenna_height_constant():
    cfg = ScenarioConfig()
    assert cfg.antenna_height == pytest.approx(1.51)
    for t in np.linspace(0, cfg.duration, 37):
        assert vehicle_position(t, cfg)[0][2] == pytest.approx(1.51)


def test_vehicle_stays_on_road_midlines():
    cfg = ScenarioConfig()
    for t in np.arange(0, 224.0):
        x, y, _ = vehicle_position(t, cfg)[0]
        assert abs(abs(x) - 140.0) < 1e-9 or abs(abs(y) - 140.0) < 1e-9


def test_vehicle_time_out_of_range():
    with pytest.raises(ParameterError):
        vehicle_position(-1.0, ScenarioConfig())
    with pytest.raises(ParameterError):
        vehicle_position(225.0, ScenarioConfig())


def test_config_requires_closed_loop():
    with pytest.raises(ParameterError):
        ScenarioConfig(duration=200.0)
    ScenarioConfig(duration=112.0, vehicle_speed=10.0)


def test_config_round_trip():
    cfg = ScenarioConfig(master_seed=7, nu_sweep=(10.0, 20.0))
    assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ParameterError):
        ScenarioConfig.from_dict({"bogus": 1})
    with pytest.raises(ParameterError):
        ScenarioConfig.from_dict({"canyon": {"bogus": 1}})


def test_seed_derivation():
    assert derive_seed(42, 25.0) == derive_seed(42, 25.0)
    assert derive_seed(42, 25.0) != derive_seed(42, 30.0)
    assert derive_seed(42, 25.0) != derive_seed(43, 25.0)
    assert 0 <= derive_seed(2**64 - 1, 60.0) < 2**64


def test_environment_is_deterministic(small_config):
    a = run_environment(small_config, 25.0)
    b = run_environment(small_config, 25.0)
    assert a.observations == b.observations
    assert a.seed == environment_geometry(small_config, 25.0)[1]


def test_open_environment_has_more_single_path(small_config):
    def splos(run):
        return sum(o.mode is ReceptionMode.SPLOS for o in run.observations) / len(run.observations)

    assert splos(run_environment(small_config, 5.0)) > splos(run_environment(small_config, 60.0))


def test_empty_geometry_is_all_single_path(small_config):
    run = run_environment(small_config, 25.0, geometry=empty_canyon())
    assert run.observations
    assert all(o.mode is ReceptionMode.SPLOS for o in run.observations)
    assert all(not o.reflections for o in run.observations)


def test_roof_bounce_kept_without_filter(small_config):
    cfg = replace(small_config, min_delay_filter=0.0)
    run = run_environment(cfg, 25.0, geometry=empty_canyon())
    assert all(o.mode is ReceptionMode.MP for o in run.observations)
    delays = [e.delay_d for o in run.observations for e in o.reflections]
    assert max(delays) < 0.02


def test_observations_respect_mask(small_config):
    run = run_environment(small_config, 25.0)
    assert all(o.elevation_theta > small_config.trace_elevation_mask for o in run.observations)
    assert all(e.delay_d >= small_config.min_delay_filter for o in run.observations for e in o.reflections)


def test_sweep_composition_and_order(small_config):
    sweep = run_sweep(small_config)
    assert list(sweep) == [5.0, 25.0, 60.0]
    single = run_sweep(small_config, nus=[25.0])[25.0]
    assert single.observations == sweep[25.0].observations
    permuted = run_sweep(replace(small_config, nu_sweep=(60.0, 5.0, 25.0)))
    assert all(permuted[k].observations == sweep[k].observations for k in sweep)


def test_default_sweep_values():
    assert ScenarioConfig().nu_sweep == tuple(float(v) for v in range(5, 65, 5))


def test_parallel_sweep_matches_serial(small_config):
    serial = run_sweep(small_config, nus=[5.0, 60.0])
    parallel = run_sweep(small_config, nus=[5.0, 60.0], jobs=2)
    assert all(serial[k].observations == parallel[k].observations for k in serial)


def test_invalid_nu(small_config):
    with pytest.raises(ParameterError):
        run_environment(small_config, -5.0)
