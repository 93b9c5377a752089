import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canyonsim.analysis import (
    PUBLISHED_MODEL,
    QuadraticModel,
    fit_gamma,
    fit_quadratic,
    estimate_median_delay,
    histogram_delays,
    median,
    rms_error,
    summarize_environment,
)
from canyonsim.errors import DegenerateDistributionError, InsufficientDataError, ParameterError, SingularFitError
from canyonsim.geometry import SurfaceKind
from canyonsim.raytrace import ReflectionEvent
from canyonsim.simulate import EpochObservation, ReceptionMode, run_environment


def obs(epoch, mode, delays=()):
    refl = tuple(ReflectionEvent(0, epoch, (0.0, 0.0, 0.0), d, 0, SurfaceKind.BUILDING_WALL) for d in delays)
    return EpochObservation(epoch, 0, 0, mode, refl, 30.0)


def test_median():
    assert median([3.0, 1.0, 2.0]) == 2.0
    assert median([4.0, 1.0, 2.0, 3.0]) == 2.5
    with pytest.raises((ParameterError, InsufficientDataError)):
        median([])


def test_all_blocked_stream():
    stream = [obs(t, ReceptionMode.BLOCKED) for t in range(5)]
    s = summarize_environment(stream, 25.0, 5.0)
    assert s.mean_received_Ns == 0.0
    assert [s.mode_fractions[m] for m in ("SPLOS", "MP", "NLOS", "BLOCKED")] == [0.0, 0.0, 0.0, 1.0]
    assert s.median_delay_dm is None


def test_hand_tallied_stream():
    stream = [
        obs(0, ReceptionMode.SPLOS), obs(0, ReceptionMode.MP, [4.0]), obs(0, ReceptionMode.BLOCKED),
        obs(1, ReceptionMode.NLOS, [10.0, 2.0]), obs(1, ReceptionMode.SPLOS),
        obs(2, ReceptionMode.BLOCKED),
    ]
    s = summarize_environment(stream, 25.0, 5.0)
    assert s.mode_fractions == {"SPLOS": 2 / 6, "MP": 1 / 6, "NLOS": 1 / 6, "BLOCKED": 2 / 6}
    assert s.mean_received_Ns == pytest.approx(4 / 3)
    assert s.median_delay_dm == 4.0
    assert s.reflections_per_epoch == 1.0
    assert s.epoch_count == 3


def test_empty_stream_rejected():
    with pytest.raises(ParameterError):
        summarize_environment([], 25.0, 5.0)


def test_open_environment_has_longer_delays(small_config):
    lo = summarize_environment(run_environment(small_config, 5.0).observations, 5.0, 5.0)
    hi = summarize_environment(run_environment(small_config, 60.0).observations, 60.0, 5.0)
    assert lo.median_delay_dm > hi.median_delay_dm


@pytest.mark.parametrize("shape,scale", [(3.0, 1.0), (1.0, 2.0), (0.5, 4.0), (12.0, 0.3)])
def test_gamma_recovers_parameters(shape, scale):
    x = np.random.default_rng(11).gamma(shape, scale, size=100_000)
    k, theta = fit_gamma(x)
    assert k == pytest.approx(shape, rel=0.05)
    assert theta == pytest.approx(scale, rel=0.05)


def test_gamma_exponential():
    x = np.random.default_rng(12).exponential(2.0, size=100_000)
    k, theta = fit_gamma(x)
    assert k == pytest.approx(1.0, rel=0.05)
    assert theta == pytest.approx(2.0, rel=0.05)


def test_gamma_matches_scipy():
    from scipy import stats

    x = np.random.default_rng(13).gamma(2.5, 3.0, size=5000)
    k, theta = fit_gamma(x)
    k_ref, _, theta_ref = stats.gamma.fit(x, floc=0.0)
    assert k == pytest.approx(k_ref, rel=1e-4)
    assert theta == pytest.approx(theta_ref, rel=1e-4)


@pytest.mark.parametrize("data", [[], [1.0], [2.0, 2.0, 2.0], [1.0, 0.0, 2.0], [1.0, -1.0]])
def test_gamma_degenerate(data):
    with pytest.raises((DegenerateDistributionError, InsufficientDataError, ParameterError)):
        fit_gamma(data)


def test_quadratic_exact():
    m = fit_quadratic([(x, x * x) for x in (1, 2, 3, 4)])
    assert (m.c2, m.c1, m.c0) == pytest.approx((1.0, 0.0, 0.0), abs=1e-9)
    assert m.rms_error == pytest.approx(0.0, abs=1e-9)
    m = fit_quadratic([(x, 2 * x + 1) for x in (0, 1, 2, 5)])
    assert (m.c2, m.c1, m.c0) == pytest.approx((0.0, 2.0, 1.0), abs=1e-9)


def test_quadratic_singular():
    with pytest.raises(SingularFitError):
        fit_quadratic([(1, 1), (1, 2), (2, 3)])
    with pytest.raises(SingularFitError):
        fit_quadratic([(1, 1), (2, 2)])


@settings(max_examples=50, deadline=None)
@given(c=st.tuples(*[st.floats(-5, 5)] * 3))
def test_quadratic_recovers_coefficients(c):
    xs = np.linspace(3.0, 8.0, 12)
    m = fit_quadratic([(x, c[0] * x * x + c[1] * x + c[2]) for x in xs])
    assert (m.c2, m.c1, m.c0) == pytest.approx(c, abs=1e-7)


def test_published_model_values():
    assert estimate_median_delay(PUBLISHED_MODEL, 5.0) == pytest.approx(15.57, abs=1e-9)
    assert estimate_median_delay(PUBLISHED_MODEL, 8.0) == pytest.approx(21.84, abs=1e-9)
    assert PUBLISHED_MODEL(0.0) == pytest.approx(-4.08)
    assert estimate_median_delay(PUBLISHED_MODEL, 0.0) == 0.0
    with pytest.raises(ParameterError):
        estimate_median_delay(PUBLISHED_MODEL, -1.0)


def test_model_round_trip():
    m = QuadraticModel(0.1, 2.0, -3.0, 0.5, ((1.0, 2.0),))
    assert QuadraticModel.from_dict(m.to_dict()) == m


def test_rms():
    assert rms_error([1, 2, 3], [1, 2, 3]) == 0.0
    assert rms_error([2, 3, 4], [1, 2, 3]) == pytest.approx(1.0)
    assert rms_error([1, 2, 3], [2, 4, 3]) == pytest.approx(1.2910, abs=1e-4)
    assert rms_error([1, 2, 3], [2, 4, 3]) == pytest.approx(math.sqrt(5 / 3))
    with pytest.raises(ParameterError):
        rms_error([], [])
    with pytest.raises(ParameterError):
        rms_error([1], [1, 2])


def test_histogram_empty():
    h = histogram_delays([], 10.0, 100.0)
    assert np.all(h.density == 0.0)
    assert h.overflow == 0
    assert h.density.size == 10


def test_histogram_single():
    h = histogram_delays([50.0], 10.0, 100.0)
    assert h.density[5] == pytest.approx(0.1)
    assert np.count_nonzero(h.density) == 1
    assert (h.bin_low[5], h.bin_high[5]) == (50.0, 60.0)


def test_histogram_overflow():
    h = histogram_delays([5.0, 100.0, 150.0], 10.0, 100.0)
    assert h.overflow == 2
    assert np.sum(h.density) * 10.0 == pytest.approx(1 / 3)


def test_histogram_uniform_is_flat():
    n = 100_000
    d = np.random.default_rng(4).uniform(0.0, 100.0, n)
    h = histogram_delays(d, 5.0, 100.0)
    p = 0.05
    counts = h.density * n * 5.0
    assert np.all(np.abs(counts - n * p) < 3.0 * math.sqrt(n * p * (1 - p)))


def test_histogram_validation():
    with pytest.raises(ParameterError):
        histogram_delays([1.0], 0.0, 10.0)
