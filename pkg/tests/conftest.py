import numpy as np
import pytest

from canyonsim.simulate import ScenarioConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_config():
    # one repetition keeps simulation tests quick
    return ScenarioConfig(repetitions=1, nu_sweep=(5.0, 25.0, 60.0))


@pytest.fixture(scope="session")
def default_sweep(tmp_path_factory):
    """The default sweep, run once per session and written to disk."""
    from canyonsim.pipeline import run_pipeline, write_result

    out = tmp_path_factory.mktemp("sweep")
    result = run_pipeline(ScenarioConfig())
    write_result(result, out)
    return out, result


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import REPORT

    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
