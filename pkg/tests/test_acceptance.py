"""Acceptance criteria, each checked at its stated tolerance.

The default sweep runs once per session; criterion 8 reruns it from the
manifest. One PASS/FAIL line per criterion is printed in the terminal
summary (and immediately with ``-s``).
"""
import pytest

from canyonsim.verify import run_verification

CRITERIA = ["1", "2", "3a", "3b", "3c", "4a", "4b", "5a", "5b", "6", "7", "8", "9", "T"]

REPORT: list[str] = []


@pytest.fixture(scope="module")
def results(default_sweep):
    out, _ = default_sweep
    return {r.key: r for r in run_verification(out, rerun=True)}


def test_every_criterion_evaluated(results):
    assert sorted(results) == sorted(CRITERIA)


@pytest.mark.parametrize("key", CRITERIA)
def test_criterion(results, key):
    r = results[key]
    line = r.line()
    REPORT.append(line)
    print(line)
    assert r.passed, line
