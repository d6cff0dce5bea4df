import numpy as np
import pytest

from lindblad_lab.model import random_model


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def models(rng):
    """Ten overdamped and ten underdamped Lindblad-valid models."""
    return [random_model(rng, "Overdamped") for _ in range(10)] + [
        random_model(rng, "Underdamped") for _ in range(10)
    ]


def rel_close(a, b, rtol, atol=0.0):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b)))


# ---------------------------------------------------------------------------
# acceptance criteria: one pass/fail line per criterion in the summary

_criteria: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    n, title = mark.args
    ok = rep.passed and _criteria.get(n, (title, True))[1]
    if rep.when == "call" or not rep.passed:
        _criteria[n] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
