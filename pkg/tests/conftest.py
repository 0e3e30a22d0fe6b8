import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gsample.synthetic import path_graph, toy_graph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def toy():
    return toy_graph()


@pytest.fixture
def p3():
    return path_graph(3)


def write_lines(path, lines):
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return path


@pytest.fixture
def edge_file(tmp_path):
    def make(lines, name="g.el"):
        return write_lines(tmp_path / name, lines)

    return make


def frequencies(values, n):
    return np.bincount(np.asarray(values, dtype=np.int64), minlength=n) / len(values)


# --- acceptance criterion reporting ----------------------------------------

_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number, title = marker.args
    ok = rep.passed and rep.when == "call"
    prev = _CRITERIA.get(number, (title, True))[1]
    _CRITERIA[number] = (title, prev and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {title}")
