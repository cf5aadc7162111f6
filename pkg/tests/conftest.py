import os
import random

import pytest
from hypothesis import HealthCheck, settings

from toricflex.serialize import catalog_entry, variety_from_json

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TORIC = ("a2", "a3", "x21", "x31", "quadric3")
SURFACES = ("susp_x2", "susp_x2mx", "susp_x3px")
SUSPENSIONS = SURFACES + ("susp_a2", "tower2")

_CACHE = {}


def load(name):
    if name not in _CACHE:
        _CACHE[name] = variety_from_json(catalog_entry(name))
    return _CACHE[name]


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture(params=TORIC)
def toric(request):
    return load(request.param)


@pytest.fixture(params=SUSPENSIONS)
def susp(request):
    return load(request.param)


_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion number and summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = _MARKERS.get(report.nodeid)
    if marker:
        if _RESULTS.get(marker) != "FAIL":
            _RESULTS[marker] = "PASS" if report.passed else "FAIL"


_MARKERS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _MARKERS[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (n, text), verdict in sorted(_RESULTS.items()):
        terminalreporter.write_line(f"criterion {n}: {verdict}  {text}")
