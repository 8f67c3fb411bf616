import json
import os
import time

import numpy as np
import pytest

from cylgraph import harness

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIGS = os.path.join(ROOT, "configs")
DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")

# criterion number -> (title, list of (test id, passed, detail))
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        num, title = marker.args
        detail = getattr(item, "_criterion_detail", "")
        _CRITERIA.setdefault(num, (title, []))[1].append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, results = _CRITERIA[num]
        ok = all(p for _, p, _ in results)
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}")
        for name, passed, detail in results:
            mark = "ok  " if passed else "FAIL"
            line = f"    {mark} {name}"
            if detail:
                line += f": {detail}"
            terminalreporter.write_line(line)


@pytest.fixture
def detail(request):
    """Attach a one-line measurement to the criterion summary."""

    def set_detail(text):
        request.node._criterion_detail = text

    return set_detail


def load_config(name):
    with open(os.path.join(CONFIGS, name)) as fh:
        return json.load(fh)


# wall-clock seconds of the session sweeps, keyed by config name
SWEEP_SECONDS = {}


def timed_sweep(name, **overrides):
    cfg = harness.SweepConfig.from_dict({**load_config(name), **overrides})
    start = time.perf_counter()
    report = harness.run_sweep(cfg)
    if not overrides:
        SWEEP_SECONDS[name] = time.perf_counter() - start
    return report


@pytest.fixture(scope="session")
def interval_sweep():
    return timed_sweep("interval_sweep.json")


@pytest.fixture(scope="session")
def cylinder_sweep():
    return timed_sweep("cylinder_sweep.json")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
