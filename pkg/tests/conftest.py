import json
from collections import defaultdict
from pathlib import Path

import hypothesis
import numpy as np
import pytest

from fdrkit.scores import ScoreSet

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=400, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")
    config.addinivalue_line("markers", "slow: full-size synthetic runs (seconds each)")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        n, title = marker.args
        _criteria[(n, title)].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), results in sorted(_criteria.items()):
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        line = f"criterion {n} [{title}]: {'PASS' if ok else 'FAIL'} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def published_tables():
    return json.loads((FIXTURES / "published_tables.json").read_text())


def make_scoreset(rows):
    """rows: iterable of (enroll, probe, score, genuine)."""
    e, p, s, g = zip(*rows)
    return ScoreSet.from_arrays(e, p, s, g)


@pytest.fixture
def tiny():
    """Two demographics with hand-countable rates at tau = 0.5."""
    return make_scoreset([
        ("a", "a", 0.9, True), ("a", "a", 0.4, True),
        ("b", "b", 0.8, True), ("b", "b", 0.7, True),
        ("a", "a", 0.6, False), ("a", "a", 0.1, False),
        ("b", "b", 0.2, False), ("b", "b", 0.3, False),
        ("a", "b", 0.55, False), ("b", "a", 0.05, False),
    ])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
