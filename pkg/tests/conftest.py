import random

import pytest

from agtr.core import build_clustering

_ACCEPTANCE: dict = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    key = marker.args[0]
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        ok = call.excinfo is None
        prev = _ACCEPTANCE.get(key, (True, marker.args[1]))
        _ACCEPTANCE[key] = (prev[0] and ok, marker.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split("-")[-1])):
        ok, title = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{key:>6}  {'PASS' if ok else 'FAIL'}  {title}")


def random_partition(rng: random.Random, ids, k: int, prefix: str = "c"):
    return build_clustering((sid, f"{prefix}{rng.randrange(k)}") for sid in ids)


@pytest.fixture
def fig1():
    """Eight samples: C = {1..4},{5..8}; D = {1,2},{3,4},{5..8}."""
    c = build_clustering([(i, "c1") for i in range(1, 5)] + [(i, "c2") for i in range(5, 9)])
    d = build_clustering([(1, "d1"), (2, "d1"), (3, "d2"), (4, "d2")] + [(i, "d3") for i in range(5, 9)])
    return c, d
