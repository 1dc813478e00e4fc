import numpy as np
import pytest

from trustrec.graph import build_rating_graph, build_trust_graph
from trustrec.ingest import Dataset

# u0:{o0,o1}, u1:{o1,o2}, u2:{o0,o2,o3}; u0 trusts u2
T1_LINKS = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 0), (2, 2), (2, 3)]
T1_TRUST = [(0, 2)]


@pytest.fixture
def t1():
    return build_rating_graph(T1_LINKS, 3, 4)


@pytest.fixture
def t1_trust():
    return build_trust_graph(T1_TRUST, 3)


@pytest.fixture
def t1_dataset(t1, t1_trust):
    return Dataset(t1, t1_trust, ["u1", "u2", "u3"], ["o1", "o2", "o3", "o4"])


def random_instance(rng, max_m=8, max_n=8, p=None, trust_p=None):
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    p = rng.uniform(0.1, 0.7) if p is None else p
    a = rng.random((m, n)) < p
    links = [(int(u), int(o)) for u, o in zip(*np.nonzero(a))]
    tp = rng.uniform(0.0, 0.6) if trust_p is None else trust_p
    b = rng.random((m, m)) < tp
    edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(b)) if i != j]
    return m, n, links, edges


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance summary ----------------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _ACCEPTANCE[name] = report.outcome
    elif report.when == "teardown" and report.failed:
        _ACCEPTANCE[name] = "failed"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE.items():
        tag = {"passed": "PASS", "failed": "FAIL"}.get(outcome, "SKIP")
        terminalreporter.write_line(f"{tag}  {name.removeprefix('test_')}")
