import numpy as np
import pytest

from graphon_signal import GraphonSignal

ACCEPTANCE_LINES = []


def record_acceptance(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_graphon(rng, m):
    W = rng.random((m, m))
    return np.triu(W) + np.triu(W, 1).T


def random_gs(rng, m, d=1, r=1.0):
    return GraphonSignal.from_arrays(random_graphon(rng, m), rng.uniform(-r, r, (m, d)), r)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
