import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def report():
    """Record one acceptance verdict line; printed again in the terminal summary."""
    def record(criterion, ok, detail):
        line = f"{criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split(":")[0][1:].split(".")[0])):
            terminalreporter.write_line(line)


def random_simplex(gen, n):
    w = gen.dirichlet(np.ones(n))
    return w / w.sum()
