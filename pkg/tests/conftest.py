import numpy as np
import pytest

from multiclipper.association import AffinityMatrix


def planted_graph(n, k, p, seed):
    """Random binary affinity with a planted k-clique; returns (matrix, sorted clique)."""
    rng = np.random.default_rng(seed)
    a = np.triu(rng.random((n, n)) < p, 1)
    a = a | a.T
    idx = np.sort(rng.choice(n, k, replace=False))
    a[np.ix_(idx, idx)] = True
    m = a.astype(float)
    np.fill_diagonal(m, 1.0)
    return AffinityMatrix.from_matrix(m), tuple(int(i) for i in idx)


def random_binary_affinity(n, p, seed):
    rng = np.random.default_rng(seed)
    a = np.triu(rng.random((n, n)) < p, 1)
    m = (a | a.T).astype(float)
    np.fill_diagonal(m, 1.0)
    return AffinityMatrix.from_matrix(m)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, name: str, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d} [{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
