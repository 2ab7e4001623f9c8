import numpy as np
import pytest

from enhancedpu.datamodel import Dataset
from enhancedpu.synth import generate, paper_spec

TRUE_DIRECTION = np.array([-1.0, 1.0, 1.0])


def central_difference(f, x, h=1e-5):
    """Independent finite-difference gradient of scalar ``f`` at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def rel_err(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300))


def random_pu(rng, n=None, p=None):
    """Small random PU dataset with both label values present."""
    n = n or int(rng.integers(10, 60))
    p = p if p is not None else int(rng.integers(1, 5))
    X = rng.normal(size=(n, p))
    s = (rng.random(n) < 0.4).astype(int)
    s[0], s[1] = 1, 0
    return Dataset(X, s)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def paper_c06_n5000():
    return [generate(paper_spec(0.6, 5000, seed)) for seed in range(20)]


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion.

    Lines are printed immediately and repeated in the terminal summary so
    they stay visible when pytest captures output.
    """

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
