import sys

import numpy as np
import pytest

from fockcascade.scheme import BeamSplitter


def random_bs(rng, lo=0.3, hi=0.9):
    return BeamSplitter.from_tsq(rng.uniform(lo, hi), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi))


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim, rank=3):
    vs = [random_state(rng, dim) for _ in range(rank)]
    w = rng.dirichlet(np.ones(rank))
    return sum(p * np.outer(v, v.conj()) for p, v in zip(w, vs))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number][1])
