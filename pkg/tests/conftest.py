import math

import numpy as np
import pytest
from hypothesis import strategies as st

from carpetdim import carpet_from_counts, full_torus, validate_carpet


@pytest.fixture
def torus():
    return full_torus(2, 4)


@pytest.fixture
def fig5():
    return carpet_from_counts(3, 8, [5, 2, 8])


@pytest.fixture
def small():
    # D = 3, tau = 2
    return carpet_from_counts(2, 4, [2, 1])


@st.composite
def carpets(draw, max_N=4, max_M=9, max_D=20):
    N = draw(st.integers(2, max_N))
    M = draw(st.integers(N + 1, max_M))
    cols = draw(st.lists(st.integers(1, N), min_size=1, max_size=N, unique=True))
    rows = []
    budget = max_D
    for a in sorted(cols):
        if budget <= 0:
            break
        fib = draw(st.lists(st.integers(1, M), min_size=1, max_size=min(M, budget), unique=True))
        budget -= len(fib)
        rows.append({"column": a, "fibers": sorted(fib)})
    return validate_carpet({"N": N, "M": M, "rows": rows})


def random_carpet(rng, max_D=20, max_N=5, max_M=12):
    """Carpet with at least two distinct fiber counts."""
    while True:
        N = int(rng.integers(2, max_N + 1))
        M = int(rng.integers(N + 1, max_M + 1))
        R = int(rng.integers(2, N + 1))
        T = [int(t) for t in rng.integers(1, M + 1, size=R)]
        if sum(T) <= max_D and len(set(T)) > 1:
            return carpet_from_counts(N, M, T)


def random_prob(rng, D, sparsity=0.3):
    w = rng.dirichlet(np.full(D, 0.7))
    w[rng.random(D) < sparsity] = 0.0
    if w.sum() == 0:
        w[0] = 1.0
    return w / w.sum()


LOG = math.log


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
