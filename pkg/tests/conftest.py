import math

import numpy as np
import pytest
from hypothesis import strategies as st

from pg_orderlab import instances
from pg_orderlab.bandit import BanditInstance, InstanceError


def sym_eig2(a, b, c):
    """Closed-form eigenvalues (ascending) of [[a, b], [b, c]]."""
    mean = 0.5 * (a + c)
    rad = math.hypot(0.5 * (a - c), b)
    return mean - rad, mean + rad


@pytest.fixture(params=instances.names())
def named(request):
    return instances.builtin(request.param)


@pytest.fixture
def ex1():
    return instances.builtin("example1").instance


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Subnormal-scale coordinates make tie and rank tolerances meaningless; keep 0 or |x| >= 1e-3.
small_floats = st.floats(-5, 5, allow_nan=False, allow_infinity=False).filter(lambda x: x == 0 or abs(x) >= 1e-3)


@st.composite
def bandit_instances(draw, max_K=6, d=None):
    K = draw(st.integers(2 if d is None else d + 1, max_K))
    d = draw(st.integers(1, K - 1)) if d is None else d
    X = np.array(draw(st.lists(st.lists(small_floats, min_size=d, max_size=d), min_size=K, max_size=K)))
    r = np.array(draw(st.lists(small_floats, min_size=K, max_size=K)))
    try:
        return BanditInstance(X, r)
    except InstanceError:
        from hypothesis import assume

        assume(False)


@st.composite
def instance_and_theta(draw, max_K=6):
    inst = draw(bandit_instances(max_K))
    theta = np.array(draw(st.lists(small_floats, min_size=inst.d, max_size=inst.d)))
    return inst, theta


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda kv: int(kv[0][1:])):
            terminalreporter.write_line(line)
