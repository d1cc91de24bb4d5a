import sys

import numpy as np
import pytest

from cdo_lab import DiagonalForm, get_group
from cdo_lab.groups import GROUP_IDS

ALL_GROUPS = list(GROUP_IDS)


@pytest.fixture(params=ALL_GROUPS)
def group(request):
    return get_group(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def srw(group):
    G = get_group(group) if isinstance(group, str) else group
    return DiagonalForm.from_coefficients(G, {s: 1 / len(G.generators) for s in G.generators})


def brute_force_matrix(f, ball):
    """A(x, y) = m_{x y^-1}(y) by direct element arithmetic."""
    G = f.group
    n = len(ball)
    A = np.zeros((n, n), dtype=complex)
    for i, x in enumerate(ball.elements):
        for j, y in enumerate(ball.elements):
            z = G.multiply(x, G.invert(y))
            if z in f.terms:
                A[i, j] = f.terms[z](y)
    return A


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
