import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rpssps import kernels  # noqa: E402

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


def corpus(n, seed=42, w_lo=2, w_hi=1000, factor=100):
    """The seeded fuzz corpus shared by acceptance and property tests."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        w = rng.randint(w_lo, w_hi)
        p = rng.randint(w, factor * w)
        out.append((w, p, rng.randrange(p)))
    return out


@pytest.fixture(scope="module", params=BACKENDS)
def backend(request):
    return kernels.use_backend(request.param)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
