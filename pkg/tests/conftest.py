import numpy as np
import pytest

from ssprkse import kernels
from ssprkse.grid import Boundary, Grid, VectorField


@pytest.fixture(params=kernels.BACKENDS)
def backend(request):
    old = kernels.get_backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(old)


@pytest.fixture
def periodic4():
    return Grid(4, 4, 1.0, 1.0, Boundary.PERIODIC)


def uniform_vector(grid, a, b, lead=()):
    return VectorField(np.full(lead + grid.u_shape, float(a)), np.full(lead + grid.v_shape, float(b)))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = {}


def record(n, title, ok, detail=""):
    line = f"criterion {n:>2} [{title}]: {'PASS' if ok else 'FAIL'}" + (f"  {detail}" if detail else "")
    ACCEPTANCE[n] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
