import numpy as np
import pytest

from stlsbem.kernel_ops import PiecewiseConstant, SideFunction
from stlsbem.mesh import LateralMesh, TemporalMesh


def random_temporal(rng, T, n_max=10):
    k = int(rng.integers(1, n_max + 1))
    inner = np.sort(rng.uniform(0.0, T, k - 1))
    nodes = np.concatenate([[0.0], inner, [T]])
    # guard against (vanishingly unlikely) coincident draws
    if np.any(np.diff(nodes) <= 1e-9 * T):
        return TemporalMesh([0.0, T])
    return TemporalMesh(nodes)


def random_mesh(rng, T=1.0, L=1.0, n_max=10):
    return LateralMesh(random_temporal(rng, T, n_max), random_temporal(rng, T, n_max), L)


def random_density(rng, mesh):
    return PiecewiseConstant.from_vector(mesh, rng.standard_normal(mesh.dofs))


def linear_data(L=3.0):
    """g(0, t) = t on side 0 and zero on side L."""
    return SideFunction(values=(lambda t: t, lambda t: 0.0 * t),
                        derivatives=(lambda t: 1.0 + 0.0 * t, lambda t: 0.0 * t),
                        name="linear")


ZERO = SideFunction(values=(lambda t: 0.0 * t, lambda t: 0.0 * t),
                    derivatives=(lambda t: 0.0 * t, lambda t: 0.0 * t), name="zero")


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
