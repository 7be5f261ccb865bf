import numpy as np
import pytest

from wentzell_lab.coefficients import ProblemData
from wentzell_lab.geometry import build_disk_mesh, build_interval_mesh, build_square_mesh
from wentzell_lab.spectral import build_operator, solve_spectrum


@pytest.fixture(scope="session")
def interval64():
    return build_interval_mesh(0.0, 1.0, 64)


@pytest.fixture(scope="session")
def square8():
    return build_square_mesh(8)


@pytest.fixture(scope="session")
def disk():
    return build_disk_mesh(3, 12)


@pytest.fixture(scope="session")
def meshes(interval64, square8, disk):
    return {"interval": interval64, "square": square8, "disk": disk}


@pytest.fixture(scope="session")
def spectra(meshes):
    """Full spectra for gamma = 0, 1, -1 on each small mesh."""
    out = {}
    for name, mesh in meshes.items():
        for g in (0.0, 1.0, -1.0):
            op = build_operator(mesh, ProblemData(gamma=g))
            out[name, g] = solve_spectrum(op)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
