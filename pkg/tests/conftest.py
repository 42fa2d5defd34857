import pytest

from qite.pauli import build_heisenberg, diagonalize, normalize
from qite.states import basis_state


@pytest.fixture(scope="session")
def h4():
    """The normalized 4-qubit antiferromagnetic chain used throughout."""
    return normalize(build_heisenberg(4))


@pytest.fixture(scope="session")
def spec4(h4):
    return diagonalize(h4)


@pytest.fixture(scope="session")
def phi0():
    return basis_state(4, 0)
