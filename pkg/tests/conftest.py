import numpy as np
import pytest
from hypothesis import settings

from qergodic.hilbert import EnergySpectrum, MacroDecomposition, StateVector, UnitaryMatrix

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance_line():
    def record(criterion: str, passed: bool, detail: str):
        _ACCEPTANCE[criterion] = f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
            terminalreporter.write_line(_ACCEPTANCE[key])


@pytest.fixture
def two_level():
    """E = (0, 1), macro basis (phi_1 +- phi_2)/sqrt 2, psi_0 = (1, 1)/sqrt 2."""
    W = UnitaryMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    return {
        "spectrum": EnergySpectrum([0.0, 1.0]),
        "decomp": MacroDecomposition((1, 1), W),
        "state": StateVector.normalized([1, 1]),
        "gap": 1.0,
    }
