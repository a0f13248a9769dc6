import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from casimir_sta.moore import RecursiveMooreFunction, WkbMooreFunction  # noqa: E402
from casimir_sta.sta import EffectiveTrajectory  # noqa: E402
from casimir_sta.trajectory import SmoothstepTrajectory  # noqa: E402


@pytest.fixture(scope="session")
def ref():
    """Compression 1 -> 0.7 over tau = 1."""
    return SmoothstepTrajectory.from_eps(1.0, 0.3, 1.0)


@pytest.fixture(scope="session")
def eff(ref):
    return EffectiveTrajectory(ref)


@pytest.fixture(scope="session")
def R_ref(ref):
    return RecursiveMooreFunction(ref)


@pytest.fixture(scope="session")
def R_wkb(ref):
    return WkbMooreFunction(ref)


@pytest.fixture(scope="session")
def R_eff(eff):
    return RecursiveMooreFunction(eff, check=False)
