import numpy as np
import pytest

import spinrephase as sr


@pytest.fixture(scope="session")
def default_grid() -> sr.EnergyGrid:
    """The converged dynamics grid used by the run configs."""
    return sr.build_uniform(256, 18.0)


@pytest.fixture(scope="session")
def gauss48() -> sr.EnergyGrid:
    return sr.build_gauss(48)


@pytest.fixture()
def transverse(default_grid) -> sr.SpinField:
    return sr.SpinField.initial_transverse(len(default_grid))


def pair_grid() -> sr.EnergyGrid:
    """Equal-weight two-node grid with the correct first moment (2 + 4)/2 = 3."""
    return sr.EnergyGrid(
        np.array([2.0, 4.0]), np.array([0.5, 0.5]), sr.GridScheme.CUSTOM
    )
