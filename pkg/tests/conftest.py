import numpy as np
import pytest

from tiltlab.params import VehicleParams


@pytest.fixture
def nominal() -> VehicleParams:
    return VehicleParams().validate()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
