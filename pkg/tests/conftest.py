import numpy as np
import pytest

from rotorgauge.core import GasSpec, GaugeSpec, MagnetSpec


@pytest.fixture
def reference_magnet():
    """24 um NdFeB sphere used for the main pressure-calibration run."""
    return MagnetSpec(radius=24e-6, density=7430.0)


@pytest.fixture
def helium_cold():
    return GasSpec.helium(temperature=4.2)


@pytest.fixture
def gauge():
    return GaugeSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
