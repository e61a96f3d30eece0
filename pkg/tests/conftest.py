import pytest

from bevsim import default_config, load_udds
from bevsim.params import with_overrides


@pytest.fixture(scope="session")
def config():
    return default_config()


@pytest.fixture(scope="session")
def udds():
    return load_udds()


@pytest.fixture(scope="session")
def small_battery_config(config):
    # 4 kWh keeps depletion runs to a few cycles; everything else default.
    return with_overrides(config, battery={"capacity_energy": 4.0})
