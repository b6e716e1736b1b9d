import numpy as np
import pytest

from matherkit import ChannelModelSpec, HomologyBudget, build_channel_model


@pytest.fixture(scope="session")
def spec2():
    return ChannelModelSpec(n=2).resolved()


@pytest.fixture(scope="session")
def model2(spec2):
    return build_channel_model(spec2)


@pytest.fixture(scope="session")
def spec3():
    return ChannelModelSpec(n=3).resolved()


@pytest.fixture(scope="session")
def model3(spec3):
    return build_channel_model(spec3)


@pytest.fixture(scope="session")
def drift_spec():
    return ChannelModelSpec(n=3, variant="drift", delta=(0.04,)).resolved()


@pytest.fixture(scope="session")
def drift_model(drift_spec):
    return build_channel_model(drift_spec)


@pytest.fixture(scope="session")
def pendulum_model():
    return build_channel_model(ChannelModelSpec(n=1))


@pytest.fixture(scope="session")
def budget2():
    return HomologyBudget()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
