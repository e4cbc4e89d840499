import numpy as np
import pytest

import slaglab
from slaglab.config import SuiteConfig
from slaglab.event import EventMessages


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


@pytest.fixture
def config(tmp_path):
    return SuiteConfig().with_overrides(out=str(tmp_path / 'out'))


@pytest.fixture(scope='session')
def orbifold():
    return slaglab.orbifold.Orbifold()


@pytest.fixture
def events():
    return EventMessages()
