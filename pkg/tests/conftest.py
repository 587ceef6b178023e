import pathlib
import sys

import numpy as np
import pytest

root_dir = pathlib.Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(root_dir))


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: full synthetic training runs (deselect with -m "not slow")')


@pytest.fixture
def rng():
    return np.random.default_rng(20170425)
