import numpy as np
import pytest

from equistream_extension import import_extensions

import_extensions()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
