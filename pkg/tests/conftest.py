import numpy as np
import pytest

from bindkit.nn import autograd as ag


@pytest.fixture
def f64():
    """Run a test under float64 tensors (finite-difference verification mode)."""
    with ag.using_dtype(np.float64):
        yield
