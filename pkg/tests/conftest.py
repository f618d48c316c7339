import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(d, rng, complex_case=False):
    if complex_case:
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    else:
        A = rng.standard_normal((d, d))
    return (A + A.conj().T) / 2
