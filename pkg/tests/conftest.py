import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_antisymmetric(n, rng, complex_entries=True):
    m = rng.normal(size=(n, n))
    if complex_entries:
        m = m + 1j * rng.normal(size=(n, n))
    return m - m.T


def assert_sorted_close(a, b, tol, decimals=9):
    """Compare two complex multisets after deterministic sorting."""
    a = np.asarray(a)
    b = np.asarray(b)
    assert a.shape == b.shape
    ka = np.lexsort((np.round(a.imag, decimals), np.round(a.real, decimals)))
    kb = np.lexsort((np.round(b.imag, decimals), np.round(b.real, decimals)))
    assert np.abs(a[ka] - b[kb]).max() <= tol
