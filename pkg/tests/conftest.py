import numpy as np
import pytest

from iidsteady.models import ExampleSpec, build_example


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(rng, d, scale=1.0):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (m + m.conj().T) / 2


def random_density(rng, d, regular=True):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = m @ m.conj().T
    if regular:
        rho += 0.1 * np.eye(d)
    return rho / np.trace(rho).real


def random_superselected_density(rng, space):
    """Random density matrix commuting with the site number operator."""
    d = space.dim
    diag = np.asarray(space.number_diag)
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    mask = np.equal.outer(diag, diag)
    m = np.where(mask, m, 0.0)
    rho = m @ m.conj().T + 0.05 * np.eye(d)
    return rho / np.trace(rho).real


@pytest.fixture
def example1():
    return build_example(ExampleSpec(id=1, n=3, params={"b": 1.0, "gamma": 2.0}))


@pytest.fixture
def example2():
    return build_example(ExampleSpec(id=2, n=3, params={"b": 0.3, "gamma": 1.0, "r": 1.0}))


@pytest.fixture
def example3():
    return build_example(ExampleSpec(id=3, n=3))


@pytest.fixture
def example4():
    return build_example(ExampleSpec(id=4, n=3))


@pytest.fixture
def example5():
    return build_example(ExampleSpec(id=5, n=2))


@pytest.fixture
def example6():
    return build_example(ExampleSpec(id=6, n=3))
