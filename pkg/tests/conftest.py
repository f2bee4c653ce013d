import numpy as np
import pytest

from ddfv.mesh import build_ddfv, gen_kershaw, gen_quad_fvca, gen_uniform_quad


@pytest.fixture(scope="session")
def uniform2():
    return build_ddfv(gen_uniform_quad(2))


@pytest.fixture(scope="session")
def uniform4():
    return build_ddfv(gen_uniform_quad(4))


@pytest.fixture(scope="session")
def quad5():
    return build_ddfv(gen_quad_fvca(5, 0.1))


@pytest.fixture(scope="session")
def quad8():
    return build_ddfv(gen_quad_fvca(8, 0.1))


@pytest.fixture(scope="session")
def kershaw8():
    return build_ddfv(gen_kershaw(8))


@pytest.fixture(scope="session")
def mesh_zoo(uniform4, quad5, kershaw8):
    return [("uniform4", uniform4), ("quad5", quad5), ("kershaw8", kershaw8)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
