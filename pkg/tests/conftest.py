import pytest

from dms.fixtures import (
    genus_surface,
    pillow,
    projective_plane6,
    tetrahedron,
    torus7,
    tree_cotree_field,
)
from dms.morsefield import synthesize_function


@pytest.fixture(scope="session")
def tetra():
    return tetrahedron()


@pytest.fixture(scope="session")
def torus():
    return torus7()


@pytest.fixture(scope="session")
def rp2():
    return projective_plane6()


@pytest.fixture(scope="session")
def pillow_sphere():
    return pillow()


@pytest.fixture(scope="session")
def genus2():
    return genus_surface(2)


@pytest.fixture(scope="session")
def genus3():
    return genus_surface(3)


@pytest.fixture(scope="session")
def torus_field(torus):
    return tree_cotree_field(torus)


@pytest.fixture(scope="session")
def torus_function(torus, torus_field):
    return synthesize_function(torus, torus_field)
