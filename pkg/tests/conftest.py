import numpy as np
import pytest

from cellcirc.fields import Field, FieldType
from cellcirc.locus import Locus
from cellcirc.medium import build_hex_torus, build_isotropic


@pytest.fixture(scope="session")
def hex44():
    return build_hex_torus(4, 4)


@pytest.fixture(scope="session")
def hex88():
    return build_hex_torus(8, 8)


@pytest.fixture(scope="session")
def hex1010():
    return build_hex_torus(10, 10)


@pytest.fixture(scope="session")
def hex1616():
    return build_hex_torus(16, 16)


@pytest.fixture(scope="session")
def iso200():
    return build_isotropic(200, 7, 30)


@pytest.fixture(scope="session")
def iso_small():
    return build_isotropic(60, 3, 10)


def random_boolv(medium, seed, density=0.5):
    return Field.random(medium, FieldType(Locus.V, 1), seed, density)


def ring_of(medium, v):
    ring = []
    for e in medium.vertex_edges[v]:
        a, b = medium.edges[e]
        ring.append(int(b) if int(a) == v else int(a))
    return ring
