import numpy as np
import pytest

from cellcirc.fields import Field, FieldError, FieldType
from cellcirc.locus import Locus


def t(locus, w=1):
    return FieldType(locus, w)


def test_constant(hex44):
    f = Field.constant(hex44, t(Locus.V), 0)
    assert f.popcount() == 0
    g = Field.constant(hex44, t(Locus.E, 2), 3)
    assert np.all(g.values == 3)
    h = Field.constant(hex44, t(Locus.F), 1)
    assert h.popcount() == 32  # F = 2V


def test_constant_overflow(hex44):
    with pytest.raises(FieldError, match="overflow"):
        Field.constant(hex44, t(Locus.V, 2), 4)


def test_from_points_and_get(hex44):
    f = Field.from_points(hex44, t(Locus.E), [0, 5, 11])
    assert f.get(5) == 1 and f.get(4) == 0
    assert f.popcount() == 3
    with pytest.raises(FieldError, match="not on locus"):
        Field.from_points(hex44, t(Locus.V), [99])


def test_random_density_extremes(hex44):
    assert Field.random(hex44, t(Locus.V), 1, 0.0).popcount() == 0
    assert Field.random(hex44, t(Locus.V), 1, 1.0).popcount() == hex44.nv


def test_random_binomial_bound():
    from cellcirc.medium import build_hex_torus
    m = build_hex_torus(100, 100)
    f = Field.random(m, t(Locus.V), 123, 0.5)
    n = m.nv
    sigma = 0.5 * np.sqrt(n)
    assert abs(f.popcount() - n / 2) < 4 * sigma


def test_random_reproducible(hex44):
    a = Field.random(hex44, t(Locus.eV), 42)
    b = Field.random(hex44, t(Locus.eV), 42)
    assert a == b


def test_dump_roundtrip_bool(hex44):
    f = Field.random(hex44, t(Locus.vE), 3)
    g = Field.load(hex44, f.dump())
    assert g == f


def test_dump_roundtrip_int(hex44):
    f = Field.random(hex44, t(Locus.V, 3), 9)
    g = Field.load(hex44, f.dump())
    assert g == f and g.ftype.width == 3


def test_dump_rejects_other_medium(hex44, hex88):
    f = Field.random(hex44, t(Locus.V), 3)
    with pytest.raises(FieldError, match="different medium"):
        Field.load(hex88, f.dump())


def test_bit_density(hex44):
    assert Field.constant(hex44, t(Locus.E, 2), 0).bit_density() == 6  # 2*3
    assert Field.constant(hex44, t(Locus.V), 0).bit_density() == 1
    assert Field.constant(hex44, t(Locus.vE), 0).bit_density() == 6


def test_debug_json(hex44):
    f = Field.from_points(hex44, t(Locus.V), [1, 2])
    assert '"true_points": [1, 2]' in f.to_debug_json()
