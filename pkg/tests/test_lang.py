import numpy as np
import pytest

from cellcirc import blobs
from cellcirc.fields import Field, FieldType
from cellcirc.lang import (Broadcast, LayerRead, ParseError, Pointwise,
                           Reduce, RotateCCW, RotateCW, SpatialTypeError,
                           Symmetry, Transfer, apex, exists, forall,
                           free_variables, land, lnot, parse_expr, reduce2,
                           simplicial_reduce, substitute, typecheck)
from cellcirc.locus import Locus
from cellcirc.runtime import interpret
from conftest import random_boolv


def lr(name, locus, w=1):
    return LayerRead(name, FieldType(locus, w))


x = blobs.layer("x")


def test_reduce_signatures(hex44):
    assert typecheck(forall("E", x), hex44) == FieldType(Locus.E, 1)
    assert typecheck(forall("E", lr("f", Locus.F)), hex44) == FieldType(Locus.E, 1)
    assert typecheck(exists("V", lr("e", Locus.E)), hex44) == FieldType(Locus.V, 1)


def test_reduce_macro_shape():
    e = forall("E", x)
    assert isinstance(e, Reduce) and e.op == "AND"
    assert isinstance(e.child, Transfer)
    assert isinstance(e.child.child, Broadcast)


def test_symmetry_signatures(hex44, iso_small):
    assert typecheck(Symmetry(lr("a", Locus.eF)), hex44).locus is Locus.vF
    assert typecheck(Symmetry(lr("a", Locus.vF)), hex44).locus is Locus.eF
    # E-fathered symmetry swaps within its own locus (endpoint/face swap)
    assert typecheck(Symmetry(lr("a", Locus.vE)), hex44).locus is Locus.vE
    assert typecheck(Symmetry(lr("a", Locus.fE)), hex44).locus is Locus.fE
    assert typecheck(Symmetry(lr("a", Locus.eV)), hex44).locus is Locus.eV
    with pytest.raises(SpatialTypeError, match="hexagonal"):
        typecheck(Symmetry(lr("a", Locus.eV)), iso_small)


def test_type_errors(hex44):
    with pytest.raises(SpatialTypeError, match="mixed locus"):
        typecheck(land(x, lr("e", Locus.E)), hex44)
    with pytest.raises(SpatialTypeError, match="broadcast"):
        typecheck(Broadcast("v", x), hex44)  # no vV locus
    with pytest.raises(SpatialTypeError, match="transfer locus"):
        typecheck(Transfer(x), hex44)
    with pytest.raises(SpatialTypeError, match="bool"):
        typecheck(land(lr("a", Locus.V, 2), lr("b", Locus.V, 2)), hex44)


def test_plus_reduce_widening(hex44):
    e = Reduce("PLUS", Broadcast("f", x))  # fV points, co-arity 6
    assert typecheck(e, hex44) == FieldType(Locus.V, 3)  # ceil(log2(7))


def test_rotation_laws(hex44, iso_small):
    for m in (hex44, iso_small):
        for locus in (Locus.eV, Locus.vE, Locus.eF, Locus.fE, Locus.vF, Locus.fV):
            y = lr("y", locus)
            f = Field.random(m, FieldType(locus), 5)
            complete = m.tp_complete[locus]
            r1 = interpret(RotateCW(RotateCCW(y)), m, {"y": f})
            r2 = interpret(RotateCCW(RotateCW(y)), m, {"y": f})
            assert np.array_equal(r1.values[complete], f.values[complete])
            assert np.array_equal(r2.values[complete], f.values[complete])


def test_transfer_involution(hex44, iso_small):
    for m in (hex44, iso_small):
        for locus in (Locus.eV, Locus.vE, Locus.fV, Locus.eF):
            y = lr("y", locus)
            f = Field.random(m, FieldType(locus), 6)
            assert interpret(Transfer(Transfer(y)), m, {"y": f}) == f


def test_symmetry_involution(hex44):
    for locus in (Locus.eV, Locus.vE, Locus.eF, Locus.fE, Locus.vF, Locus.fV):
        y = lr("y", locus)
        f = Field.random(hex44, FieldType(locus), 7)
        assert interpret(Symmetry(Symmetry(y)), hex44, {"y": f}) == f


def test_apex_involution(hex44, iso_small):
    for m in (hex44, iso_small):
        y = lr("y", Locus.fV)
        f = Field.random(m, FieldType(Locus.fV), 8)
        assert interpret(apex(apex(y)), m, {"y": f}) == f


def test_apex_single_point(hex44):
    # one fV point lands on the opposite edge of its face, two hops away
    y = lr("y", Locus.fV)
    f = Field.from_points(hex44, FieldType(Locus.fV), [0])
    v = int(hex44.tp_father[Locus.fV][0])
    face = int(hex44.tp_other[Locus.fV][0])
    out = interpret(apex(y), hex44, {"y": f})
    pts = out.true_points()
    assert len(pts) == 1
    edge = int(hex44.tp_father[Locus.fE][pts[0]])
    assert int(hex44.tp_other[Locus.fE][pts[0]]) == face
    assert v not in (int(t) for t in hex44.edges[edge])
    assert hex44.simplicial_distance((Locus.V, v), (Locus.E, edge)) == 2


def test_apex_neighbor_vertex_permutation(hex44):
    # apex through the vertex side maps each eV point to the neighbor's
    y = lr("y", Locus.eV)
    f = Field.from_points(hex44, FieldType(Locus.eV), [0])
    e = int(hex44.tp_other[Locus.eV][0])
    v = int(hex44.tp_father[Locus.eV][0])
    out = interpret(apex(y), hex44, {"y": f})
    pts = out.true_points()
    assert len(pts) == 1
    assert int(hex44.tp_other[Locus.eV][pts[0]]) == e
    assert int(hex44.tp_father[Locus.eV][pts[0]]) != v


def test_reduce2(hex44):
    y = lr("y", Locus.vE)
    ones = Field.constant(hex44, FieldType(Locus.vE), 1)
    out = interpret(reduce2("AND", y), hex44, {"y": ones})
    assert out.popcount() == hex44.locus_size(Locus.fE)
    zeros = Field.constant(hex44, FieldType(Locus.vE), 0)
    assert interpret(reduce2("AND", y), hex44, {"y": zeros}).popcount() == 0
    # random field: each brother point gets the AND of its two flanks
    f = Field.random(hex44, FieldType(Locus.vE), 11)
    out = interpret(reduce2("AND", y), hex44, {"y": f})
    succ = hex44.tp_succ[Locus.fE]
    pred = hex44.tp_pred[Locus.fE]
    expect = f.values[succ] & f.values[pred]
    assert np.array_equal(out.values, expect)


def test_reduction_slot_permutation_invariance(hex88):
    rng = np.random.default_rng(0)
    f = Field.random(hex88, FieldType(Locus.vE), 1)
    base = interpret(Reduce("OR", lr("y", Locus.vE)), hex88, {"y": f})
    vals = f.values.copy()
    starts = hex88.tp_starts[Locus.vE]
    for father in range(hex88.ne):
        s, e = int(starts[father]), int(starts[father + 1])
        vals[s:e] = vals[s:e][rng.permutation(e - s)]
    g = Field(hex88, f.ftype, vals)
    assert interpret(Reduce("OR", lr("y", Locus.vE)), hex88, {"y": g}) == base


def test_free_variables_and_substitute(hex44):
    from cellcirc.voronoi import vd_update
    assert free_variables(vd_update()) == {"x"}
    y = lr("y", Locus.E)
    shared = land(blobs.rhombusAll(lnot(y)), forall("E", exists("V", y)))
    direct = blobs.meetE(x)
    sub = substitute(shared, "y", blobs.frontierE(x))
    assert typecheck(sub, hex44) == typecheck(direct, hex44)
    f = random_boolv(hex44, 3)
    assert interpret(sub, hex44, {"x": f}) == interpret(direct, hex44, {"x": f})


def test_parse_roundtrip(hex44):
    e = parse_expr("and(rhombus(not(frontierE(x))), forallE(frontierV(x)))")
    assert typecheck(e, hex44) == FieldType(Locus.E, 1)
    f = random_boolv(hex44, 4)
    assert interpret(e, hex44, {"x": f}) == interpret(blobs.meetE(x), hex44, {"x": f})


def test_parse_errors():
    with pytest.raises(ParseError, match="unknown function"):
        parse_expr("nosuch(x)")
    with pytest.raises(ParseError, match="unknown layer"):
        parse_expr("not(y)")
    with pytest.raises(ParseError, match="position"):
        parse_expr("and(x,")


def test_hex_rotation_equivariance(hex88):
    # relabeling by a 60-degree lattice rotation commutes with evaluation
    size = hex88.cols
    perm = np.empty(hex88.nv, dtype=np.int64)
    for r in range(size):
        for c in range(size):
            perm[r * size + c] = ((c + r) % size) * size + (-r) % size
    from cellcirc.voronoi import vd_update
    for expr in (blobs.neighborhoodV(x), blobs.meetV(x), vd_update()):
        f = random_boolv(hex88, 17, 0.4)
        out = interpret(expr, hex88, {"x": f}).values
        fp = Field(hex88, f.ftype, np.empty_like(f.values))
        fp.values[perm] = f.values
        outp = interpret(expr, hex88, {"x": fp}).values
        assert np.array_equal(outp[perm], out)
