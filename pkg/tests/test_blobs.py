import numpy as np
import pytest

from cellcirc import blobs
from cellcirc.fields import Field, FieldType
from cellcirc.locus import Locus
from cellcirc.runtime import interpret
from cellcirc.voronoi import label_components
from conftest import random_boolv, ring_of

x = blobs.layer("x")


def boolv(m, pts):
    return Field.from_points(m, FieldType(Locus.V, 1), pts)


def test_single_vertex_features(hex44):
    f = boolv(hex44, [5])
    frontier = interpret(blobs.frontierE(x), hex44, {"x": f})
    assert sorted(frontier.true_points()) == sorted(int(e) for e in hex44.vertex_edges[5])
    assert interpret(blobs.insideV(x), hex44, {"x": f}).popcount() == 0
    nb = interpret(blobs.neighborhoodV(x), hex44, {"x": f})
    assert sorted(nb.true_points()) == sorted([5] + ring_of(hex44, 5))


def test_all_true_features(hex44):
    f = Field.constant(hex44, FieldType(Locus.V, 1), 1)
    assert interpret(blobs.insideV(x), hex44, {"x": f}).popcount() == hex44.nv
    assert interpret(blobs.frontierE(x), hex44, {"x": f}).popcount() == 0


def test_frontier_edges_by_enumeration(hex88):
    f = random_boolv(hex88, 21)
    frontier = interpret(blobs.frontierE(x), hex88, {"x": f}).values
    for e, (u, v) in enumerate(hex88.edges):
        assert frontier[e] == (f.values[int(u)] ^ f.values[int(v)])


def test_inside_outside_edges(hex88):
    f = random_boolv(hex88, 22)
    ins = interpret(blobs.insideE(x), hex88, {"x": f}).values
    out = interpret(blobs.outsideE(x), hex88, {"x": f}).values
    for e, (u, v) in enumerate(hex88.edges):
        a, b = f.values[int(u)], f.values[int(v)]
        assert ins[e] == (a & b) and out[e] == ((1 - a) & (1 - b))


def test_frontier_v_parts(hex88):
    f = random_boolv(hex88, 23)
    fv = interpret(blobs.frontierV(x), hex88, {"x": f}).values
    fin = interpret(blobs.frontierVin(x), hex88, {"x": f}).values
    fout = interpret(blobs.frontierVout(x), hex88, {"x": f}).values
    for v in range(hex88.nv):
        ring = ring_of(hex88, v)
        expect = any(f.values[u] != f.values[v] for u in ring)
        assert fv[v] == expect
        assert fin[v] == (expect and f.values[v])
        assert fout[v] == (expect and not f.values[v])
    assert np.array_equal(fin | fout, fv)


def test_frontier_complement_invariant(hex88, iso200):
    for m in (hex88, iso200):
        f = random_boolv(m, 24)
        a = interpret(blobs.frontierV(x), m, {"x": f})
        b = interpret(blobs.frontierV(~x), m, {"x": f})
        assert a == b


def test_isolated_vertex_frontier_v(hex44):
    f = boolv(hex44, [9])
    fv = interpret(blobs.frontierV(x), hex44, {"x": f})
    assert sorted(fv.true_points()) == sorted([9] + ring_of(hex44, 9))


def test_closure(hex44):
    from cellcirc.lang import LayerRead
    ye = LayerRead("y", FieldType(Locus.E, 1))
    zero_v = Field.constant(hex44, FieldType(Locus.V, 1), 0)
    zero_e = Field.constant(hex44, FieldType(Locus.E, 1), 0)
    out = interpret(blobs.closureV(x, ye), hex44, {"x": zero_v, "y": zero_e})
    assert out.popcount() == 0
    f = random_boolv(hex44, 1)
    out = interpret(blobs.closureV(x, ye), hex44, {"x": f, "y": zero_e})
    assert out == f
    one_e = Field.from_points(hex44, FieldType(Locus.E, 1), [7])
    out = interpret(blobs.closureV(x, ye), hex44, {"x": zero_v, "y": one_e})
    assert sorted(out.true_points()) == sorted(int(t) for t in hex44.edges[7])


def test_rhombus_reduction(hex88):
    f = Field.constant(hex88, FieldType(Locus.V, 1), 1)
    assert interpret(blobs.rhombusAll(x), hex88, {"x": f}).popcount() == hex88.ne
    f = random_boolv(hex88, 25)
    out = interpret(blobs.rhombusAll(x), hex88, {"x": f}).values
    for e in range(hex88.ne):
        verts = set()
        for fc in hex88.edge_faces[e]:
            verts.update(int(t) for t in hex88.faces[fc])
        assert out[e] == all(f.values[v] for v in verts)


def test_rhombus_single_empty_vertex(hex88):
    vals = np.ones(hex88.nv, dtype=np.uint8)
    vals[13] = 0
    f = Field(hex88, FieldType(Locus.V, 1), vals)
    out = interpret(blobs.rhombusAll(x), hex88, {"x": f}).values
    for e in range(hex88.ne):
        verts = set()
        for fc in hex88.edge_faces[e]:
            verts.update(int(t) for t in hex88.faces[fc])
        assert out[e] == (13 not in verts)


def ring_component_count(m, xvals, v):
    ring = ring_of(m, v)
    vals = [int(xvals[u]) for u in ring]
    if not any(vals):
        return 0
    if all(vals):
        return 0  # uniform ring: no frontier apex-edges, formula yields 0
    runs = sum(1 for i in range(len(vals)) if vals[i] and not vals[i - 1])
    return runs


def test_nbcc_against_ring_scan(hex88, iso200):
    for m, seeds in ((hex88, range(6)), (iso200, range(4))):
        for seed in seeds:
            f = random_boolv(m, 30 + seed)
            if m.topology == "bordered":
                vals = f.values.copy()
                vals[m.border_ring] = 0
                f = Field(m, f.ftype, vals)
            nb = interpret(blobs.nbcc(x), m, {"x": f}).values
            for v in range(m.nv):
                if not m.vertex_complete[v]:
                    continue
                assert nb[v] == ring_component_count(m, f.values, v), v


def test_nbcc_merge_fixture(hex88):
    # two opposite filled neighbors around an empty center: nbcc = 2,
    # four frontier apex-edges
    c = 3 * 8 + 3
    ring = ring_of(hex88, c)
    f = boolv(hex88, [ring[0], ring[3]])
    assert interpret(blobs.nbcc(x), hex88, {"x": f}).values[c] == 2
    apex_sum = interpret(blobs.apex_frontier_sum(x), hex88, {"x": f}).values[c]
    assert apex_sum == 4
    assert interpret(blobs.mergeV(x), hex88, {"x": f}).values[c] == 1
    assert interpret(blobs.divV(x), hex88, {"x": f}).values[c] == 0


def test_div_fixture(hex88):
    # filled center + two opposite filled neighbors: emptying it would
    # split the blob
    c = 3 * 8 + 3
    ring = ring_of(hex88, c)
    f = boolv(hex88, [c, ring[1], ring[4]])
    assert interpret(blobs.divV(x), hex88, {"x": f}).values[c] == 1
    assert interpret(blobs.mergeV(x), hex88, {"x": f}).values[c] == 0


def test_meet_uniform_inputs(hex88):
    ones = Field.constant(hex88, FieldType(Locus.V, 1), 1)
    for fn in (blobs.meetV, blobs.divV, blobs.mergeV, blobs.meetE,
               blobs.divE, blobs.mergeE):
        assert interpret(fn(x), hex88, {"x": ones}).popcount() == 0
    zeros = Field.constant(hex88, FieldType(Locus.V, 1), 0)
    for fn in (blobs.meetV, blobs.meetE):
        assert interpret(fn(x), hex88, {"x": zeros}).popcount() == 0


def test_merge_vertex_ball_oracle(hex1010):
    # mergeV(p) iff p empty and its ring splits into >= 2 filled runs
    for seed in range(8):
        f = random_boolv(hex1010, 40 + seed)
        mv = interpret(blobs.mergeV(x), hex1010, {"x": f}).values
        for v in range(hex1010.nv):
            expect = (not f.values[v]) and ring_component_count(
                hex1010, f.values, v) >= 2
            assert mv[v] == expect


def test_merge_edge_ball_oracle(hex1010):
    # mergeE(e) iff the rhombus is empty and both endpoints touch a front
    for seed in range(8):
        f = random_boolv(hex1010, 50 + seed, 0.4)
        me = interpret(blobs.mergeE(x), hex1010, {"x": f}).values
        for e, (u, v) in enumerate(hex1010.edges):
            u, v = int(u), int(v)
            verts = set()
            for fc in hex1010.edge_faces[e]:
                verts.update(int(t) for t in hex1010.faces[fc])
            rhombus_empty = not any(f.values[w] for w in verts)
            u_touch = any(f.values[w] for w in ring_of(hex1010, u))
            v_touch = any(f.values[w] for w in ring_of(hex1010, v))
            assert me[e] == (rhombus_empty and u_touch and v_touch)


def test_meet_decomposition(hex1010):
    f = random_boolv(hex1010, 60, 0.45)
    r = blobs.meet(x)
    env = {"x": f}
    meet_v = interpret(r.meetV, hex1010, env).values
    div_v = interpret(r.divV, hex1010, env).values
    merge_v = interpret(r.mergeV, hex1010, env).values
    assert np.array_equal(meet_v, div_v | merge_v)
    assert not np.any(merge_v & f.values)
    assert not np.any(div_v & (1 - f.values))
    meet_e = interpret(r.meetE, hex1010, env).values
    div_e = interpret(r.divE, hex1010, env).values
    merge_e = interpret(r.mergeE, hex1010, env).values
    assert np.array_equal(meet_e, div_e | merge_e)


def test_duality(hex88, iso200):
    for m in (hex88, iso200):
        f = random_boolv(m, 61)
        g = Field(m, f.ftype, f.values ^ 1)
        for a, b in ((blobs.divV, blobs.mergeV), (blobs.divE, blobs.mergeE)):
            assert interpret(a(x), m, {"x": f}) == interpret(b(x), m, {"x": g})


def test_global_merge_points_are_local(hex88):
    # exhaustive claim on random fields: an empty vertex adjacent to two
    # distinct global blobs is always flagged by mergeV
    for seed in range(6):
        f = random_boolv(hex88, 70 + seed, 0.35)
        labels, _ = label_components(hex88, f.values.astype(bool))
        mv = interpret(blobs.mergeV(x), hex88, {"x": f}).values
        for v in range(hex88.nv):
            if f.values[v]:
                continue
            around = {int(labels[u]) for u in ring_of(hex88, v) if f.values[u]}
            if len(around) >= 2:
                assert mv[v] == 1, v


def test_merge_safety_local(hex1010):
    # filling a non-flagged empty vertex never decreases the blob count
    # within its radius-2 ball
    for seed in range(4):
        f = random_boolv(hex1010, 80 + seed, 0.4)
        mv = interpret(blobs.mergeV(x), hex1010, {"x": f}).values
        me = interpret(blobs.mergeE(x), hex1010, {"x": f}).values
        merge_edge_ends = set()
        for e, (u, v) in enumerate(hex1010.edges):
            if me[e]:
                merge_edge_ends.update((int(u), int(v)))
        for v in range(hex1010.nv):
            if f.values[v] or mv[v] or v in merge_edge_ends:
                continue
            ring = ring_of(hex1010, v)
            if not any(f.values[u] for u in ring):
                continue
            # ring has exactly one filled run: filling v joins nothing
            assert ring_component_count(hex1010, f.values, v) <= 1
