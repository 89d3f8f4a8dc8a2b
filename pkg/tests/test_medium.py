import itertools

import numpy as np
import pytest

from cellcirc.locus import TRANSFER, Locus
from cellcirc.medium import (MediumError, SimplicialMedium, build_hex_torus,
                             build_isotropic)


def test_hex_counts(hex44):
    assert (hex44.nv, hex44.ne, hex44.nf) == (16, 48, 32)
    assert hex44.validate().passed


def test_hex_regularity():
    m = build_hex_torus(3, 3)
    assert np.all(m.degrees == 6)
    assert all(len(set(map(int, f))) == 3 for f in m.faces)


def test_hex_too_small():
    with pytest.raises(MediumError, match="cols >= 3"):
        build_hex_torus(2, 5)


def test_hex_transfer_point_counts(hex44):
    for locus in TRANSFER:
        assert hex44.locus_size(locus) == 6 * hex44.nv


def test_partner_involution(hex44, iso_small):
    for m in (hex44, iso_small):
        for locus in TRANSFER:
            part = m.tp_partner[locus]
            back = m.tp_partner[locus.partner]
            assert np.array_equal(back[part], np.arange(len(part)))


def test_ev_points_follow_embedding_order(hex44):
    # around every vertex the eV slots are the incident edges in CCW order
    for v in range(hex44.nv):
        start = hex44.tp_starts[Locus.eV][v]
        slots = hex44.tp_other[Locus.eV][start:start + 6]
        assert list(slots) == list(hex44.vertex_edges[v])


def test_isotropic_valid(iso200):
    rep = iso200.validate()
    assert rep.passed, rep.failures()
    assert iso200.euler() == 2
    interior = iso200.degrees[~iso200.border_mask]
    assert np.isin(interior, (5, 6, 7)).mean() >= 0.9


def test_isotropic_small():
    m = build_isotropic(10, 1, 0)
    assert m.euler() == 2
    assert m.validate().passed


def test_isotropic_needs_ten_points():
    with pytest.raises(MediumError, match="n >= 10"):
        build_isotropic(9, 1, 0)


def test_relaxation_reduces_degree_variance():
    raw = build_isotropic(200, 7, 0)
    relaxed = build_isotropic(200, 7, 30)
    v0 = raw.degrees[~raw.border_mask].var()
    v1 = relaxed.degrees[~relaxed.border_mask].var()
    assert v1 < v0


def test_border_ring_single_cycle(iso200):
    ring = iso200.border_ring
    for i in range(len(ring)):
        u, v = ring[i], ring[(i + 1) % len(ring)]
        assert (min(u, v), max(u, v)) in iso200.edge_index
    hull = set(np.nonzero(~iso200.vertex_complete)[0].tolist())
    assert set(ring) == hull


def test_simplicial_distances(hex44):
    e0 = 0
    u, v = (int(x) for x in hex44.edges[e0])
    assert hex44.simplicial_distance((Locus.V, u), (Locus.E, e0)) == 1
    f = int(hex44.edge_faces[e0][0])
    assert hex44.simplicial_distance((Locus.V, u), (Locus.F, f)) == 1
    assert hex44.simplicial_distance((Locus.V, u), (Locus.V, v)) == 2


def test_simplicial_distance_is_metric():
    m = build_hex_torus(3, 3)
    ids = ([(Locus.V, i) for i in range(m.nv)]
           + [(Locus.E, i) for i in range(m.ne)]
           + [(Locus.F, i) for i in range(m.nf)])
    d = {}
    for a, b in itertools.combinations(range(len(ids)), 2):
        d[a, b] = d[b, a] = m.simplicial_distance(ids[a], ids[b])
    for a in range(len(ids)):
        d[a, a] = 0
    for a, b, c in itertools.permutations(range(12), 3):
        assert d[a, c] <= d[a, b] + d[b, c]


def test_tiles_hex(hex44):
    t = hex44.tiles()
    loads = t.loads(hex44.nv)
    assert np.all(loads == 6)  # 1 vertex + 3 edges + 2 faces
    counts = np.bincount(t.edge_owner, minlength=hex44.nv)
    assert np.all(counts == 3)
    counts = np.bincount(t.face_owner, minlength=hex44.nv)
    assert np.all(counts == 2)


def test_tiles_ownership_adjacent(iso200):
    t = iso200.assign_tiles(7)
    for e, owner in enumerate(t.edge_owner):
        assert owner in iso200.edges[e]
    for f, owner in enumerate(t.face_owner):
        assert owner in iso200.faces[f]
    loads = t.loads(iso200.nv)
    mean = loads.mean()
    assert loads.max() <= int(np.ceil(mean)) + 2


def test_tile_single_ownership(hex88):
    t = hex88.tiles()
    assert len(t.edge_owner) == hex88.ne
    assert len(t.face_owner) == hex88.nf


def test_serialization_roundtrip(hex44, iso_small):
    for m in (hex44, iso_small):
        m2 = SimplicialMedium.from_json(m.to_json())
        assert m2.content_hash() == m.content_hash()
        assert m2.edges.tolist() == m.edges.tolist()


def test_loader_rejects_bad_face(iso_small):
    import json
    doc = json.loads(iso_small.to_json())
    doc["faces"][0] = [0, 0, 1]
    with pytest.raises(MediumError):
        SimplicialMedium.from_json(json.dumps(doc))


def test_validate_flags_non_triangle():
    m = build_hex_torus(4, 4)
    m.faces = np.vstack([m.faces[:-1], [[0, 0, 1]]])
    rep = m.validate()
    assert not rep.passed
    assert any(n == "triangle-faces" for n, ok, _ in rep.checks if not ok)


def test_hex_diameter_matches_bfs(hex88):
    d = hex88.vertex_bfs([0])
    assert hex88.diameter() == int(d.max())


def test_brothers_interleave(hex44):
    # walking the rotation cycle around a vertex alternates eV and fV points
    succ_ev = hex44.tp_succ[Locus.eV]
    succ_fv = hex44.tp_succ[Locus.fV]
    start = int(hex44.tp_starts[Locus.eV][0])
    p = start
    seen = []
    for _ in range(6):
        q = int(succ_ev[p])          # eV -> fV
        p = int(succ_fv[q])          # fV -> eV
        seen.append(p)
    assert sorted(seen) == list(range(start, start + 6))
