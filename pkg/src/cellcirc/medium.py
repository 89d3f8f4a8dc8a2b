"""Maximal planar media: hexagonal tori and isotropic bordered disks.

A medium owns the planar graph (vertices, triangle faces), the derived
simplicial graph, and the six transfer locus with their communication maps
(partner, rotation, central symmetry).  Media are immutable after
construction and safe to share across readers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, Voronoi

from .locus import ARITY, TRANSFER, Locus

SQRT3_2 = math.sqrt(3.0) / 2.0


class MediumError(ValueError):
    pass


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)  # (name, ok, detail)
    degree_histogram: dict = field(default_factory=dict)

    def add(self, name, ok, detail=""):
        self.checks.append((name, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def failures(self):
        return [(n, d) for n, ok, d in self.checks if not ok]


@dataclass(frozen=True)
class TileAssignment:
    """Partition of all simplexes into per-vertex tiles."""

    edge_owner: np.ndarray
    face_owner: np.ndarray

    def loads(self, nv) -> np.ndarray:
        loads = np.ones(nv, dtype=np.int64)
        np.add.at(loads, self.edge_owner, 1)
        np.add.at(loads, self.face_owner, 1)
        return loads


class SimplicialMedium:
    """Immutable maximal planar medium with derived locus tables."""

    def __init__(self, points, edges, faces, topology, kind,
                 border_ring=None, periods=None, cols=None, rows=None):
        self.points = np.asarray(points, dtype=np.float64)
        self.edges = np.asarray(edges, dtype=np.int64)
        self.faces = np.asarray(faces, dtype=np.int64)
        self.topology = topology  # "torus" | "bordered"
        self.kind = kind          # "hex" | "isotropic"
        self.border_ring = None if border_ring is None else list(border_ring)
        self.periods = None if periods is None else np.asarray(periods, float)
        self.cols = cols
        self.rows = rows
        self._gs_adj = None
        self._tiles = None
        self._build_adjacency()
        self._build_transfer_tables()

    # ------------------------------------------------------------------
    # basic counts

    @property
    def nv(self):
        return len(self.points)

    @property
    def ne(self):
        return len(self.edges)

    @property
    def nf(self):
        return len(self.faces)

    def counts(self, cls: Locus) -> int:
        return {Locus.V: self.nv, Locus.E: self.ne, Locus.F: self.nf}[cls]

    def euler(self) -> int:
        """Euler characteristic, counting the unbounded face on a disk."""
        outer = 1 if self.topology == "bordered" else 0
        return self.nv - self.ne + self.nf + outer

    def locus_size(self, locus: Locus) -> int:
        if locus.is_simplicial:
            return self.counts(locus)
        return len(self.tp_father[locus])

    @property
    def border_mask(self) -> np.ndarray:
        mask = np.zeros(self.nv, dtype=bool)
        if self.border_ring:
            mask[self.border_ring] = True
        return mask

    # ------------------------------------------------------------------
    # geometry helpers (wrap-aware on the torus)

    def disp(self, a, b):
        """Shortest displacement vector from vertex a to vertex b."""
        d = self.points[b] - self.points[a]
        if self.periods is None:
            return d
        best = d
        bn = d @ d
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                cand = d + i * self.periods[0] + j * self.periods[1]
                n = cand @ cand
                if n < bn - 1e-12:
                    best, bn = cand, n
        return best

    # ------------------------------------------------------------------
    # adjacency construction

    def _build_adjacency(self):
        nv, ne, nf = self.nv, self.ne, self.nf
        self.edge_index = {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

        edge_to_faces = [[] for _ in range(ne)]
        self.face_ccw = np.empty((nf, 3), dtype=np.int64)
        for fi, tri in enumerate(self.faces):
            a, b, c = (int(x) for x in tri)
            if len({a, b, c}) != 3:
                raise MediumError(f"non-triangle face {fi}: {(a, b, c)}")
            # orient counter-clockwise, smallest vertex first
            p1 = self.disp(a, b)
            p2 = self.disp(a, c)
            if p1[0] * p2[1] - p1[1] * p2[0] >= 0:
                order = (a, b, c)
            else:
                order = (a, c, b)
            self.face_ccw[fi] = order
            for k in range(3):
                u, v = order[k], order[(k + 1) % 3]
                e = self.edge_index.get((min(u, v), max(u, v)))
                if e is None:
                    raise MediumError(f"face {fi} uses missing edge {(u, v)}")
                edge_to_faces[e].append(fi)

        # edge -> [left, right] faces w.r.t. the canonical u->v direction
        self.edge_faces = []
        for ei, (u, v) in enumerate(self.edges):
            fs = edge_to_faces[ei]
            if not 1 <= len(fs) <= 2:
                raise MediumError(f"edge {ei} belongs to {len(fs)} faces")
            d = self.disp(u, v)
            def side(fi):
                w = next(int(x) for x in self.faces[fi] if x not in (u, v))
                dw = self.disp(int(u), w)
                return d[0] * dw[1] - d[1] * dw[0]
            if len(fs) == 2:
                a, b = fs
                self.edge_faces.append([a, b] if side(a) > 0 else [b, a])
            else:
                self.edge_faces.append(list(fs))

        # incident edges per vertex, counter-clockwise by angle
        incident = [[] for _ in range(nv)]
        for ei, (u, v) in enumerate(self.edges):
            incident[int(u)].append(ei)
            incident[int(v)].append(ei)
        self.vertex_edges = []
        self.vertex_faces = []
        self.vertex_complete = np.zeros(nv, dtype=bool)
        pair_to_face = {}
        for fi in range(nf):
            o = self.face_ccw[fi]
            for k in range(3):
                u, v = int(o[k]), int(o[(k + 1) % 3])
                e1 = self.edge_index[(min(u, v), max(u, v))]
                w = int(o[(k + 2) % 3])
                e2 = self.edge_index[(min(v, w), max(v, w))]
                # face between two edges around their shared vertex v
                pair_to_face[(v, e2, e1)] = fi
                pair_to_face[(v, e1, e2)] = fi
        for v in range(nv):
            eids = incident[v]
            angles = []
            for e in eids:
                u, w = self.edges[e]
                o = int(w) if int(u) == v else int(u)
                d = self.disp(v, o)
                angles.append(math.atan2(d[1], d[0]))
            order = [e for _, e in sorted(zip(angles, eids))]
            k = len(order)
            gaps = [i for i in range(k)
                    if (v, order[i], order[(i + 1) % k]) not in pair_to_face]
            if len(gaps) == 0:
                self.vertex_complete[v] = True
            elif len(gaps) == 1:
                # border vertex: rotate so the fan starts right after the gap
                g = gaps[0]
                order = order[g + 1:] + order[:g + 1]
            else:
                raise MediumError(f"vertex {v} has {len(gaps)} fan gaps")
            faces = []
            for i in range(k if self.vertex_complete[v] else k - 1):
                faces.append(pair_to_face[(v, order[i], order[(i + 1) % k])])
            self.vertex_edges.append(np.array(order, dtype=np.int64))
            self.vertex_faces.append(np.array(faces, dtype=np.int64))

        self.degrees = np.array([len(e) for e in self.vertex_edges])

    # ------------------------------------------------------------------
    # transfer locus tables

    def _build_transfer_tables(self):
        self.tp_father = {}
        self.tp_other = {}
        self.tp_starts = {}
        self.tp_pos = {}
        self.tp_partner = {}
        self.tp_succ = {}   # cycle successor (CCW next point, brother locus)
        self.tp_pred = {}
        self.tp_sym = {}
        self.tp_complete = {}  # father fan is a full cycle

        def ragged(counts):
            starts = np.zeros(len(counts) + 1, dtype=np.int64)
            np.cumsum(counts, out=starts[1:])
            return starts

        pts = self.points

        # --- fathers V: eV toward edges, fV toward faces
        deg = self.degrees
        nfaces_v = np.array([len(f) for f in self.vertex_faces])
        self.tp_starts[Locus.eV] = ragged(deg)
        self.tp_starts[Locus.fV] = ragged(nfaces_v)
        self.tp_father[Locus.eV] = np.repeat(np.arange(self.nv), deg)
        self.tp_father[Locus.fV] = np.repeat(np.arange(self.nv), nfaces_v)
        self.tp_other[Locus.eV] = np.concatenate(self.vertex_edges) if self.nv else np.zeros(0, int)
        self.tp_other[Locus.fV] = (np.concatenate(self.vertex_faces)
                                   if nfaces_v.sum() else np.zeros(0, dtype=np.int64))

        # --- father E: vE toward endpoints (slot order = canonical pair),
        #     fE toward faces (slot order = [left, right])
        nfe = np.array([len(f) for f in self.edge_faces])
        self.tp_starts[Locus.vE] = ragged(np.full(self.ne, 2))
        self.tp_starts[Locus.fE] = ragged(nfe)
        self.tp_father[Locus.vE] = np.repeat(np.arange(self.ne), 2)
        self.tp_father[Locus.fE] = np.repeat(np.arange(self.ne), nfe)
        self.tp_other[Locus.vE] = self.edges.reshape(-1)
        self.tp_other[Locus.fE] = (np.concatenate([np.asarray(f) for f in self.edge_faces])
                                   if self.ne else np.zeros(0, int))

        # --- father F: vF toward corners, eF toward edges (CCW order)
        self.tp_starts[Locus.vF] = ragged(np.full(self.nf, 3))
        self.tp_starts[Locus.eF] = ragged(np.full(self.nf, 3))
        self.tp_father[Locus.vF] = np.repeat(np.arange(self.nf), 3)
        self.tp_father[Locus.eF] = np.repeat(np.arange(self.nf), 3)
        self.tp_other[Locus.vF] = self.face_ccw.reshape(-1)
        face_edges = np.empty((self.nf, 3), dtype=np.int64)
        for fi in range(self.nf):
            o = self.face_ccw[fi]
            for k in range(3):
                u, v = int(o[k]), int(o[(k + 1) % 3])
                face_edges[fi, k] = self.edge_index[(min(u, v), max(u, v))]
        self.face_edges_ccw = face_edges
        self.tp_other[Locus.eF] = face_edges.reshape(-1)

        # --- slot lookup helpers
        def slot_of(locus, father, other):
            s, e = self.tp_starts[locus][father], self.tp_starts[locus][father + 1]
            block = self.tp_other[locus][s:e]
            return s + int(np.nonzero(block == other)[0][0])

        self._slot_of = slot_of

        # --- partner maps (bijections across each adjacency segment)
        for locus in (Locus.eV, Locus.fE, Locus.fV):
            part = locus.partner
            fwd = np.empty(len(self.tp_father[locus]), dtype=np.int64)
            for i in range(len(fwd)):
                fa, ot = int(self.tp_father[locus][i]), int(self.tp_other[locus][i])
                fwd[i] = slot_of(part, ot, fa)
            inv = np.empty(len(self.tp_father[part]), dtype=np.int64)
            inv[fwd] = np.arange(len(fwd))
            self.tp_partner[locus] = fwd
            self.tp_partner[part] = inv

        # --- rotation cycles around each father
        for locus in TRANSFER:
            n = len(self.tp_father[locus])
            self.tp_succ[locus] = np.full(n, -1, dtype=np.int64)
            self.tp_pred[locus] = np.full(n, -1, dtype=np.int64)
            self.tp_complete[locus] = np.zeros(n, dtype=bool)

        def close_cycle(cycle):
            # cycle: list of (locus, flat idx) in CCW order, alternating locus
            m = len(cycle)
            for i, (lo, p) in enumerate(cycle):
                ls, ps = cycle[(i + 1) % m]
                self.tp_succ[lo][p] = ps
                self.tp_pred[ls][ps] = p
                self.tp_complete[lo][p] = True

        for v in range(self.nv):
            if not self.vertex_complete[v]:
                continue
            cyc = []
            s_e, s_f = self.tp_starts[Locus.eV][v], self.tp_starts[Locus.fV][v]
            for i in range(int(self.degrees[v])):
                cyc.append((Locus.eV, int(s_e + i)))
                cyc.append((Locus.fV, int(s_f + i)))
            close_cycle(cyc)
        for e in range(self.ne):
            if len(self.edge_faces[e]) != 2:
                continue
            sv, sf = self.tp_starts[Locus.vE][e], self.tp_starts[Locus.fE][e]
            # CCW around the midpoint: endpoint v, left face, endpoint u, right face
            close_cycle([(Locus.vE, int(sv + 1)), (Locus.fE, int(sf)),
                         (Locus.vE, int(sv)), (Locus.fE, int(sf + 1))])
        for f in range(self.nf):
            sv, se = self.tp_starts[Locus.vF][f], self.tp_starts[Locus.eF][f]
            cyc = []
            for i in range(3):
                cyc.append((Locus.vF, int(sv + i)))
                cyc.append((Locus.eF, int(se + i)))
            close_cycle(cyc)

        # --- central symmetry (antipodal point of the father's cycle)
        n_vE = len(self.tp_father[Locus.vE])
        sym = np.arange(n_vE, dtype=np.int64)
        sym ^= 1  # swap the two endpoint slots
        self.tp_sym[Locus.vE] = sym
        sym = np.full(len(self.tp_father[Locus.fE]), -1, dtype=np.int64)
        for e in range(self.ne):
            s = self.tp_starts[Locus.fE][e]
            if len(self.edge_faces[e]) == 2:
                sym[s], sym[s + 1] = s + 1, s
        self.tp_sym[Locus.fE] = sym
        # eF slot i (edge v_i v_{i+1}) <-> vF slot of the opposite vertex
        base = np.arange(self.nf, dtype=np.int64) * 3
        idx = np.arange(self.nf * 3, dtype=np.int64)
        slot = idx % 3
        self.tp_sym[Locus.eF] = base.repeat(3) + (slot + 2) % 3   # eF -> vF
        self.tp_sym[Locus.vF] = base.repeat(3) + (slot + 1) % 3   # vF -> eF
        for locus in (Locus.eV, Locus.fV):
            n = len(self.tp_father[locus])
            sym = np.full(n, -1, dtype=np.int64)
            if self.kind == "hex":
                for v in range(self.nv):
                    s = self.tp_starts[locus][v]
                    d = self.tp_starts[locus][v + 1] - s
                    if d % 2 == 0 and self.vertex_complete[v]:
                        for i in range(d):
                            sym[s + i] = s + (i + d // 2) % d
            self.tp_sym[locus] = sym

    def transfer_positions(self, locus) -> np.ndarray:
        """Embedded data-point positions of a transfer locus (lazy, cached)."""
        if locus not in self.tp_pos:
            fat = self.tp_father[locus]
            oth = self.tp_other[locus]
            pos = np.empty((len(fat), 2))
            for i in range(len(fat)):
                pos[i] = self._tp_position(locus, int(fat[i]), int(oth[i]))
            self.tp_pos[locus] = pos
        return self.tp_pos[locus]

    def _tp_position(self, locus, fat, oth):
        pts = self.points
        if locus in (Locus.eV, Locus.vE):
            e = oth if locus is Locus.eV else fat
            v = fat if locus is Locus.eV else oth
            u, w = self.edges[e]
            o = int(w) if int(u) == v else int(u)
            m = pts[v] + self.disp(v, o) / 2.0
            t = 1.0 / 3.0 if locus is Locus.eV else 2.0 / 3.0
            return pts[v] + (m - pts[v]) * t
        if locus in (Locus.fV, Locus.vF):
            f = oth if locus is Locus.fV else fat
            v = fat if locus is Locus.fV else oth
            a, b = (int(x) for x in self.face_ccw[f] if int(x) != v)
            g = pts[v] + (self.disp(v, a) + self.disp(v, b)) / 3.0
            t = 1.0 / 3.0 if locus is Locus.fV else 2.0 / 3.0
            return pts[v] + (g - pts[v]) * t
        # fE / eF: between edge midpoint and face barycenter
        e = fat if locus is Locus.fE else oth
        f = oth if locus is Locus.fE else fat
        u, v = (int(x) for x in self.edges[e])
        m = pts[u] + self.disp(u, v) / 2.0
        w = next(int(x) for x in self.face_ccw[f] if int(x) not in (u, v))
        g = pts[u] + (self.disp(u, v) + self.disp(u, w)) / 3.0
        t = 1.0 / 3.0 if locus is Locus.fE else 2.0 / 3.0
        return m + (g - m) * t

    def transfer_point_id(self, locus, flat):
        """(locus, father, slot) identity of a flat transfer-point index."""
        fat = int(self.tp_father[locus][flat])
        slot = int(flat - self.tp_starts[locus][fat])
        return locus, fat, slot

    # ------------------------------------------------------------------
    # simplicial graph distances

    def _gs_adjacency(self):
        if self._gs_adj is not None:
            return self._gs_adj
        nv, ne, nf = self.nv, self.ne, self.nf
        adj = [[] for _ in range(nv + ne + nf)]
        for ei, (u, v) in enumerate(self.edges):
            adj[int(u)].append(nv + ei)
            adj[int(v)].append(nv + ei)
            adj[nv + ei] += [int(u), int(v)]
        for fi, tri in enumerate(self.faces):
            for x in tri:
                adj[int(x)].append(nv + ne + fi)
                adj[nv + ne + fi].append(int(x))
            for k in range(3):
                u, v = sorted((int(tri[k]), int(tri[(k + 1) % 3])))
                e = self.edge_index[(u, v)]
                adj[nv + e].append(nv + ne + fi)
                adj[nv + ne + fi].append(nv + e)
        self._gs_adj = adj
        return adj

    def gs_index(self, cls: Locus, idx: int) -> int:
        off = {Locus.V: 0, Locus.E: self.nv, Locus.F: self.nv + self.ne}[cls]
        return off + idx

    def simplicial_distance(self, a, b) -> int:
        """BFS hop count between two simplexes in the simplicial graph."""
        adj = self._gs_adjacency()
        src = self.gs_index(*a)
        dst = self.gs_index(*b)
        if src == dst:
            return 0
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        if y == dst:
                            return dist[y]
                        nxt.append(y)
            frontier = nxt
        raise MediumError("disconnected simplicial graph")

    def vertex_adjacency(self):
        adj = [[] for _ in range(self.nv)]
        for u, v in self.edges:
            adj[int(u)].append(int(v))
            adj[int(v)].append(int(u))
        return adj

    def vertex_bfs(self, sources, blocked=None) -> np.ndarray:
        """Hop distances from a vertex set; -1 where unreachable."""
        adj = self.vertex_adjacency()
        dist = np.full(self.nv, -1, dtype=np.int64)
        frontier = []
        for s in sources:
            if blocked is not None and blocked[s]:
                continue
            dist[s] = 0
            frontier.append(int(s))
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if dist[y] < 0 and (blocked is None or not blocked[y]):
                        dist[y] = dist[x] + 1
                        nxt.append(y)
            frontier = nxt
        return dist

    def diameter(self) -> int:
        """Vertex-graph diameter.

        Exact single-BFS value on the (vertex-transitive) hexagonal torus;
        two-sweep lower bound otherwise.
        """
        d0 = self.vertex_bfs([0])
        if self.kind == "hex":
            return int(d0.max())
        far = int(np.argmax(d0))
        return int(self.vertex_bfs([far]).max())

    # ------------------------------------------------------------------
    # tiles

    def tiles(self) -> TileAssignment:
        """Default tile assignment (seed 0), cached."""
        if self._tiles is None:
            self._tiles = self.assign_tiles(0)
        return self._tiles

    def assign_tiles(self, rng_seed=0) -> TileAssignment:
        if self.kind == "hex":
            eo = np.empty(self.ne, dtype=np.int64)
            for (r, c, comp), e in self.hex_edge_id.items():
                eo[e] = self.hex_vertex_id(r, c)
            fo = np.empty(self.nf, dtype=np.int64)
            for (r, c, comp), f in self.hex_face_id.items():
                fo[f] = self.hex_vertex_id(r, c)
            return TileAssignment(eo, fo)
        rng = np.random.default_rng(rng_seed)
        loads = np.ones(self.nv, dtype=np.int64)
        eo = np.empty(self.ne, dtype=np.int64)
        fo = np.empty(self.nf, dtype=np.int64)
        items = [("e", i) for i in range(self.ne)] + [("f", i) for i in range(self.nf)]
        order = rng.permutation(len(items))
        for k in order:
            kind, i = items[int(k)]
            cand = self.edges[i] if kind == "e" else self.faces[i]
            win = min((int(v) for v in cand), key=lambda v: (loads[v], v))
            loads[win] += 1
            (eo if kind == "e" else fo)[i] = win
        return TileAssignment(eo, fo)

    # ------------------------------------------------------------------
    # validation

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        tri_ok = all(len(set(int(x) for x in f)) == 3 for f in self.faces)
        rep.add("triangle-faces", tri_ok, "every face is a vertex triple")
        if self.topology == "torus":
            rep.add("euler", self.nv - self.ne + self.nf == 0,
                    f"V-E+F={self.nv - self.ne + self.nf}")
            rep.add("edge-face-ratio", 3 * self.nf == 2 * self.ne, "3F=2E")
            rep.add("counts", self.ne == 3 * self.nv and self.nf == 2 * self.nv,
                    "E=3V, F=2V")
        else:
            rep.add("euler", self.euler() == 2, f"chi={self.euler()}")
            h = len(self.border_ring or ())
            rep.add("edge-face-ratio", 3 * self.nf == 2 * self.ne - h,
                    "3F=2E-hull")
            ring_ok = h >= 3
            if ring_ok:
                ring = self.border_ring
                for i in range(h):
                    u, v = ring[i], ring[(i + 1) % h]
                    if (min(u, v), max(u, v)) not in self.edge_index:
                        ring_ok = False
                        break
            rep.add("border-ring", ring_ok, "hull vertices form one cycle")
        pair_ok = True
        for locus in TRANSFER:
            part = self.tp_partner[locus]
            back = self.tp_partner[locus.partner]
            if not np.array_equal(back[part], np.arange(len(part))):
                pair_ok = False
        rep.add("transfer-pairing", pair_ok, "partner is an involution")
        inter_ok = True
        for locus in TRANSFER:
            succ = self.tp_succ[locus]
            ok = succ[self.tp_complete[locus]] >= 0
            inter_ok = inter_ok and bool(np.all(ok))
        rep.add("brother-interleave", inter_ok, "rotation cycles alternate")
        if self.kind == "hex":
            rep.add("degree-six", bool(np.all(self.degrees == 6)), "")
        vals, cnt = np.unique(self.degrees, return_counts=True)
        rep.degree_histogram = {int(v): int(c) for v, c in zip(vals, cnt)}
        return rep

    # ------------------------------------------------------------------
    # hex lattice indexing (kind == "hex" only)

    def hex_vertex_id(self, r, c):
        return (r % self.rows) * self.cols + (c % self.cols)

    # ------------------------------------------------------------------
    # serialization

    def to_json(self) -> str:
        doc = {
            "format": "cellcirc-medium",
            "version": 1,
            "kind": self.kind,
            "topology": self.topology,
            "points": [[round(float(x), 12), round(float(y), 12)]
                       for x, y in self.points],
            "edges": [[int(u), int(v)] for u, v in self.edges],
            "faces": [[int(a), int(b), int(c)] for a, b, c in self.faces],
        }
        if self.kind == "hex":
            doc["cols"], doc["rows"] = self.cols, self.rows
        if self.border_ring is not None:
            doc["border"] = [int(v) for v in self.border_ring]
        return json.dumps(doc, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @staticmethod
    def from_json(text: str) -> "SimplicialMedium":
        doc = json.loads(text)
        if doc.get("format") != "cellcirc-medium":
            raise MediumError("not a medium document")
        if doc["kind"] == "hex":
            m = build_hex_torus(doc["cols"], doc["rows"])
            if (m.edges.tolist() != doc["edges"] or m.faces.tolist() != doc["faces"]):
                raise MediumError("hex medium does not match canonical form")
        else:
            m = SimplicialMedium(doc["points"], doc["edges"], doc["faces"],
                                 doc["topology"], doc["kind"],
                                 border_ring=doc.get("border"))
        rep = m.validate()
        if not rep.passed:
            raise MediumError(f"loaded medium fails validation: {rep.failures()}")
        return m


# ----------------------------------------------------------------------
# builders

HEX_DIRS = ((0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1))  # CCW from +x
HEX_EDGE_COMPS = ("E", "S", "D")  # toward (0,1), (1,0), (1,-1)
HEX_FACE_COMPS = ("A", "B")       # A(r,c)={v,E,S}; B(r,c)={E,SE,S} of cell


def build_hex_torus(cols: int, rows: int) -> SimplicialMedium:
    """Perfect hexagonal toroidal medium on a cols x rows axial lattice."""
    if cols < 3 or rows < 3:
        raise MediumError(
            f"hex torus needs cols >= 3 and rows >= 3 (got {cols}x{rows}); "
            "smaller wraps create multi-edges")
    nv = cols * rows

    def vid(r, c):
        return (r % rows) * cols + (c % cols)

    points = np.empty((nv, 2))
    for r in range(rows):
        for c in range(cols):
            points[vid(r, c)] = (c + 0.5 * r, r * SQRT3_2)
    periods = np.array([[cols, 0.0], [0.5 * rows, rows * SQRT3_2]])

    raw_edges = []
    raw_cells = []
    for r in range(rows):
        for c in range(cols):
            v = vid(r, c)
            for comp, (dr, dc) in zip(HEX_EDGE_COMPS, HEX_DIRS[:3]):
                u = vid(r + dr, c + dc)
                raw_edges.append((min(v, u), max(v, u)))
                raw_cells.append((r, c, comp))
    order = sorted(range(len(raw_edges)), key=lambda i: raw_edges[i])
    edges = [raw_edges[i] for i in order]
    hex_edge_id = {raw_cells[i]: rank for rank, i in enumerate(order)}

    raw_faces = []
    raw_fcells = []
    for r in range(rows):
        for c in range(cols):
            a = (vid(r, c), vid(r, c + 1), vid(r + 1, c))
            b = (vid(r, c + 1), vid(r + 1, c + 1), vid(r + 1, c))
            raw_faces.append(tuple(sorted(a)))
            raw_fcells.append((r, c, "A"))
            raw_faces.append(tuple(sorted(b)))
            raw_fcells.append((r, c, "B"))
    forder = sorted(range(len(raw_faces)), key=lambda i: raw_faces[i])
    faces = [raw_faces[i] for i in forder]
    hex_face_id = {raw_fcells[i]: rank for rank, i in enumerate(forder)}

    m = SimplicialMedium(points, edges, faces, "torus", "hex",
                         periods=periods, cols=cols, rows=rows)
    m.hex_edge_id = hex_edge_id
    m.hex_face_id = hex_face_id
    m.hex_edge_cell = {v: k for k, v in hex_edge_id.items()}
    m.hex_face_cell = {v: k for k, v in hex_face_id.items()}
    return m


def _bridson(n, rng, k=30):
    """Poisson-disk sample of the unit square with at least n points."""
    radius = math.sqrt(0.72 / n)
    for _ in range(12):
        pts = _bridson_once(radius, rng, k)
        if len(pts) >= n:
            return np.array(pts[:n])
        radius *= 0.92
    raise MediumError(f"poisson-disk sampling failed to reach {n} points")


def _bridson_once(radius, rng, k):
    cell = radius / math.sqrt(2)
    gw = int(math.ceil(1.0 / cell))
    grid = -np.ones((gw, gw), dtype=np.int64)
    pts = []
    active = []

    def gc(p):
        return min(int(p[0] / cell), gw - 1), min(int(p[1] / cell), gw - 1)

    def fits(p):
        gx, gy = gc(p)
        for ix in range(max(0, gx - 2), min(gw, gx + 3)):
            for iy in range(max(0, gy - 2), min(gw, gy + 3)):
                j = grid[ix, iy]
                if j >= 0:
                    d = pts[j] - p
                    if d @ d < radius * radius:
                        return False
        return True

    def push(p):
        grid[gc(p)] = len(pts)
        pts.append(p)
        active.append(len(pts) - 1)

    push(rng.random(2))
    while active:
        i = int(rng.integers(len(active)))
        base = pts[active[i]]
        for _ in range(k):
            ang = rng.random() * 2 * math.pi
            rad = radius * (1 + rng.random())
            p = base + rad * np.array([math.cos(ang), math.sin(ang)])
            if 0 <= p[0] < 1 and 0 <= p[1] < 1 and fits(p):
                push(p)
                break
        else:
            active[i] = active[-1]
            active.pop()
    return pts


def _lloyd_step(pts):
    """One centroidal relaxation using box-mirrored Voronoi cells."""
    n = len(pts)
    mirrored = [pts]
    for axis, bound in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
        m = pts.copy()
        m[:, axis] = 2 * bound - m[:, axis]
        mirrored.append(m)
    vor = Voronoi(np.vstack(mirrored))
    out = pts.copy()
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            continue
        poly = vor.vertices[region]
        x, y = poly[:, 0], poly[:, 1]
        xs, ys = np.roll(x, -1), np.roll(y, -1)
        cross = x * ys - xs * y
        area = cross.sum() / 2.0
        if abs(area) < 1e-12:
            continue
        out[i, 0] = ((x + xs) * cross).sum() / (6 * area)
        out[i, 1] = ((y + ys) * cross).sum() / (6 * area)
    return np.clip(out, 0.0, 1.0)


def build_isotropic(n: int, rng_seed: int, relax_iters: int) -> SimplicialMedium:
    """Poisson-disk sampled, optionally relaxed, Delaunay-triangulated disk."""
    if n < 10:
        raise MediumError(f"isotropic medium needs n >= 10 (got {n})")
    rng = np.random.default_rng(rng_seed)
    pts = _bridson(n, rng)
    for _ in range(relax_iters):
        pts = _lloyd_step(pts)
    for attempt in range(4):
        try:
            tri = Delaunay(pts)
            hull = ConvexHull(pts)
            break
        except Exception:
            if attempt == 3:
                raise MediumError("triangulation kept degenerating after jitter")
            pts = pts + rng.normal(0, 1e-9, pts.shape)
    faces = sorted(tuple(sorted(int(x) for x in s)) for s in tri.simplices)
    edge_set = set()
    for a, b, c in faces:
        edge_set.update([(a, b), (a, c), (b, c)])
    edges = sorted(edge_set)
    ring = [int(v) for v in hull.vertices]  # counter-clockwise cycle
    return SimplicialMedium(pts, edges, faces, "bordered", "isotropic",
                            border_ring=ring)
