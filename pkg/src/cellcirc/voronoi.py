"""Discrete Voronoi-diagram circuit, extraction, and brute-force oracle.

The circuit grows seed blobs uniformly except on the closure of the merge
points, so blobs fill exactly their strict Voronoi cells: the vertices
strictly nearer (hop count) to one seed blob than to all others, minus the
vertices adjacent to a vertex of another cell.  The oracle recomputes the
same sets by multi-source BFS per seed blob.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blobs import closureV, layer, mergeE, mergeV, neighborhoodV, outsideV
from .fields import Field, FieldType
from .lang import Expr, land, lnot
from .locus import Locus
from .runtime import (CircuitDef, Configuration, RunResult, interpret,
                      run_until_fixpoint)


class VoronoiError(ValueError):
    pass


def vd_update(x=None) -> Expr:
    """Grow everywhere except on the closed merge points."""
    if x is None:
        x = layer("x")
    return land(neighborhoodV(x), lnot(closureV(mergeV(x), mergeE(x))))


def vd_circuit() -> CircuitDef:
    return CircuitDef("voronoi", {"x": FieldType(Locus.V, 1)},
                      {"x": vd_update()})


# ----------------------------------------------------------------------
# helpers


def label_components(medium, mask) -> tuple:
    """Connected components of a vertex mask; returns (labels, count)."""
    labels = np.full(medium.nv, -1, dtype=np.int64)
    adj = medium.vertex_adjacency()
    nxt = 0
    for s in range(medium.nv):
        if not mask[s] or labels[s] >= 0:
            continue
        labels[s] = nxt
        frontier = [s]
        while frontier:
            new = []
            for u in frontier:
                for w in adj[u]:
                    if mask[w] and labels[w] < 0:
                        labels[w] = nxt
                        new.append(w)
            frontier = new
        nxt += 1
    return labels, nxt


def seeds_to_field(medium, seeds) -> Field:
    if isinstance(seeds, Field):
        return seeds
    flat = []
    for group in seeds:
        flat.extend(int(v) for v in (group if hasattr(group, "__iter__") else [group]))
    return Field.from_points(medium, FieldType(Locus.V, 1), flat)


# ----------------------------------------------------------------------
# oracle


@dataclass
class VoronoiOracle:
    seed_labels: np.ndarray      # per vertex, seed-blob id or -1
    nblobs: int
    dist: np.ndarray             # (nblobs, V) hop distances (-1 unreachable)
    cell: np.ndarray             # unique-minimizer blob id, else -1 (tie/none)
    strict: np.ndarray           # bool V
    vertex_vd: np.ndarray        # equidistant vertices (>= 2 blobs at minimum)
    min_count: np.ndarray        # number of blobs attaining the minimum


def oracle_vd(medium, seeds) -> VoronoiOracle:
    """Exact distances and strict cells by per-blob multi-source BFS."""
    sf = seeds_to_field(medium, seeds)
    border = medium.border_mask
    mask = sf.values.astype(bool) & ~border
    labels, k = label_components(medium, mask)
    if k == 0:
        raise VoronoiError("no seeds")
    dist = np.empty((k, medium.nv), dtype=np.int64)
    for i in range(k):
        dist[i] = medium.vertex_bfs(np.nonzero(labels == i)[0], blocked=border)
    big = np.where(dist < 0, np.iinfo(np.int64).max, dist)
    dmin = big.min(axis=0)
    min_count = (big == dmin[None, :]).sum(axis=0)
    reachable = dmin < np.iinfo(np.int64).max
    cell = np.where(reachable & (min_count == 1), np.argmin(big, axis=0), -1)
    cell[border] = -1
    strict = cell >= 0
    adj = medium.vertex_adjacency()
    for v in range(medium.nv):
        if cell[v] < 0:
            continue
        for u in adj[v]:
            if cell[u] >= 0 and cell[u] != cell[v]:
                strict[v] = False
                break
    vertex_vd = reachable & (min_count >= 2) & ~border
    return VoronoiOracle(labels, k, dist, cell, strict, vertex_vd, min_count)


# ----------------------------------------------------------------------
# wavefront oracle (independent labeled BFS with the collision rules)


@dataclass
class WavefrontResult:
    filled: np.ndarray           # bool V at the wavefront fixpoint
    labels: np.ndarray           # blob id per filled vertex, -1 elsewhere
    steps: int
    self_collisions: bool        # some front met a front of its own blob

    @property
    def clean(self) -> bool:
        """True when every meeting was between distinct blobs.

        Exactly then the fixpoint coincides with the distance oracle's
        strict cells; self-wrapping fronts (possible on a torus, or around
        concave blob shapes) additionally block their own cut locus.
        """
        return not self.self_collisions


def wavefront_vd(medium, seeds, max_steps=None) -> WavefrontResult:
    """Grow labeled fronts one ring per step, blocking every local meeting.

    Direct reimplementation of the growth rule over adjacency lists: an
    empty vertex fills when it has a filled neighbor, its ring holds a
    single filled run, and it is not an endpoint of a merge-edge (empty
    rhombus with both endpoints touching fronts).
    """
    sf = seeds_to_field(medium, seeds)
    border = medium.border_mask
    filled = sf.values.astype(bool) & ~border
    labels, _ = label_components(medium, filled)
    adj = medium.vertex_adjacency()
    rings = []
    for v in range(medium.nv):
        ring = []
        for e in medium.vertex_edges[v]:
            a, b = medium.edges[e]
            ring.append(int(b) if int(a) == v else int(a))
        rings.append(ring)
    if max_steps is None:
        max_steps = 4 * medium.diameter() + 16
    self_collisions = False

    def ring_runs(v):
        """Maximal runs of filled ring vertices (cyclic on complete fans)."""
        ring = rings[v]
        vals = [filled[u] for u in ring]
        runs = []
        cur = None
        for i, on in enumerate(vals):
            if on:
                cur = [i] if cur is None else cur + [i]
            elif cur is not None:
                runs.append(cur)
                cur = None
        if cur is not None:
            runs.append(cur)
        if medium.vertex_complete[v] and len(runs) >= 2 and vals[0] and vals[-1]:
            runs[0] = runs.pop() + runs[0]
        return [[ring[i] for i in run] for run in runs]

    for t in range(max_steps):
        cand = []
        for v in range(medium.nv):
            if filled[v] or border[v]:
                continue
            if any(filled[u] for u in adj[v]):
                cand.append(v)
        if not cand:
            return WavefrontResult(filled, labels, t, self_collisions)
        blocked = set()
        fill_label = {}
        for v in cand:
            vruns = ring_runs(v)
            if len(vruns) >= 2:
                blocked.add(v)
                lbls = {int(labels[u]) for run in vruns for u in run}
                if len(lbls) < len(vruns):
                    self_collisions = True
            elif vruns:
                fill_label[v] = int(labels[vruns[0][0]])
        # merge-edges: empty rhombus, both endpoints touching a front
        # (a frozen border endpoint still participates in the detection)
        for ei, (u, v) in enumerate(medium.edges):
            u, v = int(u), int(v)
            if filled[u] or filled[v]:
                continue
            if not any(filled[w] for w in adj[u]):
                continue
            if not any(filled[w] for w in adj[v]):
                continue
            rhombus_filled = False
            apexes = []
            for f in medium.edge_faces[ei]:
                for w in medium.faces[f]:
                    w = int(w)
                    if filled[w]:
                        rhombus_filled = True
                    if w not in (u, v):
                        apexes.append(w)
            if rhombus_filled:
                continue
            blocked.add(u)
            blocked.add(v)
            lu = {int(labels[w]) for w in adj[u] if filled[w]}
            lv = {int(labels[w]) for w in adj[v] if filled[w]}
            if lu & lv:
                self_collisions = True
        progress = False
        for v, lbl in fill_label.items():
            if v in blocked:
                continue
            filled[v] = True
            labels[v] = lbl
            progress = True
        if not progress:
            return WavefrontResult(filled, labels, t, self_collisions)
    return WavefrontResult(filled, labels, max_steps, self_collisions)


# ----------------------------------------------------------------------
# circuit runs


@dataclass
class VoronoiRun:
    seeds: Field
    final: Field
    t_c: int | None
    timed_out: bool
    vertex_vd: Field             # complement of the filled fixpoint (interior)
    multi_vertices: Field        # empty vertices with an all-empty ring
    cell_assignment: np.ndarray  # seed-blob id, -1 tie/boundary, -2 border
    nblobs: int
    blob_counts: list            # per recorded step
    steps: int


def _check_seeds(medium, sf: Field):
    vals = sf.values.astype(bool)
    if not vals.any():
        raise VoronoiError("empty seed set")
    if medium.topology == "bordered" and vals[medium.border_ring].any():
        raise VoronoiError("seeds on the border ring are frozen to zero")
    labels, k = label_components(medium, vals & ~medium.border_mask)
    for u, v in medium.edges:
        a, b = labels[int(u)], labels[int(v)]
        if a >= 0 and b >= 0 and a != b:
            raise VoronoiError(
                "seed blobs at distance 1 (adjacent) are rejected; "
                "merge detection needs a separating vertex or edge")
    return labels, k


def run_vd(medium, seeds, skip_prob=0.0, rng=None, max_steps=None,
           engine=None, keep_history=False) -> VoronoiRun:
    sf = seeds_to_field(medium, seeds)
    seed_labels, k = _check_seeds(medium, sf)
    cd = vd_circuit()
    if max_steps is None:
        max_steps = 2 * medium.diameter() + 8
    start = Configuration({"x": sf}, 0)
    blob_counts = []

    def on_step(conf):
        mask = conf.fields["x"].values.astype(bool) & ~medium.border_mask
        blob_counts.append(label_components(medium, mask)[1])

    res = run_until_fixpoint(cd, medium, start, max_steps, skip_prob, rng,
                             engine, keep_history=keep_history, on_step=on_step)
    final = res.config.fields["x"]
    border = medium.border_mask
    filled = final.values.astype(bool)
    vvd = (~filled) & ~border
    vertex_vd = Field(medium, FieldType(Locus.V, 1), vvd.astype(np.uint8))
    multi = interpret(outsideV(layer("x")), medium, {"x": final}).values.astype(bool)
    multi &= ~filled & ~border
    multi_f = Field(medium, FieldType(Locus.V, 1), multi.astype(np.uint8))
    flabels, fk = label_components(medium, filled & ~border)
    assign = np.full(medium.nv, -1, dtype=np.int64)
    comp_seed = np.full(max(fk, 1), -1, dtype=np.int64)
    for v in range(medium.nv):
        if flabels[v] >= 0 and seed_labels[v] >= 0:
            comp_seed[flabels[v]] = seed_labels[v]
    for v in range(medium.nv):
        if flabels[v] >= 0:
            assign[v] = comp_seed[flabels[v]]
    assign[border] = -2
    return VoronoiRun(sf, final, res.t_c, res.timed_out, vertex_vd, multi_f,
                      assign, k, blob_counts, res.steps)


@dataclass
class DiffReport:
    mismatches: list             # vs the wavefront oracle (always applicable)
    distance_mismatches: list    # vs distance-strict cells (clean runs only)
    clean: bool                  # no same-blob front meetings occurred
    subset_ok: bool              # filled set within the distance-strict set
    blob_count_ok: bool
    multi_disjoint: bool

    @property
    def exact(self):
        return not self.mismatches and (not self.clean or
                                        not self.distance_mismatches)

    @property
    def ok(self):
        return (self.exact and self.subset_ok and self.blob_count_ok
                and self.multi_disjoint)


def compare(run: VoronoiRun, oracle: VoronoiOracle, medium,
            wave: WavefrontResult | None = None) -> DiffReport:
    """Check the fixpoint against both oracles.

    The filled fixpoint must equal the wavefront oracle exactly, and must
    equal the distance oracle's strict cells whenever no front met a front
    of its own blob (on a torus a sparse cell can wrap around and block its
    own cut locus, which hop distances to blobs cannot see).  The filled
    set is a subset of the distance-strict set unconditionally.
    """
    if wave is None:
        wave = wavefront_vd(medium, run.seeds)
    filled = run.final.values.astype(bool) & ~medium.border_mask
    mism = [int(v) for v in np.nonzero(filled != wave.filled)[0]]
    dmism = [int(v) for v in np.nonzero(filled != oracle.strict)[0]]
    subset_ok = not bool((filled & ~oracle.strict).any())
    counts_ok = all(c == run.nblobs for c in run.blob_counts)
    multi = run.multi_vertices.values.astype(bool)
    disjoint = not bool((multi & oracle.strict).any())
    return DiffReport(mism, dmism, wave.clean, subset_ok, counts_ok, disjoint)
