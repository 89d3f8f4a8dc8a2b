"""Work measurement: circuit evaluation vs staged per-tile recomputation.

A composed growth circuit evaluates ~8k gates per tile per sweep.  The
lookup-table translation cannot ship intermediate fields between tiles, so
each tile recomputes stage h over the whole ball of radius r-h around it;
the measured work grows like r^3 while the circuit's grows like r.
Both measurements count gate evaluations actually performed.
"""

from __future__ import annotations

import numpy as np

from .compiler import build_tile_program
from .runtime import growth_circuit

TILE_GATES_PER_STAGE = 8  # one neighborhood stage on the hexagonal lattice


def circuit_work_per_tile(medium, r) -> int:
    """Gates evaluated per tile for one sweep of the compiled circuit."""
    prog = build_tile_program(growth_circuit(r), medium)
    return prog.gate_count


def staged_work_per_tile(medium, r, center, x_vals) -> tuple:
    """Ops for one tile to recompute neighborhood^r stage by stage.

    Returns (ops, value at the center), with the value computed for real so
    the measurement can be cross-checked against the circuit.
    """
    adj = medium.vertex_adjacency()
    dist = medium.vertex_bfs([center])
    if int(dist.max()) < r:
        raise ValueError(f"medium too small for radius {r}")
    cur = {v: int(x_vals[v]) for v in range(medium.nv) if dist[v] <= r}
    ops = 0
    for h in range(1, r + 1):
        need = r - h
        nxt = {}
        for v, dv in cur.items():
            if dist[v] > need:
                continue
            acc = cur[v]
            for u in adj[v]:
                acc |= cur[u]
            ops += TILE_GATES_PER_STAGE
            nxt[v] = acc
        cur = nxt
    return ops, cur[center]


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)),
                            np.log(np.asarray(ys, float)), 1)[0])


def measure_scaling(medium, radii, rng_seed=0) -> dict:
    """Measured work and log-log slopes for both evaluation strategies."""
    rng = np.random.default_rng(rng_seed)
    x_vals = (rng.random(medium.nv) < 0.5).astype(np.uint8)
    center = medium.nv // 2
    circuit = [circuit_work_per_tile(medium, r) for r in radii]
    staged = []
    for r in radii:
        ops, value = staged_work_per_tile(medium, r, center, x_vals)
        staged.append(ops)
    return {
        "radii": list(radii),
        "circuit_work": circuit,
        "staged_work": staged,
        "circuit_slope": loglog_slope(radii, circuit),
        "staged_slope": loglog_slope(radii, staged),
    }
