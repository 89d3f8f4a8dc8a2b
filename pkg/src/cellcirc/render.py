"""SVG rendering of fields over the Voronoi tiling of a medium's locus.

Every data-point owns the Voronoi cell of its embedded position; on the
hexagonal lattice the V/E/F cells form the rhombitrihexagonal tiling
(hexagons, rectangles, triangles).  With the transfer-locus flag the six
transfer locus join the seed set and each simplicial tile splits into a
central tile with peripheral subdivisions.  Output is deterministic:
fixed element order, coordinates rounded to three decimals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi

from .locus import SIMPLICIAL, TRANSFER, Locus


@dataclass
class RenderSpec:
    medium: object
    layers: list = field(default_factory=list)   # (Field, css color)
    show_transfer: bool = False
    scale: float = 40.0
    background: str = "#ffffff"
    outline: str = "#b0b0b0"


def _seed_positions(medium, loci):
    chunks = []
    index = {}
    off = 0
    for locus in loci:
        if locus is Locus.V:
            pos = medium.points
        elif locus is Locus.E:
            pos = np.array([medium.points[int(u)] + medium.disp(int(u), int(v)) / 2
                            for u, v in medium.edges])
        elif locus is Locus.F:
            rows = []
            for tri in medium.faces:
                a, b, c = (int(t) for t in tri)
                rows.append(medium.points[a]
                            + (medium.disp(a, b) + medium.disp(a, c)) / 3.0)
            pos = np.array(rows)
        else:
            pos = medium.transfer_positions(locus)
        index[locus] = (off, off + len(pos))
        off += len(pos)
        chunks.append(pos)
    return np.vstack(chunks), index


def _cells(medium, seeds):
    """Finite Voronoi cells of every seed, via replication or mirroring."""
    n = len(seeds)
    if medium.topology == "torus":
        copies = [seeds]
        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                if (i, j) != (0, 0):
                    copies.append(seeds + i * medium.periods[0]
                                  + j * medium.periods[1])
        allpts = np.vstack(copies)
    else:
        lo = seeds.min(axis=0) - 1e-9
        hi = seeds.max(axis=0) + 1e-9
        copies = [seeds]
        for axis, bound in ((0, lo[0]), (0, hi[0]), (1, lo[1]), (1, hi[1])):
            m = seeds.copy()
            m[:, axis] = 2 * bound - m[:, axis]
            copies.append(m)
        allpts = np.vstack(copies)
    vor = Voronoi(allpts)
    cells = []
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or not region:
            cells.append(None)
        else:
            cells.append(vor.vertices[region])
    return cells


def _poly(points, scale):
    return " ".join(f"{scale * x:.3f},{-scale * y:.3f}" for x, y in points)


def render_svg(spec: RenderSpec) -> str:
    m = spec.medium
    loci = list(SIMPLICIAL) + (list(TRANSFER) if spec.show_transfer else [])
    seeds, index = _seed_positions(m, loci)
    cells = _cells(m, seeds)
    s = spec.scale
    xs = seeds[:, 0] * s
    ys = -seeds[:, 1] * s
    pad = 1.2 * s
    x0, y0 = xs.min() - pad, ys.min() - pad
    w, h = xs.max() - xs.min() + 2 * pad, ys.max() - ys.min() + 2 * pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{x0:.3f} {y0:.3f} {w:.3f} {h:.3f}">',
        f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{w:.3f}" height="{h:.3f}" '
        f'fill="{spec.background}"/>',
    ]
    out.append(f'<g fill="none" stroke="{spec.outline}" stroke-width="0.6">')
    for locus in loci:
        a, b = index[locus]
        for i in range(a, b):
            if cells[i] is not None:
                out.append(f'<polygon points="{_poly(cells[i], s)}"/>')
    out.append("</g>")
    for fld, color in spec.layers:
        locus = fld.ftype.locus
        if locus not in index:
            raise ValueError(f"locus {locus.value} is not part of this tiling "
                             "(use show_transfer for transfer locus)")
        a, _ = index[locus]
        out.append(f'<g fill="{color}" stroke="none">')
        for p in fld.true_points():
            cell = cells[a + p]
            if cell is not None:
                out.append(f'<polygon points="{_poly(cell, s)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
