"""Compiled execution engines for hexagonal tori.

Both engines evaluate the per-tile gate program produced by the compiler:

* the gate-level engine replicates every gate across all tiles at once as
  whole-lattice boolean arrays (lateral reads become array rolls);
* the bit-parallel engine packs each lattice row into one machine word
  (bit = column), evaluates gates as word operations, rotates words by one
  bit position for lateral neighbor access, and pipelines rows so that
  only a sliding window of rows per intermediate plane is buffered.

Engines return the same callable shape the interpreter engine has:
``engine(config) -> {layer: values}``, bit-identical to the interpreter.
"""

from __future__ import annotations

import numpy as np

from .compiler import CompileError, build_tile_program
from .locus import Locus


def _layer_grids(medium, cd):
    """Per-layer component index grids (canonical ids at each cell)."""
    rows, cols = medium.rows, medium.cols
    grids = {}
    for name, t in cd.layers.items():
        if t.width != 1:
            raise CompileError("engines carry bool layers only")
        if t.locus is Locus.V:
            grids[name] = [np.arange(medium.nv).reshape(rows, cols)]
        elif t.locus is Locus.E:
            comps = []
            for comp in ("E", "S", "D"):
                g = np.empty((rows, cols), dtype=np.int64)
                for r in range(rows):
                    for c in range(cols):
                        g[r, c] = medium.hex_edge_id[(r, c, comp)]
                comps.append(g)
            grids[name] = comps
        elif t.locus is Locus.F:
            comps = []
            for comp in ("A", "B"):
                g = np.empty((rows, cols), dtype=np.int64)
                for r in range(rows):
                    for c in range(cols):
                        g[r, c] = medium.hex_face_id[(r, c, comp)]
                comps.append(g)
            grids[name] = comps
        else:
            raise CompileError(f"layers on {t.locus.value} are not supported")
    return grids


def gate_engine(cd, medium):
    """Whole-lattice gate-level evaluation of the compiled tile program."""
    if medium.kind != "hex":
        raise CompileError("the gate-level engine runs on hexagonal tori")
    prog = build_tile_program(cd, medium)
    grids = _layer_grids(medium, cd)
    rows, cols = medium.rows, medium.cols

    def read(planes, ref):
        arr = planes[ref.plane]
        if (ref.dr, ref.dc) != (0, 0):
            arr = np.roll(arr, shift=(-ref.dr, -ref.dc), axis=(0, 1))
        return arr ^ ref.neg

    def run(config):
        planes = {}
        for (name, comp), pid in prog.layer_planes.items():
            vals = config.fields[name].values.astype(bool)
            planes[pid] = vals[grids[name][comp]]
        for ins in prog.instrs:
            a = [read(planes, s) for s in ins.srcs]
            if ins.op == "AND":
                planes[ins.out] = a[0] & a[1]
            elif ins.op == "OR":
                planes[ins.out] = a[0] | a[1]
            elif ins.op == "XOR":
                planes[ins.out] = a[0] ^ a[1]
            else:
                planes[ins.out] = ~a[0]
        out = {}
        for name, refs in prog.outputs.items():
            comps = [read(planes, r) for r in refs]
            target = np.zeros(medium.locus_size(cd.layers[name].locus),
                              dtype=np.uint8)
            for comp, arr in enumerate(comps):
                target[grids[name][comp]] = arr
            out[name] = target
        return out

    return run


def bitparallel_engine(cd, medium):
    """Row-pipelined word engine; the word width is the column count."""
    if medium.kind != "hex":
        raise CompileError("the bit-parallel engine runs on hexagonal tori")
    for t in cd.layers.values():
        if t.locus is not Locus.V or t.width != 1:
            raise CompileError("bit-parallel layers must be boolV")
    prog = build_tile_program(cd, medium)
    rows, cols = medium.rows, medium.cols
    mask = (1 << cols) - 1

    # row lag per plane: a read at row offset +1 forces one extra tick
    nplanes = len(prog.planes)
    producer = {}
    for ins in prog.instrs:
        producer[ins.out] = ins
    lag = {}
    layer_pids = set(prog.layer_planes.values())

    def compute_lag(pid):
        if pid in lag:
            return lag[pid]
        if pid in layer_pids:
            lag[pid] = 0
            return 0
        ins = producer[pid]
        lag[pid] = max(compute_lag(s.plane) + max(s.dr, 0) for s in ins.srcs)
        return lag[pid]

    order = []
    for ins in prog.instrs:
        compute_lag(ins.out)
        order.append(ins)
    out_refs = {name: refs for name, refs in prog.outputs.items()}
    depth = max([lag[i.out] for i in order], default=0)
    for refs in out_refs.values():
        for s in refs:
            depth = max(depth, lag[s.plane] + max(s.dr, 0))

    # sliding-window sizes: how far back consumers reach
    span = {pid: 1 for pid in lag}
    for ins in order:
        for s in ins.srcs:
            need = lag[ins.out] - lag[s.plane] - s.dr + 1
            span[s.plane] = max(span[s.plane], need)
    for refs in out_refs.values():
        for s in refs:
            need = depth - lag[s.plane] - s.dr + 1
            span[s.plane] = max(span[s.plane], need)

    # warmup: upward references (negative row offsets) wrap to rows that are
    # only valid once the pipeline has streamed past one period boundary
    warm = {}

    def compute_warm(pid):
        if pid in warm:
            return warm[pid]
        if pid in layer_pids:
            warm[pid] = -(10 ** 9)
            return warm[pid]
        ins = producer[pid]
        warm[pid] = max([0] + [compute_warm(s.plane) - s.dr for s in ins.srcs])
        return warm[pid]

    warmup = 0
    for ins in order:
        compute_warm(ins.out)
    for refs in out_refs.values():
        for s in refs:
            warmup = max(warmup, compute_warm(s.plane) - s.dr)

    def rot(word, dc):
        if dc == 0:
            return word
        dc %= cols
        return ((word >> dc) | (word << (cols - dc))) & mask

    def run(config):
        layer_words = {}
        for (name, comp), pid in prog.layer_planes.items():
            vals = config.fields[name].values.reshape(rows, cols)
            layer_words[pid] = [
                int.from_bytes(np.packbits(row, bitorder="little").tobytes(),
                               "little") for row in vals]
        bufs = {pid: [0] * span[pid] for pid in lag if pid not in layer_pids}
        results = {name: [0] * rows for name in out_refs}

        def plane_row(pid, vrow):
            if pid in layer_pids:
                return layer_words[pid][vrow % rows]
            return bufs[pid][vrow % span[pid]]

        for t in range(warmup + rows + depth):
            for ins in order:
                vrow = t - lag[ins.out]
                if vrow < 0 or vrow >= warmup + rows + (depth - lag[ins.out]):
                    continue
                a = []
                for s in ins.srcs:
                    w = rot(plane_row(s.plane, vrow + s.dr), s.dc)
                    if s.neg:
                        w ^= mask
                    a.append(w)
                if ins.op == "AND":
                    w = a[0] & a[1]
                elif ins.op == "OR":
                    w = a[0] | a[1]
                elif ins.op == "XOR":
                    w = a[0] ^ a[1]
                else:
                    w = a[0] ^ mask
                bufs[ins.out][vrow % span[ins.out]] = w
            vout = t - depth - warmup
            if 0 <= vout < rows:
                for name, refs in out_refs.items():
                    w = rot(plane_row(refs[0].plane, vout + warmup + refs[0].dr),
                            refs[0].dc)
                    if refs[0].neg:
                        w ^= mask
                    results[name][(vout + warmup) % rows] = w

        out = {}
        for name, words in results.items():
            vals = np.zeros((rows, cols), dtype=np.uint8)
            for r, w in enumerate(words):
                b = np.frombuffer(w.to_bytes((cols + 7) // 8, "little"),
                                  dtype=np.uint8)
                vals[r] = np.unpackbits(b, bitorder="little")[:cols]
            out[name] = vals.reshape(-1)
        return out

    run.buffered_rows = {pid: span[pid] for pid in span if pid not in layer_pids}
    run.pipeline_depth = depth
    run.warmup_rows = warmup
    return run
