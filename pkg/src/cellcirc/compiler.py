"""Lower expressions to gates per tile; compute density, radius, trans-wires.

Cost model (gates, after subexpression sharing over the whole DAG):

* a reduction onto Y costs co-arity - 1 binary gates per Y-point;
* a pointwise operation costs one gate per data-point of its locus;
* negation of a stored layer costs one inverter per data-point; negation of
  a computed field is absorbed into the producing gate's output (0 gates);
  the unfused figure is reported as ``raw``;
* broadcasts, transfers, rotations, symmetry, constants and shifts are
  wiring (0 gates);
* the ``sum of V-fathered bools >= 4`` idiom lowers to a fixed 17-gate
  network per vertex (degree 6); other integer operations get coarse
  adder-chain prices and cannot be lowered to a netlist.

``count_gates(e, medium, given=...)`` treats the given auxiliary
expressions as already materialized, which is how the published costs of
the meet-edge family are stated (their shared frontier field is priced
once, inside the vertex component).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fields import FieldType
from .lang import (Broadcast, Const, Expr, LayerRead, Pointwise, Reduce,
                   RotateCCW, RotateCW, Symmetry, Transfer, children,
                   typecheck, walk)
from .locus import Locus


class CompileError(ValueError):
    pass


# ----------------------------------------------------------------------
# threshold-sum subcircuit


@dataclass(frozen=True)
class Gate:
    op: str          # AND | OR | XOR | NOT
    args: tuple      # indices into inputs (negative: -1-i) or gate list


def _full_adder(gates, a, b, c):
    """Unshared-carry full adder; returns (sum, carry) gate ids, 6 gates."""
    def g(op, *args):
        gates.append(Gate(op, args))
        return len(gates) - 1
    x1 = g("XOR", a, b)
    s = g("XOR", x1, c)
    t1 = g("AND", a, b)
    t2 = g("OR", a, b)
    t3 = g("AND", c, t2)
    carry = g("OR", t1, t3)
    return s, carry


def threshold_ge4_network(n_inputs: int):
    """Gate network computing (sum of n bits) >= 4, exact on all inputs.

    The 6-input form uses 17 gates.  Inputs are referenced as -1-i.
    """
    gates = []

    def g(op, *args):
        gates.append(Gate(op, args))
        return len(gates) - 1

    inp = [-1 - i for i in range(n_inputs)]
    if n_inputs == 6:
        s1, c1 = _full_adder(gates, inp[0], inp[1], inp[2])
        s2, c2 = _full_adder(gates, inp[3], inp[4], inp[5])
        both = g("AND", c1, c2)
        either = g("OR", c1, c2)
        ss = g("AND", s1, s2)
        mid = g("AND", either, ss)
        g("OR", both, mid)
    elif n_inputs == 7:
        s1, c1 = _full_adder(gates, inp[0], inp[1], inp[2])
        s2, c2 = _full_adder(gates, inp[3], inp[4], inp[5])
        extra = inp[6]
        both = g("AND", c1, c2)
        either = g("OR", c1, c2)
        m1 = g("AND", s1, s2)
        m2 = g("OR", s1, s2)
        m3 = g("AND", m2, extra)
        maj = g("OR", m1, m3)
        mid = g("AND", either, maj)
        g("OR", both, mid)
    elif n_inputs == 5:
        s1, c1 = _full_adder(gates, inp[0], inp[1], inp[2])
        m1 = g("AND", s1, inp[3])
        m2 = g("OR", s1, inp[3])
        m3 = g("AND", m2, inp[4])
        maj = g("OR", m1, m3)
        g("AND", c1, maj)
    elif n_inputs == 4:
        # sum >= 4 iff all four are set
        t1 = g("AND", inp[0], inp[1])
        t2 = g("AND", inp[2], inp[3])
        g("AND", t1, t2)
    else:
        raise CompileError(f"no threshold network for {n_inputs} inputs")
    return gates


def eval_threshold_network(gates, inputs):
    vals = []
    def val(ref):
        return inputs[-1 - ref] if ref < 0 else vals[ref]
    for gate in gates:
        a = [val(r) for r in gate.args]
        if gate.op == "AND":
            vals.append(a[0] & a[1])
        elif gate.op == "OR":
            vals.append(a[0] | a[1])
        elif gate.op == "XOR":
            vals.append(a[0] ^ a[1])
        else:
            vals.append(a[0] ^ 1)
    return vals[-1]


# ----------------------------------------------------------------------
# the nbcc >= k idiom


def match_threshold(node, types) -> tuple | None:
    """Match GE(Reduce(PLUS, bool over V-fathered locus), 4)-shaped nodes.

    Returns (reduce_node, bool_child) or None.  A right-shift between the
    sum and the compare is normalized away ((a >> s) >= k  iff  a >= k<<s).
    """
    if not (isinstance(node, Pointwise) and node.op == "GE"):
        return None
    k = node.k
    inner = node.args[0]
    while isinstance(inner, Pointwise) and inner.op == "SHR":
        k <<= inner.k
        inner = inner.args[0]
    if not (isinstance(inner, Reduce) and inner.op == "PLUS"):
        return None
    child = inner.child
    t = types[child]
    if t.width != 1 or t.locus.father is not Locus.V or k != 4:
        return None
    return inner, child


# ----------------------------------------------------------------------
# gate counting


def _coarity_sum(medium, locus):
    """Sum over fathers of (slots - 1): binary gates of one reduction."""
    starts = medium.tp_starts[locus]
    return int((starts[1:] - starts[:-1] - 1).sum())


def count_gates(e: Expr, medium, given=(), fused=True, _types=None) -> int:
    """Total gate count over the whole medium (per-tile = total / V on hex)."""
    types = _types if _types is not None else {}
    typecheck(e, medium, types)
    given = set(given)
    counted = set()
    total = 0
    stack = [e]
    order = []
    while stack:
        node = stack.pop()
        if node in counted or node in given:
            continue
        counted.add(node)
        order.append(node)
        for c in children(node):
            stack.append(c)

    absorbed = set()
    for node in order:
        m = match_threshold(node, types) if node not in given else None
        if m:
            absorbed.add(m[0])

    for node in order:
        t = types[node]
        npts = medium.locus_size(t.locus)
        if isinstance(node, (LayerRead, Const, Broadcast, Transfer,
                             RotateCW, RotateCCW, Symmetry)):
            continue
        if isinstance(node, Reduce):
            if node in absorbed:
                continue
            child_locus = types[node.child].locus
            folds = _coarity_sum(medium, child_locus)
            if node.op == "PLUS":
                total += folds * 5 * types[node].width  # adder chain
            elif node.op in ("MIN", "MAX"):
                total += folds * 4 * types[node].width
            else:
                total += folds
            continue
        # pointwise
        op = node.op
        if op == "NOT":
            if fused and not isinstance(node.args[0], (LayerRead, Const)):
                continue
            total += npts
        elif op == "SHR":
            continue
        elif op == "GE":
            matched = match_threshold(node, types)
            if matched:
                starts = medium.tp_starts[types[matched[1]].locus]
                degs = starts[1:] - starts[:-1]
                for d in np.unique(degs):
                    nth = len(threshold_ge4_network(int(d)))
                    total += nth * int((degs == d).sum())
            else:
                total += npts * types[node.args[0]].width
        elif op in ("AND", "OR", "XOR"):
            total += npts
        elif op == "ADD":
            total += npts * 5 * t.width
        elif op in ("MIN", "MAX"):
            total += npts * 4 * t.width
        else:
            raise CompileError(f"no gate cost for {op}")
    return total


def gates_per_tile(e: Expr, medium, given=(), fused=True) -> float:
    total = count_gates(e, medium, given=given, fused=fused)
    per = total / medium.nv
    return int(per) if per == int(per) else per


# ----------------------------------------------------------------------
# radius (finite-state automaton over transfer parities)

VERTEX = ("V", "")
_SUBTYPE_RANK = {"": 0, "p": 0, "r": 1}


def _fsa_transfer(state, to_cls):
    cls, sub = state
    if to_cls == "V":
        return 1, VERTEX
    if cls == "V":
        return 1, (to_cls, "p")
    if cls == "E" and to_cls == "F":
        return (0, ("F", "r")) if sub == "p" else (0, ("F", "p"))
    if cls == "F" and to_cls == "E":
        return (1, ("E", "p")) if sub == "r" else (1, ("E", "r"))
    raise CompileError(f"no transfer {cls}->{to_cls}")


def radius_of(e: Expr, medium) -> int:
    """Radius via the transfer-parity automaton (layers start at 0)."""
    types = {}
    typecheck(e, medium, types)
    info = {}
    for node in walk(e):
        t = types[node]
        if isinstance(node, (LayerRead, Const)):
            cls = t.locus.father.value
            info[node] = (0, VERTEX if cls == "V" else (cls, "p"))
        elif isinstance(node, Transfer):
            r, st = info[node.child]
            dr, st2 = _fsa_transfer(st, t.locus.father.value)
            info[node] = (r + dr, st2)
        elif isinstance(node, Pointwise):
            best = (-1, VERTEX)
            for a in node.args:
                r, st = info[a]
                if (r, _SUBTYPE_RANK[st[1]]) > (best[0], _SUBTYPE_RANK[best[1][1]]):
                    best = (r, st)
            info[node] = best
        else:  # broadcast, reduce, rotations, symmetry keep the state
            info[node] = info[node.child]
    return info[e][0]


# ----------------------------------------------------------------------
# hex tile program (shared IR for the gate-level and bit-parallel engines)


@dataclass(frozen=True)
class Ref:
    plane: int
    dr: int = 0
    dc: int = 0
    neg: bool = False

    def shifted(self, dr, dc):
        return Ref(self.plane, self.dr + dr, self.dc + dc, self.neg)

    def negated(self):
        return Ref(self.plane, self.dr, self.dc, not self.neg)


@dataclass(frozen=True)
class Instr:
    op: str           # AND | OR | XOR | NOT
    out: int
    srcs: tuple


LOCUS_COMPS = {
    Locus.V: 1, Locus.E: 3, Locus.F: 2,
    Locus.eV: 6, Locus.vE: 6, Locus.eF: 6, Locus.fE: 6, Locus.vF: 6, Locus.fV: 6,
}


class HexPlaneMap:
    """Decode flat point indices of a seam-free reference cell.

    Components are translation-invariant labels: V has one plane; E three
    (toward +col, +row, and the +row/-col diagonal); F two (upper and lower
    triangle); every transfer locus six (one per slot pattern).
    """

    def __init__(self, medium, ref=(3, 3)):
        if medium.kind != "hex" or medium.cols < 8 or medium.rows < 8:
            raise CompileError("plane map needs a hex torus at least 8x8")
        self.m = medium
        self.r0, self.c0 = ref
        self._v0 = medium.hex_vertex_id(*ref)
        # per-locus: list of flat indices (the reference cell's points)
        self.ref_points = {}
        self._decoder = {}
        self._build()

    def _vertex_cell(self, v):
        return divmod(int(v), self.m.cols)

    def _build(self):
        m = self.m
        v0 = self._v0
        r0, c0 = self.r0, self.c0
        self.ref_points[Locus.V] = [v0]
        self.ref_points[Locus.E] = [m.hex_edge_id[(r0, c0, comp)]
                                    for comp in ("E", "S", "D")]
        self.ref_points[Locus.F] = [m.hex_face_id[(r0, c0, comp)]
                                    for comp in ("A", "B")]
        for locus in (Locus.eV, Locus.fV):
            s = m.tp_starts[locus][v0]
            self.ref_points[locus] = list(range(int(s), int(s) + 6))
        for locus in (Locus.vE, Locus.fE):
            pts = []
            for comp in ("E", "S", "D"):
                e = m.hex_edge_id[(r0, c0, comp)]
                s = int(m.tp_starts[locus][e])
                pts += [s, s + 1]
            self.ref_points[locus] = pts
        for locus in (Locus.vF, Locus.eF):
            pts = []
            for comp in ("A", "B"):
                f = m.hex_face_id[(r0, c0, comp)]
                s = int(m.tp_starts[locus][f])
                pts += [s, s + 1, s + 2]
            self.ref_points[locus] = pts

    def cell_of(self, locus, flat):
        """(r, c) owning cell of a flat index plus its component number."""
        m = self.m
        if locus is Locus.V:
            r, c = self._vertex_cell(flat)
            return r, c, 0
        if locus is Locus.E:
            r, c, comp = m.hex_edge_cell[int(flat)]
            return r, c, ("E", "S", "D").index(comp)
        if locus is Locus.F:
            r, c, comp = m.hex_face_cell[int(flat)]
            return r, c, ("A", "B").index(comp)
        fat = int(m.tp_father[locus][flat])
        slot = int(flat - m.tp_starts[locus][fat])
        if locus in (Locus.eV, Locus.fV):
            r, c = self._vertex_cell(fat)
            return r, c, slot
        if locus in (Locus.vE, Locus.fE):
            r, c, comp = m.hex_edge_cell[fat]
            base = ("E", "S", "D").index(comp) * 2
            if locus is Locus.vE:
                # canonical slot order flips at wrap seams; relabel by cell
                vtx = int(m.edges[fat][slot])
                own = 0 if self._vertex_cell(vtx) == (r, c) else 1
                return r, c, base + own
            # fE: identify the face side by its cell-relative offset
            face = int(m.tp_other[locus][flat])
            fr, fc, fcomp = m.hex_face_cell[face]
            offs = ((fr - r) % m.rows, (fc - c) % m.cols, fcomp)
            table = {
                "E": {(0, 0, "A"): 0, (m.rows - 1, 0, "B"): 1},
                "S": {(0, 0, "A"): 0, (0, m.cols - 1, "B"): 1},
                "D": {(0, m.cols - 1, "A"): 0, (0, m.cols - 1, "B"): 1},
            }[comp]
            return r, c, base + table[offs]
        # vF / eF
        r, c, comp = m.hex_face_cell[fat]
        return r, c, ("A", "B").index(comp) * 3 + slot

    def decode(self, locus, flat):
        """Component and cell offset relative to the reference cell."""
        r, c, comp = self.cell_of(locus, flat)
        dr = (r - self.r0 + self.m.rows // 2) % self.m.rows - self.m.rows // 2
        dc = (c - self.c0 + self.m.cols // 2) % self.m.cols - self.m.cols // 2
        return comp, dr, dc


@dataclass
class TileProgram:
    """Per-tile straight-line gate program over translation-invariant planes."""

    planes: list                 # debug names
    layer_planes: dict           # (layer, comp) -> plane id
    instrs: list
    outputs: dict                # layer name -> tuple of Refs (per comp)
    layer_comps: dict            # layer name -> number of components

    @property
    def gate_count(self):
        return len(self.instrs)

    def transwire_count(self):
        wires = set()
        for ins in self.instrs:
            for s in ins.srcs:
                if (s.dr, s.dc) != (0, 0):
                    wires.add((s.plane, s.dr, s.dc))
        for refs in self.outputs.values():
            for s in refs:
                if (s.dr, s.dc) != (0, 0):
                    wires.add((s.plane, s.dr, s.dc))
        return len(wires)

    def netlist(self):
        doc = []
        for i, ins in enumerate(self.instrs):
            doc.append({
                "gate": i,
                "op": ins.op,
                "out": self.planes[ins.out],
                "in": [{"plane": self.planes[s.plane], "dr": s.dr,
                        "dc": s.dc, "neg": s.neg} for s in ins.srcs],
            })
        return doc


class _TileBuilder:
    def __init__(self, medium, types):
        self.m = medium
        self.types = types
        # reference medium only for extracting offset patterns
        if medium.cols >= 8 and medium.rows >= 8:
            self.pm = HexPlaneMap(medium)
        else:
            from .medium import build_hex_torus
            self.pm = HexPlaneMap(build_hex_torus(8, 8))
        self.planes = []
        self.instrs = []
        self.layer_planes = {}
        self.memo = {}

    def new_plane(self, name):
        self.planes.append(name)
        return len(self.planes) - 1

    def emit(self, op, name, srcs):
        out = self.new_plane(name)
        self.instrs.append(Instr(op, out, tuple(srcs)))
        return Ref(out)

    def layer_ref(self, name, comp):
        key = (name, comp)
        if key not in self.layer_planes:
            self.layer_planes[key] = self.new_plane(f"{name}[{comp}]")
        return Ref(self.layer_planes[key])

    def lower(self, e):
        if e in self.memo:
            return self.memo[e]
        t = self.types[e]
        ncomp = LOCUS_COMPS[t.locus]
        pm = self.pm
        name = type(e).__name__

        if isinstance(e, LayerRead):
            if t.width != 1:
                raise CompileError("netlists carry bool planes only")
            refs = tuple(self.layer_ref(e.name, k) for k in range(ncomp))
        elif isinstance(e, Const):
            raise CompileError("constants are not materialized in tile programs")
        elif isinstance(e, Broadcast):
            src = self.lower(e.child)
            refs = []
            for flat in pm.ref_points[t.locus]:
                fat = pm.m.tp_father[t.locus][flat] if t.locus.is_transfer else flat
                comp, dr, dc = pm.decode(self.types[e.child].locus, int(fat))
                refs.append(src[comp].shifted(dr, dc))
            refs = tuple(refs)
        elif isinstance(e, Transfer):
            src = self.lower(e.child)
            cl = self.types[e.child].locus
            refs = []
            for flat in pm.ref_points[t.locus]:
                part = int(pm.m.tp_partner[t.locus][flat])
                comp, dr, dc = pm.decode(cl, part)
                refs.append(src[comp].shifted(dr, dc))
            refs = tuple(refs)
        elif isinstance(e, (RotateCW, RotateCCW, Symmetry)):
            src = self.lower(e.child)
            cl = self.types[e.child].locus
            table = {RotateCW: pm.m.tp_succ, RotateCCW: pm.m.tp_pred,
                     Symmetry: pm.m.tp_sym}[type(e)]
            refs = []
            for flat in pm.ref_points[t.locus]:
                other = int(table[t.locus][flat])
                if other < 0:
                    raise CompileError("undefined communication point")
                comp, dr, dc = pm.decode(cl, other)
                refs.append(src[comp].shifted(dr, dc))
            refs = tuple(refs)
        elif isinstance(e, Reduce):
            if e.op not in ("AND", "OR", "XOR"):
                raise CompileError(f"{e.op}-reduction netlist outside the "
                                   "threshold idiom is not supported")
            src = self.lower(e.child)
            cl = self.types[e.child].locus
            refs = []
            for flat in pm.ref_points[t.locus]:
                s = int(pm.m.tp_starts[cl][flat])
                ecount = int(pm.m.tp_starts[cl][flat + 1] - s)
                ins = []
                for i in range(ecount):
                    comp, dr, dc = pm.decode(cl, s + i)
                    ins.append(src[comp].shifted(dr, dc))
                acc = ins[0]
                for nxt in ins[1:]:
                    acc = self.emit(e.op, f"red{len(self.instrs)}", (acc, nxt))
                refs.append(acc)
            refs = tuple(refs)
        elif isinstance(e, Pointwise):
            if e.op == "NOT":
                src = self.lower(e.args[0])
                if isinstance(e.args[0], (LayerRead, Const)):
                    refs = tuple(self.emit("NOT", f"not{k}", (src[k],))
                                 for k in range(ncomp))
                else:
                    refs = tuple(r.negated() for r in src)
            elif e.op in ("AND", "OR", "XOR"):
                a = self.lower(e.args[0])
                b = self.lower(e.args[1])
                refs = tuple(self.emit(e.op, f"pw{len(self.instrs)}",
                                       (a[k], b[k])) for k in range(ncomp))
            elif e.op == "GE":
                matched = match_threshold(e, self.types)
                if not matched:
                    raise CompileError("integer compare outside the "
                                       "threshold idiom is not supported")
                _, child = matched
                src = self.lower(child)
                cl = self.types[child].locus
                flats = pm.ref_points[cl]
                ins = []
                for flat in flats:
                    comp, dr, dc = pm.decode(cl, int(flat))
                    ins.append(src[comp].shifted(dr, dc))
                net = threshold_ge4_network(len(ins))
                grefs = []
                for gate in net:
                    srcs = []
                    for a in gate.args:
                        srcs.append(ins[-1 - a] if a < 0 else grefs[a])
                    grefs.append(self.emit(gate.op, f"thr{len(self.instrs)}", srcs))
                refs = (grefs[-1],)
            else:
                raise CompileError(f"{e.op} is not supported in tile programs")
        else:
            raise CompileError(f"cannot lower {name}")
        self.memo[e] = refs
        return refs


def build_tile_program(cd, medium) -> TileProgram:
    """Lower a circuit definition to the per-tile gate program (hex only)."""
    if medium.kind != "hex":
        raise CompileError("tile programs exist for hexagonal media only")
    types = {}
    for expr in cd.updates.values():
        typecheck(expr, medium, types)
    b = _TileBuilder(medium, types)
    outputs = {}
    layer_comps = {}
    for name, expr in cd.updates.items():
        outputs[name] = b.lower(expr)
        layer_comps[name] = LOCUS_COMPS[types[expr].locus]
    return TileProgram(b.planes, b.layer_planes, b.instrs, outputs, layer_comps)


# ----------------------------------------------------------------------
# compilation entry point


@dataclass
class CompiledCircuit:
    circuit: object
    medium: object
    gates_per_tile: float
    gates_raw_per_tile: float
    gates_total: int
    radius: int
    layer_radius: dict
    transwires_per_tile: int | None
    memory_density: float
    tile_program: TileProgram | None

    def report(self) -> dict:
        return {
            "circuit": getattr(self.circuit, "name", "expr"),
            "gates_per_tile": self.gates_per_tile,
            "gates_raw_per_tile": self.gates_raw_per_tile,
            "gates_total": self.gates_total,
            "radius": self.radius,
            "transwires_per_tile": self.transwires_per_tile,
            "memory_density": self.memory_density,
            "layers": {n: {"type": repr(t), "radius": self.layer_radius.get(n)}
                       for n, t in self.circuit.layers.items()},
        }


def compile_circuit(cd, medium, tile=True) -> CompiledCircuit:
    from .runtime import CircuitDef
    if isinstance(cd, Expr):
        layers = {n.name: n.ftype for n in walk(cd) if isinstance(n, LayerRead)}
        cd = CircuitDef("expr", layers, {"_out": cd})
    total = 0
    raw = 0
    layer_radius = {}
    for name, expr in cd.updates.items():
        layer_radius[name] = radius_of(expr, medium)
    # updates share their subexpressions: count over the union DAG
    seen = set()
    for expr in cd.updates.values():
        total += count_gates(expr, medium, given=seen & set(walk(expr)))
        raw += count_gates(expr, medium, given=seen & set(walk(expr)),
                           fused=False)
        seen |= set(walk(expr))
    program = None
    transwires = None
    if tile and medium.kind == "hex":
        try:
            program = build_tile_program(cd, medium)
            transwires = program.transwire_count()
        except CompileError:
            program = None
    per = total / medium.nv
    rawper = raw / medium.nv
    mem = cd.memory_density(medium) if hasattr(cd, "memory_density") else None
    return CompiledCircuit(
        cd, medium,
        int(per) if per == int(per) else per,
        int(rawper) if rawper == int(rawper) else rawper,
        total,
        max(layer_radius.values()),
        layer_radius,
        transwires,
        mem,
        program,
    )
