"""The typed operation-expression language over spatial fields.

Expressions are immutable trees; structurally equal subtrees compare and
hash equal, which is what the compiler's subexpression sharing keys on.
The operator signatures follow the locus algebra: broadcasts move a
simplicial field onto a transfer locus, transfers swap paired points,
reductions fold a transfer locus onto its father class, rotations map a
transfer locus to its brother, and central symmetry maps each point to the
antipodal point around its father (swapping eF and vF, fixing the locus of
E-fathered points, and defined for V-fathered points on the hexagonal
lattice only).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fields import FieldType
from .locus import BROADCAST, SYMMETRY, Locus


class SpatialTypeError(TypeError):
    pass


BOOL_OPS = ("NOT", "AND", "OR", "XOR")
INT_OPS = ("ADD", "MIN", "MAX")
SCALAR_OPS = ("GE", "SHR")  # carry an integer parameter
REDUCE_OPS = ("AND", "OR", "XOR", "MIN", "MAX", "PLUS")


class Expr:
    __slots__ = ()

    # convenience combinators -----------------------------------------
    def __and__(self, other):
        return Pointwise("AND", (self, other))

    def __or__(self, other):
        return Pointwise("OR", (self, other))

    def __xor__(self, other):
        return Pointwise("XOR", (self, other))

    def __invert__(self):
        return Pointwise("NOT", (self,))


@dataclass(frozen=True, slots=True)
class LayerRead(Expr):
    name: str
    ftype: FieldType


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: int
    ftype: FieldType


@dataclass(frozen=True, slots=True)
class Pointwise(Expr):
    op: str
    args: tuple
    k: int = 0  # parameter of GE / SHR


@dataclass(frozen=True, slots=True)
class Broadcast(Expr):
    target: str  # 'v' | 'e' | 'f'
    child: Expr


@dataclass(frozen=True, slots=True)
class Transfer(Expr):
    child: Expr


@dataclass(frozen=True, slots=True)
class Reduce(Expr):
    op: str
    child: Expr


@dataclass(frozen=True, slots=True)
class RotateCW(Expr):
    child: Expr


@dataclass(frozen=True, slots=True)
class RotateCCW(Expr):
    child: Expr


@dataclass(frozen=True, slots=True)
class Symmetry(Expr):
    child: Expr


def children(e: Expr) -> tuple:
    if isinstance(e, Pointwise):
        return e.args
    if isinstance(e, (Broadcast, Transfer, Reduce, RotateCW, RotateCCW, Symmetry)):
        return (e.child,)
    return ()


def walk(e: Expr):
    """Post-order iteration over the expression DAG (each node once)."""
    seen = set()
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for c in children(node):
            stack.append((c, False))


# ----------------------------------------------------------------------
# typechecking


def plus_width(child_width: int, max_coarity: int) -> int:
    return math.ceil(math.log2(max_coarity * ((1 << child_width) - 1) + 1))


def max_coarity(medium, locus: Locus) -> int:
    starts = medium.tp_starts[locus]
    return int((starts[1:] - starts[:-1]).max())


def typecheck(e: Expr, medium, types=None) -> FieldType:
    """Annotate every node with its field type; raise SpatialTypeError."""
    if types is None:
        types = {}

    def err(msg):
        raise SpatialTypeError(msg)

    for node in walk(e):
        if node in types:
            continue
        if isinstance(node, (LayerRead, Const)):
            types[node] = node.ftype
        elif isinstance(node, Pointwise):
            ts = [types[a] for a in node.args]
            if len({t.locus for t in ts}) != 1:
                err(f"pointwise {node.op} over mixed locus "
                    f"{[t.locus.value for t in ts]}")
            t0 = ts[0]
            if node.op in BOOL_OPS:
                if any(t.width != 1 for t in ts):
                    err(f"{node.op} needs bool operands")
                nargs = 1 if node.op == "NOT" else 2
                if len(ts) != nargs:
                    err(f"{node.op} arity {len(ts)}")
                types[node] = t0
            elif node.op in INT_OPS:
                if len(ts) != 2 or ts[0].width != ts[1].width:
                    err(f"{node.op} needs two operands of equal width")
                types[node] = t0
            elif node.op == "GE":
                if len(ts) != 1:
                    err("GE takes one operand")
                types[node] = FieldType(t0.locus, 1)
            elif node.op == "SHR":
                if len(ts) != 1:
                    err("SHR takes one operand")
                types[node] = FieldType(t0.locus, max(1, t0.width - node.k))
            else:
                err(f"unknown pointwise op {node.op}")
        elif isinstance(node, Broadcast):
            t = types[node.child]
            key = (node.target, t.locus)
            if key not in BROADCAST:
                err(f"cannot broadcast {t} toward '{node.target}'")
            types[node] = FieldType(BROADCAST[key], t.width)
        elif isinstance(node, Transfer):
            t = types[node.child]
            if not t.locus.is_transfer:
                err(f"transfer needs a transfer locus, got {t}")
            types[node] = FieldType(t.locus.partner, t.width)
        elif isinstance(node, Reduce):
            t = types[node.child]
            if not t.locus.is_transfer:
                err(f"reduce needs a transfer locus, got {t}")
            if node.op not in REDUCE_OPS:
                err(f"unknown reduction op {node.op}")
            if node.op in ("AND", "OR", "XOR") and t.width != 1:
                err(f"{node.op}-reduction needs a bool field")
            w = t.width
            if node.op == "PLUS":
                w = plus_width(t.width, max_coarity(medium, t.locus))
                if w > 8:
                    err(f"PLUS-reduction widens past 8 bits (needs {w})")
            types[node] = FieldType(t.locus.father, w)
        elif isinstance(node, (RotateCW, RotateCCW)):
            t = types[node.child]
            if not t.locus.is_transfer:
                err(f"rotation needs a transfer locus, got {t}")
            types[node] = FieldType(t.locus.brother, t.width)
        elif isinstance(node, Symmetry):
            t = types[node.child]
            if t.locus not in SYMMETRY:
                err(f"central symmetry undefined on {t}")
            if t.locus.father is Locus.V and medium.kind != "hex":
                err("central symmetry on V-fathered locus is undefined "
                    "off the hexagonal lattice")
            types[node] = FieldType(SYMMETRY[t.locus], t.width)
        else:
            err(f"unknown node {node!r}")
    return types[e]


# ----------------------------------------------------------------------
# macros


def lnot(e):
    return Pointwise("NOT", (e,))


def land(a, b):
    return Pointwise("AND", (a, b))


def lor(a, b):
    return Pointwise("OR", (a, b))


def lxor(a, b):
    return Pointwise("XOR", (a, b))


def ge(e, k):
    return Pointwise("GE", (e,), k)


def shr(e, k):
    return Pointwise("SHR", (e,), k)


def simplicial_reduce(op: str, target: str, e: Expr) -> Expr:
    """Three-step decomposition: broadcast, transfer, pure reduction."""
    return Reduce(op, Transfer(Broadcast(target.lower(), e)))


def forall(target, e):
    return simplicial_reduce("AND", target, e)


def exists(target, e):
    return simplicial_reduce("OR", target, e)


def delta(target, e):
    return simplicial_reduce("XOR", target, e)


def reduce2(op: str, e: Expr) -> Expr:
    """Fold the two rotational brother neighbors of every point."""
    return Pointwise(op if op != "PLUS" else "ADD", (RotateCW(e), RotateCCW(e)))


def apex(e: Expr, types_hint=None) -> Expr:
    """One-to-one communication between a vertex and its apex-edges.

    Accepts fV or fE fields (and, through the face broadcast, plain V or E
    fields); eV/vE inputs give the neighbor-vertex permutation.
    """
    return Transfer(Symmetry(Transfer(e)))


def apex_of_simplicial(e: Expr) -> Expr:
    """apex of a V or E field, via the face-side broadcast."""
    return apex(Broadcast("f", e))


def free_variables(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, LayerRead)}


def substitute(e: Expr, name: str, repl: Expr) -> Expr:
    memo = {}
    for node in walk(e):
        if isinstance(node, LayerRead) and node.name == name:
            memo[node] = repl
        elif isinstance(node, Pointwise):
            memo[node] = Pointwise(node.op, tuple(memo[a] for a in node.args), node.k)
        elif isinstance(node, Broadcast):
            memo[node] = Broadcast(node.target, memo[node.child])
        elif isinstance(node, (Transfer, Reduce, RotateCW, RotateCCW, Symmetry)):
            kw = {"op": node.op} if isinstance(node, Reduce) else {}
            memo[node] = type(node)(child=memo[node.child], **kw)
        else:
            memo[node] = node
    return memo[e]


# ----------------------------------------------------------------------
# surface syntax (prefix notation, used by the CLI)


class ParseError(ValueError):
    pass


def _tokenize(text):
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),":
            toks.append((ch, i))
            i += 1
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append((text[i:j], i))
            i = j
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append((int(text[i:j]), i))
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r} at position {i}")
    return toks


def parse_expr(text: str, layers=None):
    """Parse prefix syntax like ``and(not(frontierE(x)), insideE(x))``.

    ``layers`` maps free variable names to FieldTypes (default: x is boolV).
    """
    from . import blobs  # deferred: blobs builds on this module

    if layers is None:
        layers = {"x": FieldType(Locus.V, 1)}
    toks = _tokenize(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else (None, len(text))

    def take(expect=None):
        tok, at = peek()
        if tok is None:
            raise ParseError(f"unexpected end of expression at position {at}")
        if expect is not None and tok != expect:
            raise ParseError(f"expected {expect!r} at position {at}, got {tok!r}")
        pos[0] += 1
        return tok, at

    def expr():
        tok, at = take()
        if isinstance(tok, int):
            return tok
        if tok in "(),":
            raise ParseError(f"unexpected {tok!r} at position {at}")
        nxt, _ = peek()
        if nxt != "(":
            if tok not in layers:
                raise ParseError(f"unknown layer {tok!r} at position {at}")
            return LayerRead(tok, layers[tok])
        take("(")
        args = [expr()]
        while peek()[0] == ",":
            take(",")
            args.append(expr())
        take(")")
        builder = functions().get(tok)
        if builder is None:
            raise ParseError(f"unknown function {tok!r} at position {at}")
        try:
            return builder(*args)
        except TypeError as exc:
            raise ParseError(f"bad arguments for {tok!r} at position {at}: {exc}")

    result = expr()
    if pos[0] != len(toks):
        raise ParseError(f"trailing input at position {peek()[1]}")
    if isinstance(result, int):
        raise ParseError("expression is a bare integer")
    return result


def _function_table():
    from . import blobs

    table = {
        "not": lnot, "and": land, "or": lor, "xor": lxor,
        "add": lambda a, b: Pointwise("ADD", (a, b)),
        "min": lambda a, b: Pointwise("MIN", (a, b)),
        "max": lambda a, b: Pointwise("MAX", (a, b)),
        "ge": ge, "shr": shr,
        "transfer": Transfer,
        "rotcw": RotateCW, "rotccw": RotateCCW, "sym": Symmetry,
        "apex": apex,
        "closureV": blobs.closureV,
        "rhombus": blobs.rhombusAll, "rhombusAll": blobs.rhombusAll,
    }
    for tgt in "VEF":
        table[f"forall{tgt}"] = (lambda t: lambda e: forall(t, e))(tgt)
        table[f"exists{tgt}"] = (lambda t: lambda e: exists(t, e))(tgt)
        table[f"delta{tgt}"] = (lambda t: lambda e: delta(t, e))(tgt)
        table[f"plus{tgt}"] = (lambda t: lambda e: simplicial_reduce("PLUS", t, e))(tgt)
    for low in "vef":
        table[f"broadcast{low}"] = (lambda t: lambda e: Broadcast(t, e))(low)
    for op in ("And", "Or", "Xor", "Min", "Max", "Plus"):
        table[f"reduce2{op}"] = (lambda o: lambda e: reduce2(o.upper(), e))(op)
        table[f"reduce{op}"] = (lambda o: lambda e: Reduce(o.upper(), e))(op)
    for name in ("frontierE", "frontierV", "frontierVin", "frontierVout",
                 "insideE", "outsideE", "insideF", "insideV", "outsideV",
                 "neighborhoodV", "nbcc", "meetV", "divV", "mergeV",
                 "meetE", "divE", "mergeE"):
        table[name] = getattr(blobs, name)
    return table


_FUNCTIONS = None


def functions():
    global _FUNCTIONS
    if _FUNCTIONS is None:
        _FUNCTIONS = _function_table()
    return _FUNCTIONS
