"""Standard library over a boolV layer: blob features and meet-points.

Every function returns an expression; costs and radii are obtained through
the compiler.  ``x`` arguments are boolV expressions (typically a layer
read).  Uniform neighbor rings (all filled or all empty) produce zero
frontier apex-edges, so nbcc evaluates to 0 there and meetV stays false:
no local merge or divide is possible on a uniform ring.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fields import FieldType
from .lang import (Expr, LayerRead, Pointwise, Reduce, apex_of_simplicial,
                   delta, exists, forall, ge, land, lnot, lor, shr)
from .locus import Locus


def layer(name="x") -> LayerRead:
    return LayerRead(name, FieldType(Locus.V, 1))


def frontierE(x) -> Expr:
    """Edges joining a filled and an empty vertex."""
    return delta("E", x)


def insideE(x) -> Expr:
    return forall("E", x)


def outsideE(x) -> Expr:
    return forall("E", lnot(x))


def insideF(x) -> Expr:
    return forall("F", x)


def insideV(x) -> Expr:
    """Filled vertices surrounded by vertices of the same blob."""
    return forall("V", insideE(x))


def outsideV(x) -> Expr:
    return forall("V", outsideE(x))


def neighborhoodV(x) -> Expr:
    return exists("V", exists("E", x))


def frontierV(x) -> Expr:
    """Vertices adjacent to the frontier of x-blobs (both sides)."""
    return exists("V", frontierE(x))


def frontierVin(x) -> Expr:
    return land(x, frontierV(x))


def frontierVout(x) -> Expr:
    return land(lnot(x), frontierV(x))


def closureV(xv, ye) -> Expr:
    """Close a (boolV, boolE) pair onto vertices: xv or any incident ye."""
    return lor(xv, exists("V", ye))


def rhombusAll(x) -> Expr:
    """True on an edge iff x holds on the whole rhombus around it."""
    return forall("E", forall("F", x))


def apex_frontier_sum(x) -> Expr:
    """Per vertex, the number of frontier edges among its apex-edges."""
    return Reduce("PLUS", apex_of_simplicial(frontierE(x)))


def nbcc(x) -> Expr:
    """Number of filled connected components in the neighbor ring.

    Each ring component is delimited by exactly two frontier apex-edges,
    so the sum is even and halving it is exact.
    """
    return shr(apex_frontier_sum(x), 1)


def meetV(x) -> Expr:
    return ge(apex_frontier_sum(x), 4)  # nbcc >= 2


def divV(x) -> Expr:
    return land(meetV(x), x)


def mergeV(x) -> Expr:
    return land(meetV(x), lnot(x))


def meetE(x) -> Expr:
    return land(rhombusAll(lnot(frontierE(x))), forall("E", frontierV(x)))


def divE(x) -> Expr:
    # frontierV(not x) = frontierV(x), so the complement form simplifies
    return land(rhombusAll(x), forall("E", frontierV(x)))


def mergeE(x) -> Expr:
    return land(rhombusAll(lnot(x)), forall("E", frontierV(x)))


@dataclass(frozen=True)
class MeetResult:
    """The vertex and edge components of meet/div/merge, as expressions."""

    meetV: Expr
    meetE: Expr
    divV: Expr
    divE: Expr
    mergeV: Expr
    mergeE: Expr


def meet(x) -> MeetResult:
    return MeetResult(meetV(x), meetE(x), divV(x), divE(x), mergeV(x), mergeE(x))
