"""The nine point classes (locus) of a medium and their static relations.

Three simplicial locus (V, E, F) carry one data-point per vertex, edge or
face.  Six transfer locus carry paired data-points interposed on each
simplex-adjacency segment; the upper-case letter names the *father* class
(the nearer simplex, which owns the point), the lower-case letter the class
the point faces.
"""

from __future__ import annotations

import enum


class Locus(enum.Enum):
    V = "V"
    E = "E"
    F = "F"
    eV = "eV"
    vE = "vE"
    eF = "eF"
    fE = "fE"
    vF = "vF"
    fV = "fV"

    def __repr__(self):
        return self.value

    @property
    def is_simplicial(self) -> bool:
        return len(self.value) == 1

    @property
    def is_transfer(self) -> bool:
        return len(self.value) == 2

    @property
    def father(self) -> "Locus":
        """Owning simplicial class (itself for simplicial locus)."""
        return Locus(self.value[-1])

    @property
    def other(self) -> "Locus":
        """Simplicial class the points face (transfer locus only)."""
        return Locus(self.value[0].upper())

    @property
    def partner(self) -> "Locus":
        """Communicating locus across the adjacency segment (eV <-> vE ...)."""
        x, y = self.value
        return Locus(y.lower() + x.upper())

    @property
    def brother(self) -> "Locus":
        """The other transfer locus with the same father (eV <-> fV ...)."""
        father = self.value[1]
        mine = self.value[0]
        other = next(c for c in "vef" if c != mine and c != father.lower())
        return Locus(other + father)


SIMPLICIAL = (Locus.V, Locus.E, Locus.F)
TRANSFER = (Locus.eV, Locus.vE, Locus.eF, Locus.fE, Locus.vF, Locus.fV)

#: simplexes-per-vertex proportion of each class
ARITY = {Locus.V: 1, Locus.E: 3, Locus.F: 2}

#: broadcast target letter -> transfer locus per source class
BROADCAST = {
    ("e", Locus.V): Locus.eV,
    ("f", Locus.V): Locus.fV,
    ("v", Locus.E): Locus.vE,
    ("f", Locus.E): Locus.fE,
    ("v", Locus.F): Locus.vF,
    ("e", Locus.F): Locus.eF,
}

#: central symmetry output locus; V-fathered entries are hex-lattice only
SYMMETRY = {
    Locus.eF: Locus.vF,
    Locus.vF: Locus.eF,
    Locus.vE: Locus.vE,
    Locus.fE: Locus.fE,
    Locus.eV: Locus.eV,
    Locus.fV: Locus.fV,
}
