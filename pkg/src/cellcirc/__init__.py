"""Fields over maximal planar media, compiled to cellular logic circuits."""

from .fields import Field, FieldType
from .locus import Locus
from .medium import SimplicialMedium, build_hex_torus, build_isotropic

__all__ = [
    "Field",
    "FieldType",
    "Locus",
    "SimplicialMedium",
    "build_hex_torus",
    "build_isotropic",
]
