"""Fields: values of a spatial type over all data-points of one locus."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .locus import Locus


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FieldType:
    locus: Locus
    width: int = 1

    def __post_init__(self):
        if not 1 <= self.width <= 8:
            raise FieldError(f"field width must be in 1..8 (got {self.width})")

    @property
    def is_bool(self) -> bool:
        return self.width == 1

    def __repr__(self):
        if self.width == 1:
            return f"bool{self.locus.value}"
        return f"int{self.width}{self.locus.value}"


def boolV():
    return FieldType(Locus.V)


class Field:
    """Values over one locus, in canonical data-point order.

    Value-like: treat instances as immutable once published.
    """

    __slots__ = ("ftype", "medium", "values")

    def __init__(self, medium, ftype, values):
        values = np.asarray(values, dtype=np.uint8)
        n = medium.locus_size(ftype.locus)
        if values.shape != (n,):
            raise FieldError(f"expected {n} points for {ftype}, got {values.shape}")
        if values.max(initial=0) >= (1 << ftype.width):
            raise FieldError(f"value overflow for width {ftype.width}")
        self.medium = medium
        self.ftype = ftype
        self.values = values

    # ------------------------------------------------------------------
    @staticmethod
    def constant(medium, ftype, value) -> "Field":
        if not 0 <= int(value) < (1 << ftype.width):
            raise FieldError(f"value {value} overflows width {ftype.width}")
        n = medium.locus_size(ftype.locus)
        return Field(medium, ftype, np.full(n, int(value), dtype=np.uint8))

    @staticmethod
    def from_points(medium, ftype, points) -> "Field":
        """Indicator (or value map) on explicit data-point indices."""
        n = medium.locus_size(ftype.locus)
        vals = np.zeros(n, dtype=np.uint8)
        if isinstance(points, dict):
            items = points.items()
        else:
            items = ((p, 1) for p in points)
        for p, v in items:
            if not 0 <= int(p) < n:
                raise FieldError(f"point {p} not on locus {ftype.locus.value}")
            vals[int(p)] = int(v)
        return Field(medium, ftype, vals)

    @staticmethod
    def random(medium, ftype, rng_seed, density=0.5) -> "Field":
        if not 0.0 <= density <= 1.0:
            raise FieldError("density must be in [0, 1]")
        rng = np.random.default_rng(rng_seed)
        n = medium.locus_size(ftype.locus)
        if ftype.width == 1:
            vals = (rng.random(n) < density).astype(np.uint8)
        else:
            vals = rng.integers(0, 1 << ftype.width, n).astype(np.uint8)
        return Field(medium, ftype, vals)

    # ------------------------------------------------------------------
    def get(self, p) -> int:
        return int(self.values[int(p)])

    def popcount(self) -> int:
        return int(np.count_nonzero(self.values))

    def true_points(self) -> list:
        return [int(i) for i in np.nonzero(self.values)[0]]

    def bit_density(self) -> float:
        """Bits per vertex occupied by this field."""
        return self.ftype.width * len(self.values) / self.medium.nv

    def __eq__(self, other):
        return (isinstance(other, Field) and self.ftype == other.ftype
                and np.array_equal(self.values, other.values))

    def __hash__(self):  # pragma: no cover - fields are not dict keys
        raise TypeError("fields are unhashable")

    # ------------------------------------------------------------------
    # dump format: magic, length-prefixed JSON header, packed LSB-first bits

    MAGIC = b"CCF1"

    def dump(self) -> bytes:
        header = json.dumps({
            "medium": self.medium.content_hash(),
            "locus": self.ftype.locus.value,
            "width": self.ftype.width,
            "count": len(self.values),
        }).encode()
        w = self.ftype.width
        bits = ((self.values[:, None] >> np.arange(w)[None, :]) & 1).astype(np.uint8)
        packed = np.packbits(bits.reshape(-1), bitorder="little")
        return self.MAGIC + len(header).to_bytes(4, "little") + header + packed.tobytes()

    @staticmethod
    def load(medium, blob: bytes) -> "Field":
        if blob[:4] != Field.MAGIC:
            raise FieldError("bad field dump magic")
        hlen = int.from_bytes(blob[4:8], "little")
        header = json.loads(blob[8:8 + hlen])
        if header["medium"] != medium.content_hash():
            raise FieldError("field dump belongs to a different medium")
        ftype = FieldType(Locus(header["locus"]), header["width"])
        n, w = header["count"], header["width"]
        bits = np.unpackbits(np.frombuffer(blob[8 + hlen:], dtype=np.uint8),
                             bitorder="little")[:n * w].reshape(n, w)
        vals = (bits.astype(np.uint8) << np.arange(w, dtype=np.uint8)).sum(
            axis=1).astype(np.uint8)
        return Field(medium, ftype, vals)

    def to_debug_json(self) -> str:
        doc = {"locus": self.ftype.locus.value, "width": self.ftype.width}
        if self.ftype.is_bool:
            doc["true_points"] = self.true_points()
        else:
            doc["values"] = [int(v) for v in self.values]
        return json.dumps(doc)
