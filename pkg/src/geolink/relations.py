"""Positive DE-9IM relations: matrix wrapper, OGC mask patterns, extraction.

The nine positive relations (disjoint excluded) are extracted from one
intersection matrix with the standard OGC mask patterns, parameterized
by the operand dimensions for crosses/overlaps.
"""

from __future__ import annotations

import enum

from . import kernel
from .errors import DegenerateGeometry
from .geometry import Geometry, POLYGON

EMPTY = kernel.EMPTY


class Relation(enum.Flag):
    EQUALS = enum.auto()
    INTERSECTS = enum.auto()
    TOUCHES = enum.auto()
    WITHIN = enum.auto()
    CONTAINS = enum.auto()
    COVERS = enum.auto()
    COVERED_BY = enum.auto()
    CROSSES = enum.auto()
    OVERLAPS = enum.auto()


NO_RELATION = Relation(0)

RELATION_NAMES = {
    Relation.EQUALS: "equals",
    Relation.INTERSECTS: "intersects",
    Relation.TOUCHES: "touches",
    Relation.WITHIN: "within",
    Relation.CONTAINS: "contains",
    Relation.COVERS: "covers",
    Relation.COVERED_BY: "coveredBy",
    Relation.CROSSES: "crosses",
    Relation.OVERLAPS: "overlaps",
}
NAME_TO_RELATION = {name: rel for rel, name in RELATION_NAMES.items()}
ALL_RELATION_NAMES = tuple(RELATION_NAMES.values())

_TRANSPOSE_PAIRS = {
    Relation.WITHIN: Relation.CONTAINS,
    Relation.CONTAINS: Relation.WITHIN,
    Relation.COVERS: Relation.COVERED_BY,
    Relation.COVERED_BY: Relation.COVERS,
}


def transpose_relations(rels: Relation) -> Relation:
    """Relation set seen from the swapped operand order."""
    out = NO_RELATION
    for rel in Relation:
        if rels & rel:
            out |= _TRANSPOSE_PAIRS.get(rel, rel)
    return out


def relation_names(rels: Relation) -> list[str]:
    return [RELATION_NAMES[r] for r in Relation if rels & r]


class IntersectionMatrix:
    """The 3x3 DE-9IM matrix, cells in row-major (interior, boundary,
    exterior) x (interior, boundary, exterior) order; -1 means empty."""

    __slots__ = ("cells",)

    def __init__(self, cells):
        self.cells = tuple(cells)

    def cell(self, row: int, col: int) -> int:
        return self.cells[row * 3 + col]

    def transposed(self) -> "IntersectionMatrix":
        return IntersectionMatrix(kernel.transpose_cells(self.cells))

    def pattern(self) -> str:
        return "".join("F" if c == EMPTY else str(c) for c in self.cells)

    @classmethod
    def from_pattern(cls, pattern: str) -> "IntersectionMatrix":
        return cls(tuple(EMPTY if ch in "Ff" else int(ch) for ch in pattern))

    def matches(self, mask: str) -> bool:
        for value, ch in zip(self.cells, mask):
            if ch == "*":
                continue
            if ch == "T":
                if value == EMPTY:
                    return False
            elif ch == "F":
                if value != EMPTY:
                    return False
            elif value != int(ch):
                return False
        return True

    def __eq__(self, other):
        return isinstance(other, IntersectionMatrix) and self.cells == other.cells

    def __hash__(self):
        return hash(self.cells)

    def __repr__(self):
        return f"IntersectionMatrix({self.pattern()})"


_INTERSECTS_MASKS = ("T********", "*T*******", "***T*****", "****T****")
_TOUCHES_MASKS = ("FT*******", "F**T*****", "F***T****")
_WITHIN_MASK = "T*F**F***"
_CONTAINS_MASK = "T*****FF*"
_COVERS_MASKS = ("T*****FF*", "*T****FF*", "***T**FF*", "****T*FF*")
_COVERED_BY_MASKS = ("T*F**F***", "*TF**F***", "**FT*F***", "**F*TF***")
_EQUALS_MASK = "T*F**FFF*"
_CROSSES_LOWER_MASK = "T*T******"  # dim(a) < dim(b)
_CROSSES_HIGHER_MASK = "T*****T**"  # dim(a) > dim(b)
_CROSSES_LINES_MASK = "0********"
_OVERLAPS_LINES_MASK = "1*T***T**"
_OVERLAPS_AREAS_MASK = "T*T***T**"


def extract_relations(m: IntersectionMatrix, dim_a: int, dim_b: int) -> Relation:
    """All positive relations satisfied by the matrix."""
    rels = NO_RELATION
    if any(m.matches(msk) for msk in _INTERSECTS_MASKS):
        rels |= Relation.INTERSECTS
    else:
        return rels  # disjoint: nothing else can hold
    if any(m.matches(msk) for msk in _TOUCHES_MASKS):
        rels |= Relation.TOUCHES
    if m.matches(_WITHIN_MASK):
        rels |= Relation.WITHIN
    if m.matches(_CONTAINS_MASK):
        rels |= Relation.CONTAINS
    if any(m.matches(msk) for msk in _COVERS_MASKS):
        rels |= Relation.COVERS
    if any(m.matches(msk) for msk in _COVERED_BY_MASKS):
        rels |= Relation.COVERED_BY
    if m.matches(_EQUALS_MASK):
        rels |= Relation.EQUALS
    if dim_a < dim_b:
        if m.matches(_CROSSES_LOWER_MASK):
            rels |= Relation.CROSSES
    elif dim_a > dim_b:
        if m.matches(_CROSSES_HIGHER_MASK):
            rels |= Relation.CROSSES
    elif dim_a == 1:
        if m.matches(_CROSSES_LINES_MASK):
            rels |= Relation.CROSSES
    if dim_a == dim_b:
        mask = _OVERLAPS_LINES_MASK if dim_a == 1 else _OVERLAPS_AREAS_MASK
        if m.matches(mask):
            rels |= Relation.OVERLAPS
    return rels


def _flat_curves(g: Geometry) -> list:
    return [[c for pt in curve for c in pt] for curve in g.curves()]


def _check_rings(g: Geometry):
    if g.kind != POLYGON:
        return
    if g._rings_ok is None:
        g._rings_ok = not kernel.rings_self_crossing(_flat_curves(g))
    if not g._rings_ok:
        raise DegenerateGeometry(f"geometry {g.id}: ring properly self-intersects")


def relate(a: Geometry, b: Geometry) -> IntersectionMatrix:
    """Compute the DE-9IM matrix of a against b.

    Raises DegenerateGeometry when a ring self-intersects in a way the
    kernel cannot resolve; callers skip the pair and count it.
    """
    _check_rings(a)
    _check_rings(b)
    try:
        cells = kernel.relate(a.dimension, _flat_curves(a), b.dimension, _flat_curves(b))
    except kernel.KernelInconsistency as exc:
        raise DegenerateGeometry(f"pair ({a.id}, {b.id}): {exc}") from exc
    return IntersectionMatrix(cells)


def verify_pair(a: Geometry, b: Geometry) -> Relation:
    """All positive relations between a and b (empty means disjoint
    under the closed-world assumption).  Callers are expected to have
    established that the MBRs intersect."""
    return extract_relations(relate(a, b), a.dimension, b.dimension)
