"""Tree-based source indexes: R-Tree (insertion), Quadtree, CR-Tree
(STR bulk load with quantized child boxes), plus a plain STR-tree used
by Stripe Sweep.

All queries finish with an exact MBR-intersection filter, so every
variant returns the same candidate set.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .errors import EmptyDataset
from .geometry import Geometry, Mbr


def _union(a: Mbr, b: Mbr) -> Mbr:
    return Mbr(
        min(a.x_min, b.x_min),
        min(a.y_min, b.y_min),
        max(a.x_max, b.x_max),
        max(a.y_max, b.y_max),
    )


def _union_all(boxes) -> Mbr:
    it = iter(boxes)
    out = next(it)
    for b in it:
        out = _union(out, b)
    return out


def _enlargement(node: Mbr, extra: Mbr) -> float:
    return _union(node, extra).area() - node.area()


class _RNode:
    __slots__ = ("mbr", "children", "entries", "leaf")

    def __init__(self, leaf: bool):
        self.leaf = leaf
        self.mbr: Optional[Mbr] = None
        self.children: list["_RNode"] = []
        self.entries: list[tuple[Mbr, int]] = []  # (mbr, geometry id)

    def _items(self):
        return self.entries if self.leaf else self.children

    def recompute_mbr(self):
        if self.leaf:
            self.mbr = _union_all(m for m, _ in self.entries)
        else:
            self.mbr = _union_all(c.mbr for c in self.children)


class RTree:
    """Insertion-built R-Tree.

    Overflowing nodes split by seeding two new nodes with the two
    largest-area members; the rest go to whichever seed's box expands
    the least.
    """

    def __init__(self, capacity: int = 16):
        if capacity < 4:
            raise ValueError("node capacity must be >= 4")
        self.capacity = capacity
        self.root = _RNode(leaf=True)

    @classmethod
    def build(cls, source: Sequence[Geometry], capacity: int = 16) -> "RTree":
        source = list(source)
        if not source:
            raise EmptyDataset("no source geometries to index")
        tree = cls(capacity)
        for g in source:
            tree.insert(g.mbr, g.id)
        return tree

    def insert(self, mbr: Mbr, gid: int):
        split = self._insert(self.root, mbr, gid)
        if split is not None:
            old_root = self.root
            self.root = _RNode(leaf=False)
            self.root.children = [old_root, split]
            self.root.recompute_mbr()

    def _insert(self, node: _RNode, mbr: Mbr, gid: int) -> Optional[_RNode]:
        node.mbr = mbr if node.mbr is None else _union(node.mbr, mbr)
        if node.leaf:
            node.entries.append((mbr, gid))
            if len(node.entries) > self.capacity:
                return self._split(node)
            return None
        child = self._choose(node.children, mbr)
        split = self._insert(child, mbr, gid)
        if split is not None:
            node.children.append(split)
            if len(node.children) > self.capacity:
                return self._split(node)
        return None

    @staticmethod
    def _choose(children: list[_RNode], mbr: Mbr) -> _RNode:
        best = children[0]
        best_grow = _enlargement(best.mbr, mbr)
        for child in children[1:]:
            grow = _enlargement(child.mbr, mbr)
            if grow < best_grow or (grow == best_grow and child.mbr.area() < best.mbr.area()):
                best = child
                best_grow = grow
        return best

    def _split(self, node: _RNode) -> _RNode:
        items = node._items()
        box = (lambda it: it[0]) if node.leaf else (lambda it: it.mbr)
        order = sorted(range(len(items)), key=lambda i: box(items[i]).area(), reverse=True)
        seed_a, seed_b = order[0], order[1]
        sib = _RNode(node.leaf)
        group_a = [items[seed_a]]
        group_b = [items[seed_b]]
        mbr_a = box(items[seed_a])
        mbr_b = box(items[seed_b])
        for i in range(len(items)):
            if i in (seed_a, seed_b):
                continue
            item = items[i]
            grow_a = _enlargement(mbr_a, box(item))
            grow_b = _enlargement(mbr_b, box(item))
            if grow_a <= grow_b:
                group_a.append(item)
                mbr_a = _union(mbr_a, box(item))
            else:
                group_b.append(item)
                mbr_b = _union(mbr_b, box(item))
        if node.leaf:
            node.entries = group_a
            sib.entries = group_b
        else:
            node.children = group_a
            sib.children = group_b
        node.recompute_mbr()
        sib.recompute_mbr()
        return sib

    def query(self, mbr: Mbr) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.mbr is None or not node.mbr.intersects(mbr):
                continue
            if node.leaf:
                for emb, gid in node.entries:
                    if emb.intersects(mbr):
                        out.append(gid)
            else:
                stack.extend(node.children)
        out.sort()
        return out

    def audit(self):
        """Check structural invariants; raises AssertionError on breakage."""
        def walk(node):
            if node.leaf:
                assert len(node.entries) <= self.capacity
                assert node.entries, "empty leaf after split"
                assert node.mbr == _union_all(m for m, _ in node.entries)
                return len(node.entries)
            assert node.children, "empty internal node"
            assert len(node.children) <= self.capacity
            assert node.mbr == _union_all(c.mbr for c in node.children)
            return sum(walk(c) for c in node.children)

        if self.root.mbr is None:
            return 0
        return walk(self.root)


class _QuadNode:
    __slots__ = ("bounds", "children", "entries", "depth")

    def __init__(self, bounds: Mbr, depth: int):
        self.bounds = bounds
        self.children: Optional[list["_QuadNode"]] = None  # NE, NW, SE, SW
        self.entries: list[tuple[Mbr, int]] = []
        self.depth = depth


class Quadtree:
    """Quadrant tree over fixed bounds.

    Entries spanning more than one quadrant stay at the internal node,
    so a geometry is stored exactly once and queries never see
    duplicates.
    """

    def __init__(self, bounds: Mbr, capacity: int = 16, max_depth: int = 16):
        self.capacity = capacity
        self.max_depth = max_depth
        self.root = _QuadNode(bounds, 1)

    @classmethod
    def build(cls, source: Sequence[Geometry], capacity: int = 16, max_depth: int = 16) -> "Quadtree":
        source = list(source)
        if not source:
            raise EmptyDataset("no source geometries to index")
        bounds = _union_all(g.mbr for g in source)
        tree = cls(bounds, capacity, max_depth)
        for g in source:
            tree.insert(g.mbr, g.id)
        return tree

    @staticmethod
    def _quadrants(bounds: Mbr) -> list[Mbr]:
        cx = (bounds.x_min + bounds.x_max) / 2.0
        cy = (bounds.y_min + bounds.y_max) / 2.0
        return [
            Mbr(cx, cy, bounds.x_max, bounds.y_max),  # NE
            Mbr(bounds.x_min, cy, cx, bounds.y_max),  # NW
            Mbr(cx, bounds.y_min, bounds.x_max, cy),  # SE
            Mbr(bounds.x_min, bounds.y_min, cx, cy),  # SW
        ]

    @staticmethod
    def _fits(quad: Mbr, mbr: Mbr) -> bool:
        return (
            quad.x_min <= mbr.x_min
            and mbr.x_max <= quad.x_max
            and quad.y_min <= mbr.y_min
            and mbr.y_max <= quad.y_max
        )

    def insert(self, mbr: Mbr, gid: int):
        node = self.root
        while True:
            if node.children is not None:
                child = self._child_for(node, mbr)
                if child is None:
                    node.entries.append((mbr, gid))
                    return
                node = child
                continue
            node.entries.append((mbr, gid))
            if len(node.entries) > self.capacity and node.depth < self.max_depth:
                self._split(node)
            return

    def _child_for(self, node: _QuadNode, mbr: Mbr) -> Optional[_QuadNode]:
        for child in node.children:
            if self._fits(child.bounds, mbr):
                return child
        return None

    def _split(self, node: _QuadNode):
        node.children = [_QuadNode(q, node.depth + 1) for q in self._quadrants(node.bounds)]
        keep = []
        for mbr, gid in node.entries:
            child = self._child_for(node, mbr)
            if child is None:
                keep.append((mbr, gid))
            else:
                child.entries.append((mbr, gid))
        node.entries = keep
        # a child may itself overflow when everything piles into one quadrant
        for child in node.children:
            if len(child.entries) > self.capacity and child.depth < self.max_depth:
                self._split(child)

    def query(self, mbr: Mbr) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.bounds.intersects(mbr):
                continue
            for emb, gid in node.entries:
                if emb.intersects(mbr):
                    out.append(gid)
            if node.children is not None:
                stack.extend(node.children)
        out.sort()
        return out


def str_pack(entries: list[tuple[Mbr, int]], capacity: int) -> list[list]:
    """Sort-Tile-Recursive packing: sort by x_min, slice vertically,
    sort slices by y_min, emit runs of at most `capacity` entries."""
    n = len(entries)
    leaf_count = math.ceil(n / capacity)
    slice_count = math.ceil(math.sqrt(leaf_count))
    per_slice = slice_count * capacity
    by_x = sorted(entries, key=lambda e: (e[0].x_min, e[0].y_min))
    runs = []
    for s in range(0, n, per_slice):
        chunk = sorted(by_x[s : s + per_slice], key=lambda e: (e[0].y_min, e[0].x_min))
        for k in range(0, len(chunk), capacity):
            runs.append(chunk[k : k + capacity])
    return runs


class STRTree:
    """Static R-tree bulk-loaded with STR packing (exact boxes)."""

    def __init__(self, entries: list[tuple[Mbr, int]], capacity: int = 16):
        if not entries:
            raise EmptyDataset("no entries to pack")
        self.capacity = capacity
        level = []
        for run in str_pack(entries, capacity):
            node = _RNode(leaf=True)
            node.entries = run
            node.recompute_mbr()
            level.append(node)
        while len(level) > 1:
            parents = []
            boxes = [(node.mbr, i) for i, node in enumerate(level)]
            for run in str_pack(boxes, capacity):
                parent = _RNode(leaf=False)
                parent.children = [level[i] for _, i in run]
                parent.recompute_mbr()
                parents.append(parent)
            level = parents
        self.root = level[0]

    @classmethod
    def build(cls, source: Sequence[Geometry], capacity: int = 16) -> "STRTree":
        source = list(source)
        if not source:
            raise EmptyDataset("no source geometries to index")
        return cls([(g.mbr, g.id) for g in source], capacity)

    def query(self, mbr: Mbr) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.mbr.intersects(mbr):
                continue
            if node.leaf:
                for emb, gid in node.entries:
                    if emb.intersects(mbr):
                        out.append(gid)
            else:
                stack.extend(node.children)
        out.sort()
        return out


class _CRNode:
    __slots__ = ("mbr", "children", "qboxes", "entries", "leaf")

    def __init__(self, leaf: bool):
        self.leaf = leaf
        self.mbr: Optional[Mbr] = None
        self.children: list["_CRNode"] = []
        self.qboxes: list[tuple[int, int, int, int]] = []  # per child/entry
        self.entries: list[tuple[Mbr, int]] = []


class CRTree:
    """STR-packed tree storing child boxes quantized relative to the
    parent box.

    Quantized offsets round outward by one quantum beyond floor/ceil so
    the dequantized box always contains the exact one, float rounding
    included; queries therefore never miss, only over-approximate, and
    the final exact filter restores precision.
    """

    def __init__(self, source: Sequence[Geometry], capacity: int = 16, quant_bits: int = 8):
        if quant_bits not in (4, 8, 16):
            raise ValueError("quant_bits must be 4, 8 or 16")
        source = list(source)
        if not source:
            raise EmptyDataset("no source geometries to index")
        self.capacity = capacity
        self.quant_bits = quant_bits
        self.levels = (1 << quant_bits) - 1
        entries = [(g.mbr, g.id) for g in source]
        level = []
        for run in str_pack(entries, capacity):
            node = _CRNode(leaf=True)
            node.entries = run
            node.mbr = _union_all(m for m, _ in run)
            node.qboxes = [self._quantize(node.mbr, m) for m, _ in run]
            level.append(node)
        while len(level) > 1:
            parents = []
            boxes = [(node.mbr, i) for i, node in enumerate(level)]
            for run in str_pack(boxes, capacity):
                parent = _CRNode(leaf=False)
                parent.children = [level[i] for _, i in run]
                parent.mbr = _union_all(c.mbr for c in parent.children)
                parent.qboxes = [self._quantize(parent.mbr, c.mbr) for c in parent.children]
                parents.append(parent)
            level = parents
        self.root = level[0]

    @classmethod
    def build(cls, source: Sequence[Geometry], capacity: int = 16, quant_bits: int = 8) -> "CRTree":
        return cls(source, capacity, quant_bits)

    def _quantize(self, parent: Mbr, child: Mbr) -> tuple[int, int, int, int]:
        lv = self.levels
        pw = parent.width
        ph = parent.height

        def q_low(value, origin, extent):
            if extent <= 0.0:
                return 0
            q = math.floor((value - origin) / extent * lv) - 1
            return 0 if q < 0 else q

        def q_high(value, origin, extent):
            if extent <= 0.0:
                return lv
            q = math.ceil((value - origin) / extent * lv) + 1
            return lv if q > lv else q

        return (
            q_low(child.x_min, parent.x_min, pw),
            q_low(child.y_min, parent.y_min, ph),
            q_high(child.x_max, parent.x_min, pw),
            q_high(child.y_max, parent.y_min, ph),
        )

    def dequantize(self, parent: Mbr, qbox: tuple[int, int, int, int]) -> Mbr:
        """Quantum 0 and the top quantum snap exactly to the parent box
        edges so float rounding can never clip the child box."""
        lv = self.levels
        pw = parent.width
        ph = parent.height
        x_min = parent.x_min if qbox[0] <= 0 else parent.x_min + qbox[0] * pw / lv
        y_min = parent.y_min if qbox[1] <= 0 else parent.y_min + qbox[1] * ph / lv
        x_max = parent.x_max if qbox[2] >= lv else parent.x_min + qbox[2] * pw / lv
        y_max = parent.y_max if qbox[3] >= lv else parent.y_min + qbox[3] * ph / lv
        return Mbr(min(x_min, x_max), min(y_min, y_max), max(x_min, x_max), max(y_min, y_max))

    def query_approx(self, mbr: Mbr) -> list[int]:
        """Candidates by quantized boxes only (conservative superset)."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.mbr.intersects(mbr):
                continue
            if node.leaf:
                for qbox, (_, gid) in zip(node.qboxes, node.entries):
                    if self.dequantize(node.mbr, qbox).intersects(mbr):
                        out.append(gid)
            else:
                for qbox, child in zip(node.qboxes, node.children):
                    if self.dequantize(node.mbr, qbox).intersects(mbr):
                        stack.append(child)
        out.sort()
        return out

    def query(self, mbr: Mbr) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if not node.mbr.intersects(mbr):
                continue
            if node.leaf:
                for qbox, (emb, gid) in zip(node.qboxes, node.entries):
                    if self.dequantize(node.mbr, qbox).intersects(mbr) and emb.intersects(mbr):
                        out.append(gid)
            else:
                for qbox, child in zip(node.qboxes, node.children):
                    if self.dequantize(node.mbr, qbox).intersects(mbr):
                        stack.append(child)
        out.sort()
        return out


TREE_KINDS = ("rtree", "quadtree", "crtree")


def build_tree(kind: str, source: Sequence[Geometry], capacity: int = 16, quant_bits: int = 8, max_depth: int = 16):
    if kind == "rtree":
        return RTree.build(source, capacity)
    if kind == "quadtree":
        return Quadtree.build(source, capacity, max_depth)
    if kind == "crtree":
        return CRTree.build(source, capacity, quant_bits)
    raise ValueError(f"unknown tree kind {kind!r}")


def tree_query(tree, t: Geometry) -> list[int]:
    """Candidate source ids for a target geometry (exact-filtered)."""
    return tree.query(t.mbr)
