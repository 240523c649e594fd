"""In-memory R-tree over bounding boxes.

Bulk construction uses Sort-Tile-Recursive packing; incremental inserts use
Guttman's algorithm with the quadratic split. Boxes are closed, so entries
that only touch the query box along an edge or at a corner are returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

from geol.geometry import BoundingBox

DEFAULT_MAX = 16
DEFAULT_MIN = 6


@dataclass(frozen=True)
class IndexEntry:
    """A leaf record: resource id, its MBB and a handle to the parsed geometry."""

    id: str
    box: BoundingBox
    geometry_ref: Any = field(default=None, compare=False, repr=False)


class _Node:
    __slots__ = ("leaf", "children", "boxes", "box")

    def __init__(self, leaf: bool, children=None, boxes=None):
        self.leaf = leaf
        self.children = children if children is not None else []
        self.boxes = boxes if boxes is not None else []
        self.box = _cover(self.boxes) if self.boxes else None

    def refresh(self) -> None:
        self.box = _cover(self.boxes) if self.boxes else None


def _cover(boxes) -> tuple:
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


def _area(b) -> float:
    return (b[2] - b[0]) * (b[3] - b[1])


def _merge(a, b) -> tuple:
    return (min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3]))


def _as_tuple(box) -> tuple:
    if isinstance(box, BoundingBox):
        return box.as_tuple()
    x0, y0, x1, y1 = box
    return (float(x0), float(y0), float(x1), float(y1))


def _even_chunks(items: list, size: int) -> list[list]:
    """Split into ceil(len/size) runs whose lengths differ by at most one."""
    k = max(1, math.ceil(len(items) / size))
    q, r = divmod(len(items), k)
    out = []
    pos = 0
    for i in range(k):
        n = q + (1 if i < r else 0)
        out.append(items[pos:pos + n])
        pos += n
    return out


class RTree:
    """R-tree with fan-out between ``min_entries`` and ``max_entries``."""

    def __init__(self, max_entries: int = DEFAULT_MAX, min_entries: int = DEFAULT_MIN):
        if max_entries < 4 or not 2 <= min_entries <= max_entries // 2:
            raise ValueError("need max_entries >= 4 and 2 <= min_entries <= max_entries/2")
        self.max_entries = max_entries
        self.min_entries = min_entries
        self.root = _Node(leaf=True)
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @property
    def height(self) -> int:
        h = 1
        node = self.root
        while not node.leaf:
            node = node.children[0]
            h += 1
        return h

    # construction -----------------------------------------------------------

    @classmethod
    def build_bulk(cls, entries: Iterable[IndexEntry], max_entries: int = DEFAULT_MAX,
                   min_entries: int = DEFAULT_MIN) -> RTree:
        """Sort-Tile-Recursive packing of ``entries``.

        Runs are split evenly, so whenever a level has more than
        ``max_entries`` items every node receives at least half of
        ``max_entries`` children.
        """
        tree = cls(max_entries, min_entries)
        items = [(e.box.as_tuple(), e) for e in entries]
        tree._size = len(items)
        if not items:
            return tree
        leaf = True
        while True:
            nodes = [_Node(leaf, [c for _, c in grp], [b for b, _ in grp])
                     for grp in tree._str_groups(items)]
            if len(nodes) == 1:
                tree.root = nodes[0]
                return tree
            items = [(n.box, n) for n in nodes]
            leaf = False

    def _str_groups(self, items):
        M = self.max_entries
        if len(items) <= M:
            return [items]
        n_nodes = math.ceil(len(items) / M)
        n_slices = math.ceil(math.sqrt(n_nodes))
        items = sorted(items, key=lambda it: it[0][0] + it[0][2])
        groups = []
        for vslice in _even_chunks(items, math.ceil(len(items) / n_slices)):
            vslice.sort(key=lambda it: it[0][1] + it[0][3])
            groups.extend(_even_chunks(vslice, M))
        return groups

    def insert(self, entry: IndexEntry) -> RTree:
        """Add one entry in place (Guttman insert, quadratic split); returns self."""
        box = entry.box.as_tuple()
        path = []
        node = self.root
        while not node.leaf:
            best = None
            best_key = None
            for i, b in enumerate(node.boxes):
                area = _area(b)
                key = (_area(_merge(b, box)) - area, area)
                if best_key is None or key < best_key:
                    best, best_key = i, key
            path.append((node, best))
            node = node.children[best]
        node.children.append(entry)
        node.boxes.append(box)
        node.refresh()
        self._size += 1

        split = self._split(node) if len(node.children) > self.max_entries else None
        while path:
            parent, idx = path.pop()
            parent.boxes[idx] = parent.children[idx].box
            if split is not None:
                parent.children.append(split)
                parent.boxes.append(split.box)
            parent.refresh()
            split = self._split(parent) if len(parent.children) > self.max_entries else None
        if split is not None:
            old = self.root
            self.root = _Node(False, [old, split], [old.box, split.box])
        return self

    def _split(self, node: _Node) -> _Node:
        """Quadratic split: ``node`` keeps one group, the other is returned."""
        boxes, children = node.boxes, node.children
        n = len(boxes)
        worst = -1.0
        seeds = (0, 1)
        for i in range(n):
            for j in range(i + 1, n):
                d = _area(_merge(boxes[i], boxes[j])) - _area(boxes[i]) - _area(boxes[j])
                if d > worst:
                    worst, seeds = d, (i, j)
        groups = ([seeds[0]], [seeds[1]])
        covers = [boxes[seeds[0]], boxes[seeds[1]]]
        rest = [k for k in range(n) if k not in seeds]
        m = self.min_entries
        while rest:
            for g in (0, 1):
                if len(groups[g]) + len(rest) == m:
                    groups[g].extend(rest)
                    rest = []
                    break
            if not rest:
                break
            pick = None
            pick_diff = -1.0
            for k in rest:
                d0 = _area(_merge(covers[0], boxes[k])) - _area(covers[0])
                d1 = _area(_merge(covers[1], boxes[k])) - _area(covers[1])
                if abs(d0 - d1) > pick_diff:
                    pick, pick_diff, grow = k, abs(d0 - d1), (d0, d1)
            rest.remove(pick)
            d0, d1 = grow
            key0 = (d0, _area(covers[0]), len(groups[0]))
            key1 = (d1, _area(covers[1]), len(groups[1]))
            g = 0 if key0 <= key1 else 1
            groups[g].append(pick)
            covers[g] = _merge(covers[g], boxes[pick])
        other = _Node(node.leaf, [children[k] for k in groups[1]], [boxes[k] for k in groups[1]])
        node.children = [children[k] for k in groups[0]]
        node.boxes = [boxes[k] for k in groups[0]]
        node.refresh()
        return other

    # queries ------------------------------------------------------------------

    def query_entries(self, box) -> list[IndexEntry]:
        """Entries whose boxes intersect ``box`` (closed boxes)."""
        qx0, qy0, qx1, qy1 = _as_tuple(box)
        out = []
        root = self.root
        if root.box is None:
            return out
        b = root.box
        if b[0] > qx1 or b[2] < qx0 or b[1] > qy1 or b[3] < qy0:
            return out
        stack = [root]
        while stack:
            node = stack.pop()
            if node.leaf:
                for b, e in zip(node.boxes, node.children):
                    if b[0] <= qx1 and qx0 <= b[2] and b[1] <= qy1 and qy0 <= b[3]:
                        out.append(e)
            else:
                for b, c in zip(node.boxes, node.children):
                    if b[0] <= qx1 and qx0 <= b[2] and b[1] <= qy1 and qy0 <= b[3]:
                        stack.append(c)
        return out

    def query_intersecting(self, box) -> list[str]:
        return [e.id for e in self.query_entries(box)]

    def entries(self) -> Iterator[IndexEntry]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.leaf:
                yield from node.children
            else:
                stack.extend(node.children)

    # diagnostics --------------------------------------------------------------

    def check(self) -> list[str]:
        """Walk the whole tree and list every violated structural invariant."""
        problems = []
        leaf_depths = set()
        count = 0
        stack = [(self.root, 0, True)]
        while stack:
            node, depth, is_root = stack.pop()
            n = len(node.children)
            if len(node.boxes) != n:
                problems.append(f"depth {depth}: {n} children but {len(node.boxes)} boxes")
            if n > self.max_entries:
                problems.append(f"depth {depth}: {n} children exceeds {self.max_entries}")
            if is_root:
                if not node.leaf and n < 2:
                    problems.append("internal root has fewer than 2 children")
            elif n < self.min_entries:
                problems.append(f"depth {depth}: {n} children below {self.min_entries}")
            if n and node.box != _cover(node.boxes):
                problems.append(f"depth {depth}: node box is not the cover of its children")
            if node.leaf:
                leaf_depths.add(depth)
                count += n
                for b, e in zip(node.boxes, node.children):
                    if b != e.box.as_tuple():
                        problems.append(f"entry {e.id!r}: stored box differs from entry box")
            else:
                for b, c in zip(node.boxes, node.children):
                    if b != c.box:
                        problems.append(f"depth {depth}: stale child box")
                    stack.append((c, depth + 1, False))
        if len(leaf_depths) > 1:
            problems.append(f"leaves at different depths {sorted(leaf_depths)}")
        if count != self._size:
            problems.append(f"tree holds {count} entries, expected {self._size}")
        return problems


def build_bulk(entries: Iterable[IndexEntry], max_entries: int = DEFAULT_MAX,
               min_entries: int = DEFAULT_MIN) -> RTree:
    return RTree.build_bulk(entries, max_entries, min_entries)


def insert(tree: RTree, entry: IndexEntry) -> RTree:
    return tree.insert(entry)


def query_intersecting(tree: RTree, box) -> list[str]:
    return tree.query_intersecting(box)
