"""OGC Simple Features validity checks.

Lines are valid as long as they have two distinct vertices (self-crossing
lines are legal). Polygons must have simple, closed rings; holes must sit
inside the shell, may touch other rings at single points only, and must not
disconnect the interior. MultiPolygon members may touch at points but must not
share edges or overlap.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from geol import kernels
from geol.geometry import Geometry, GeometryType


class ViolationCode(str, Enum):
    UNCLOSED_RING = "UnclosedRing"
    SELF_INTERSECTION = "SelfIntersection"
    HOLE_OUTSIDE_SHELL = "HoleOutsideShell"
    NESTED_SHELLS = "NestedShells"
    DUPLICATE_CONSECUTIVE_POINTS = "DuplicateConsecutivePoints"
    TOO_FEW_POINTS = "TooFewPoints"
    RING_NOT_SIMPLE = "RingNotSimple"


class Violation(NamedTuple):
    code: ViolationCode
    location: tuple


@dataclass(frozen=True)
class ValidityReport:
    violations: tuple = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def codes(self) -> set:
        return {v.code for v in self.violations}

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(f"{v.code.value} at {v.location}" for v in self.violations)


def validate(g: Geometry) -> ValidityReport:
    """Check OGC validity. The result is memoised on the geometry instance."""
    cached = g.__dict__.get("_validity")
    if cached is not None:
        return cached
    out: list[Violation] = []
    k = g.kind
    if k is GeometryType.LINESTRING:
        _check_line(g.coords, out)
    elif k is GeometryType.MULTILINESTRING:
        for line in g.coords:
            _check_line(line, out)
    elif k is GeometryType.POLYGON:
        _check_polygon(g.coords, out)
    elif k is GeometryType.MULTIPOLYGON:
        for poly in g.coords:
            _check_polygon(poly, out)
        if not out and len(g.coords) > 1:
            _check_members(g.coords, out)
    report = ValidityReport(tuple(out))
    object.__setattr__(g, "_validity", report)
    return report


def _has_duplicates(coords) -> int | None:
    for i in range(1, len(coords)):
        if coords[i] == coords[i - 1]:
            return i
    return None


def _check_line(line, out) -> None:
    if len(line) < 2:
        out.append(Violation(ViolationCode.TOO_FEW_POINTS, line[0] if line else (0.0, 0.0)))
        return
    dup = _has_duplicates(line)
    if dup is not None:
        out.append(Violation(ViolationCode.DUPLICATE_CONSECUTIVE_POINTS, line[dup]))
    if len(set(line)) < 2:
        out.append(Violation(ViolationCode.TOO_FEW_POINTS, line[0]))


def _check_ring(ring, out) -> bool:
    n = len(out)
    if len(ring) < 4:
        out.append(Violation(ViolationCode.TOO_FEW_POINTS, ring[0] if ring else (0.0, 0.0)))
        return False
    if ring[0] != ring[-1]:
        out.append(Violation(ViolationCode.UNCLOSED_RING, ring[0]))
    dup = _has_duplicates(ring)
    if dup is not None:
        out.append(Violation(ViolationCode.DUPLICATE_CONSECUTIVE_POINTS, ring[dup]))
    if len(set(ring)) < 3:
        out.append(Violation(ViolationCode.TOO_FEW_POINTS, ring[0]))
    return len(out) == n


def _flat(ring) -> array:
    a = array("d")
    for x, y in ring:
        a.append(x)
        a.append(y)
    return a


def _segments(rings, tags, segs, meta) -> None:
    for r, ring in enumerate(rings):
        n = len(ring) - 1
        for i in range(n):
            (x1, y1), (x2, y2) = ring[i], ring[i + 1]
            segs.extend((x1, y1, x2, y2))
            meta.append((tags, r, i, n))


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        """Join the sets of a and b; False if they were already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


def _check_polygon(rings, out) -> None:
    ok = True
    for ring in rings:
        ok = _check_ring(ring, out) and ok
    if not ok:
        return

    segs = array("d")
    meta = []
    _segments(rings, 0, segs, meta)
    n_before = len(out)
    touches = set()
    for i, j, kind, *pt in kernels.intersecting_pairs(segs):
        _, ri, pi, n = meta[i]
        _, rj, pj, _ = meta[j]
        where = (pt[0], pt[1])
        if ri == rj:
            lo, hi = min(pi, pj), max(pi, pj)
            if hi - lo == 1 or (lo == 0 and hi == n - 1):
                if kind == kernels.OVERLAP:
                    out.append(Violation(ViolationCode.RING_NOT_SIMPLE, where))
                continue
            if kind == kernels.CROSS:
                out.append(Violation(ViolationCode.SELF_INTERSECTION, where))
            else:
                out.append(Violation(ViolationCode.RING_NOT_SIMPLE, where))
        elif kind == kernels.CROSS or kind == kernels.OVERLAP:
            out.append(Violation(ViolationCode.SELF_INTERSECTION, where))
        else:
            touches.add((ri, where))
            touches.add((rj, where))
    if len(out) > n_before:
        return

    shell = _flat(rings[0])
    flats = [shell] + [_flat(h) for h in rings[1:]]
    for h in range(1, len(rings)):
        p = _sample_off(rings[h], flats[0])
        if p is None or kernels.point_in_ring(p[0], p[1], shell) < 0:
            out.append(Violation(ViolationCode.HOLE_OUTSIDE_SHELL, p or rings[h][0]))
    boxes = [_ring_box(r) for r in rings]
    for h1 in range(1, len(rings)):
        for h2 in range(1, len(rings)):
            if h1 == h2 or not _box_inside(boxes[h1], boxes[h2]):
                continue
            p = _sample_off(rings[h1], flats[h2])
            if p is not None and kernels.point_in_ring(p[0], p[1], flats[h2]) > 0:
                out.append(Violation(ViolationCode.HOLE_OUTSIDE_SHELL, p))
    if len(out) > n_before:
        return

    # rings touching in a cycle cut the interior into pieces
    uf = _UnionFind()
    for ring_no, pt in sorted(touches):
        if not uf.union(("ring", ring_no), ("pt", pt)):
            out.append(Violation(ViolationCode.SELF_INTERSECTION, pt))
            return


def _ring_box(ring):
    xs = [c[0] for c in ring]
    ys = [c[1] for c in ring]
    return (min(xs), min(ys), max(xs), max(ys))


def _box_inside(inner, outer) -> bool:
    return (outer[0] <= inner[0] and inner[2] <= outer[2]
            and outer[1] <= inner[1] and inner[3] <= outer[3])


def _boxes_meet(a, b) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


def _sample_off(ring, *others):
    """A point of ``ring`` lying on none of the rings ``others``, or None."""
    def off(x, y):
        return all(kernels.point_in_ring(x, y, o) != 0 for o in others)

    for x, y in ring[:-1]:
        if off(x, y):
            return (x, y)
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        mx, my = 0.5 * (x1 + x2), 0.5 * (y1 + y2)
        if off(mx, my):
            return (mx, my)
    return None


def _in_polygon_interior(p, flats) -> bool:
    if kernels.point_in_ring(p[0], p[1], flats[0]) <= 0:
        return False
    return all(kernels.point_in_ring(p[0], p[1], h) < 0 for h in flats[1:])


def _check_members(polys, out) -> None:
    segs = array("d")
    meta = []
    for m, poly in enumerate(polys):
        _segments(poly, m, segs, meta)
    for i, j, kind, *pt in kernels.intersecting_pairs(segs):
        if meta[i][0] == meta[j][0]:
            continue
        if kind == kernels.CROSS or kind == kernels.OVERLAP:
            out.append(Violation(ViolationCode.SELF_INTERSECTION, (pt[0], pt[1])))
    if out:
        return

    flats = [[_flat(r) for r in poly] for poly in polys]
    boxes = [_ring_box(poly[0]) for poly in polys]
    for a in range(len(polys)):
        for b in range(len(polys)):
            if a == b or not _boxes_meet(boxes[a], boxes[b]):
                continue
            # any shell point of b strictly inside a's area means overlap
            p = _sample_off(polys[b][0], *flats[a])
            if p is not None and _in_polygon_interior(p, flats[a]):
                out.append(Violation(ViolationCode.NESTED_SHELLS, p))
                return
