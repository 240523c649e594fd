"""Planar simple-feature geometries: construction, WKT I/O, boundary and MBB.

Geometries are immutable. The ``coords`` payload is nested tuples whose
shape depends on ``kind``:

=================  ==============================================
POINT              ``(x, y)``
MULTIPOINT         ``((x, y), ...)``
LINESTRING         ``((x, y), ...)``
MULTILINESTRING    ``(linestring_coords, ...)``
POLYGON            ``(exterior_ring, hole_ring, ...)``
MULTIPOLYGON       ``(polygon_coords, ...)``
EMPTY              ``()``
=================  ==============================================
"""

from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

from geol.errors import EmptyGeometry, ParseError, UnsupportedType

Coordinate = tuple  # (x, y) pair of finite floats


class GeometryType(str, Enum):
    POINT = "Point"
    MULTIPOINT = "MultiPoint"
    LINESTRING = "LineString"
    MULTILINESTRING = "MultiLineString"
    POLYGON = "Polygon"
    MULTIPOLYGON = "MultiPolygon"
    EMPTY = "Empty"


class GeometryWarning(UserWarning):
    """Non-fatal input normalisation (dropped Z/M, collapsed duplicates)."""


@dataclass(frozen=True)
class BoundingBox:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if not (self.min_x <= self.max_x and self.min_y <= self.max_y):
            raise ValueError(f"inverted bounding box {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)

    def intersects(self, other: BoundingBox) -> bool:
        """Closed-box test: boxes that only share an edge or corner intersect."""
        return (self.min_x <= other.max_x and other.min_x <= self.max_x
                and self.min_y <= other.max_y and other.min_y <= self.max_y)

    def contains(self, other: BoundingBox) -> bool:
        return (self.min_x <= other.min_x and other.max_x <= self.max_x
                and self.min_y <= other.min_y and other.max_y <= self.max_y)

    def contains_point(self, x: float, y: float) -> bool:
        return self.min_x <= x <= self.max_x and self.min_y <= y <= self.max_y

    def union(self, other: BoundingBox) -> BoundingBox:
        return BoundingBox(min(self.min_x, other.min_x), min(self.min_y, other.min_y),
                           max(self.max_x, other.max_x), max(self.max_y, other.max_y))

    def area(self) -> float:
        return (self.max_x - self.min_x) * (self.max_y - self.min_y)


@dataclass(frozen=True)
class Geometry:
    kind: GeometryType
    coords: tuple
    notes: tuple = field(default=(), compare=False, repr=False)

    # constructors ---------------------------------------------------------

    @classmethod
    def point(cls, x: float, y: float) -> Geometry:
        return cls(GeometryType.POINT, (float(x), float(y)))

    @classmethod
    def multipoint(cls, points) -> Geometry:
        return cls(GeometryType.MULTIPOINT, tuple(_xy(p) for p in points))

    @classmethod
    def linestring(cls, coords) -> Geometry:
        return cls(GeometryType.LINESTRING, tuple(_xy(p) for p in coords))

    @classmethod
    def multilinestring(cls, lines) -> Geometry:
        return cls(GeometryType.MULTILINESTRING,
                   tuple(tuple(_xy(p) for p in line) for line in lines))

    @classmethod
    def polygon(cls, shell, holes=()) -> Geometry:
        rings = (shell, *holes)
        return cls(GeometryType.POLYGON, tuple(tuple(_xy(p) for p in r) for r in rings))

    @classmethod
    def multipolygon(cls, polygons) -> Geometry:
        return cls(GeometryType.MULTIPOLYGON,
                   tuple(tuple(tuple(_xy(p) for p in r) for r in poly) for poly in polygons))

    @classmethod
    def empty(cls) -> Geometry:
        return cls(GeometryType.EMPTY, ())

    @classmethod
    def box(cls, min_x, min_y, max_x, max_y) -> Geometry:
        """Axis-aligned rectangle polygon, counter-clockwise."""
        return cls.polygon([(min_x, min_y), (max_x, min_y), (max_x, max_y),
                            (min_x, max_y), (min_x, min_y)])

    # queries --------------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.kind is GeometryType.EMPTY

    def members(self) -> list[Geometry]:
        """Single-part components; a multi-geometry is split into its parts."""
        k = self.kind
        if k is GeometryType.MULTIPOINT:
            return [Geometry(GeometryType.POINT, p) for p in self.coords]
        if k is GeometryType.MULTILINESTRING:
            return [Geometry(GeometryType.LINESTRING, ln) for ln in self.coords]
        if k is GeometryType.MULTIPOLYGON:
            return [Geometry(GeometryType.POLYGON, poly) for poly in self.coords]
        if k is GeometryType.EMPTY:
            return []
        return [self]

    def vertices(self) -> Iterator[tuple[float, float]]:
        k = self.kind
        if k is GeometryType.POINT:
            yield self.coords
        elif k in (GeometryType.MULTIPOINT, GeometryType.LINESTRING):
            yield from self.coords
        elif k in (GeometryType.MULTILINESTRING, GeometryType.POLYGON):
            for part in self.coords:
                yield from part
        elif k is GeometryType.MULTIPOLYGON:
            for poly in self.coords:
                for ring in poly:
                    yield from ring

    def __str__(self) -> str:
        return to_wkt(self)


def _xy(p) -> tuple[float, float]:
    return (float(p[0]), float(p[1]))


# --------------------------------------------------------------------------
# dimension, boundary, mbb
# --------------------------------------------------------------------------

_DIMS = {
    GeometryType.EMPTY: -1,
    GeometryType.POINT: 0,
    GeometryType.MULTIPOINT: 0,
    GeometryType.LINESTRING: 1,
    GeometryType.MULTILINESTRING: 1,
    GeometryType.POLYGON: 2,
    GeometryType.MULTIPOLYGON: 2,
}


def dimension(g) -> int:
    """Topological dimension: -1 empty, 0 points, 1 lines, 2 areas.

    Accepts a single geometry or an iterable of geometries, in which case the
    maximum over the parts is returned (an empty iterable is -1).
    """
    if isinstance(g, Geometry):
        return _DIMS[g.kind]
    return max((dimension(part) for part in g), default=-1)


def mbb(g: Geometry) -> BoundingBox:
    if g.is_empty:
        raise EmptyGeometry("the empty geometry has no bounding box")
    xs = []
    ys = []
    for x, y in g.vertices():
        xs.append(x)
        ys.append(y)
    return BoundingBox(min(xs), min(ys), max(xs), max(ys))


def line_boundary_points(lines) -> list[tuple[float, float]]:
    """Endpoints that occur an odd number of times across ``lines`` (mod-2 rule)."""
    counts = Counter()
    for line in lines:
        counts[line[0]] += 1
        counts[line[-1]] += 1
    return [p for p, n in counts.items() if n % 2 == 1]


def boundary(g: Geometry) -> Geometry:
    k = g.kind
    if k in (GeometryType.EMPTY, GeometryType.POINT, GeometryType.MULTIPOINT):
        return Geometry.empty()
    if k in (GeometryType.LINESTRING, GeometryType.MULTILINESTRING):
        lines = [g.coords] if k is GeometryType.LINESTRING else list(g.coords)
        pts = line_boundary_points(lines)
        return Geometry(GeometryType.MULTIPOINT, tuple(pts)) if pts else Geometry.empty()
    if k is GeometryType.POLYGON:
        return Geometry(GeometryType.MULTILINESTRING, tuple(g.coords))
    rings = tuple(ring for poly in g.coords for ring in poly)
    return Geometry(GeometryType.MULTILINESTRING, rings)


# --------------------------------------------------------------------------
# WKT
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)"
    r"|(?P<word>[A-Za-z]+)|(?P<punct>[(),]))"
)
_CRS_PREFIX = re.compile(r"\s*<[^>]*>\s*")

_TYPES = {
    "POINT": GeometryType.POINT,
    "MULTIPOINT": GeometryType.MULTIPOINT,
    "LINESTRING": GeometryType.LINESTRING,
    "MULTILINESTRING": GeometryType.MULTILINESTRING,
    "POLYGON": GeometryType.POLYGON,
    "MULTIPOLYGON": GeometryType.MULTIPOLYGON,
}
_KNOWN_UNSUPPORTED = {
    "GEOMETRYCOLLECTION", "CIRCULARSTRING", "COMPOUNDCURVE", "CURVEPOLYGON",
    "MULTICURVE", "MULTISURFACE", "POLYHEDRALSURFACE", "TIN", "TRIANGLE", "CURVE",
    "SURFACE", "GEOMETRY",
}


class _Parser:
    def __init__(self, text: str, base: int):
        self.text = text
        self.base = base
        self.pos = 0
        self.ndims = None  # coordinate width fixed by a Z/M/ZM tag
        self.dropped = False
        self.collapsed = False
        self._peeked = None

    def offset(self, pos=None) -> int:
        pos = self.pos if pos is None else pos
        return self.base + len(self.text[:pos].encode("utf-8"))

    def fail(self, message, pos=None, code=None):
        raise ParseError(message, self.offset(pos), code)

    def _scan(self):
        """Next token as (kind, value, token start, end); kind is None at the end."""
        if self.pos >= len(self.text) or self.text[self.pos:].isspace():
            return None, None, len(self.text), len(self.text)
        m = _TOKEN.match(self.text, self.pos)
        if m is None or m.end() == self.pos:
            start = self.pos + len(self.text[self.pos:]) - len(self.text[self.pos:].lstrip())
            self.fail(f"unexpected character {self.text[start]!r}", start)
        kind = m.lastgroup
        return kind, m.group(kind), m.start(kind), m.end()

    def peek(self):
        kind, value, _, _ = self._scan()
        return kind, value

    def next(self):
        kind, value, start, end = self._scan()
        if kind is None:
            self.fail("unexpected end of input", start)
        self.pos = end
        return kind, value, start

    def expect(self, ch):
        kind, value, start = self.next()
        if value != ch:
            self.fail(f"expected {ch!r}, found {value!r}", start)

    def at_end(self) -> bool:
        return self.peek()[0] is None

    # grammar --------------------------------------------------------------

    def geometry(self) -> Geometry:
        kind, word, start = self.next()
        if kind != "word":
            self.fail(f"expected geometry type, found {word!r}", start)
        name = word.upper()
        if name not in _TYPES:
            if name in _KNOWN_UNSUPPORTED:
                raise UnsupportedType(f"unsupported geometry type {name}",
                                      self.offset(start), "UnsupportedType")
            self.fail(f"unknown geometry type {word!r}", start)
        gtype = _TYPES[name]

        kind, value = self.peek()
        if kind == "word" and value.upper() in ("Z", "M", "ZM"):
            self.next()
            self.ndims = 2 + len(value)
            self.dropped = True
            kind, value = self.peek()
        if kind == "word" and value.upper() == "EMPTY":
            self.next()
            return Geometry.empty()

        if gtype is GeometryType.POINT:
            self.expect("(")
            c = self.coord()
            self.expect(")")
            return Geometry(gtype, c)
        if gtype is GeometryType.MULTIPOINT:
            return Geometry(gtype, self.multipoint_body())
        if gtype is GeometryType.LINESTRING:
            return Geometry(gtype, self.linestring_body())
        if gtype is GeometryType.MULTILINESTRING:
            return Geometry(gtype, self.members(self.linestring_body))
        if gtype is GeometryType.POLYGON:
            return Geometry(gtype, self.polygon_body())
        return Geometry(gtype, self.members(self.polygon_body))

    def coord(self):
        values = []
        while True:
            kind, value, where, _ = self._scan()
            if kind != "num":
                break
            _, text, start = self.next()
            v = float(text)
            if not math.isfinite(v):
                self.fail(f"coordinate {text} is not finite", start)
            values.append(v)
        n = len(values)
        if n < 2:
            found = "end of input" if kind is None else repr(value)
            self.fail(f"expected a coordinate ordinate, found {found}", where)
        if n > 4 or (self.ndims is not None and n != self.ndims):
            self.fail(f"inconsistent coordinate width {n}", where)
        self.ndims = n
        if n > 2:
            self.dropped = True
        return (values[0], values[1])

    def coord_list(self):
        self.expect("(")
        out = [self.coord()]
        while True:
            kind, value, start = self.next()
            if value == ")":
                return out
            if value != ",":
                self.fail(f"expected ',' or ')', found {value!r}", start)
            out.append(self.coord())

    def _collapse(self, coords):
        out = [coords[0]]
        for c in coords[1:]:
            if c != out[-1]:
                out.append(c)
        if len(out) != len(coords):
            self.collapsed = True
        return out

    def linestring_body(self):
        start = self._scan()[2]
        coords = self.coord_list()
        if len(coords) < 2:
            self.fail("linestring needs at least 2 coordinates", start, "TooFewPoints")
        collapsed = self._collapse(coords)
        return tuple(collapsed if len(collapsed) >= 2 else coords)

    def ring(self):
        start = self._scan()[2]
        coords = self.coord_list()
        if coords[0] != coords[-1]:
            self.fail("ring is not closed", start, "UnclosedRing")
        if len(coords) < 4:
            self.fail("ring needs at least 4 coordinates", start, "TooFewPoints")
        collapsed = self._collapse(coords)
        return tuple(collapsed if len(collapsed) >= 4 else coords)

    def polygon_body(self):
        self.expect("(")
        rings = [self.ring()]
        while True:
            kind, value, start = self.next()
            if value == ")":
                return tuple(rings)
            if value != ",":
                self.fail(f"expected ',' or ')', found {value!r}", start)
            rings.append(self.ring())

    def multipoint_body(self):
        self.expect("(")
        pts = []
        while True:
            kind, value = self.peek()
            if value == "(":
                self.next()
                pts.append(self.coord())
                self.expect(")")
            elif kind == "word" and value.upper() == "EMPTY":
                self.fail("multi-geometry members must not be empty")
            else:
                pts.append(self.coord())
            kind, value, start = self.next()
            if value == ")":
                return tuple(pts)
            if value != ",":
                self.fail(f"expected ',' or ')', found {value!r}", start)

    def members(self, body):
        self.expect("(")
        parts = []
        while True:
            kind, value = self.peek()
            if kind == "word" and value.upper() == "EMPTY":
                self.fail("multi-geometry members must not be empty")
            parts.append(body())
            kind, value, start = self.next()
            if value == ")":
                return tuple(parts)
            if value != ",":
                self.fail(f"expected ',' or ')', found {value!r}", start)


def parse_wkt(text: str) -> Geometry:
    """Parse a WKT literal, optionally prefixed by a ``<crs-uri>`` as in GeoSPARQL.

    Only structure is checked here (token grammar, ring closure, minimum
    coordinate counts); OGC validity is left to :func:`geol.validity.validate`.
    Z and M ordinates are dropped and consecutive duplicate coordinates are
    collapsed, both with a :class:`GeometryWarning`.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected str, got {type(text).__name__}", 0)
    base = 0
    m = _CRS_PREFIX.match(text)
    if m:
        base = len(text[:m.end()].encode("utf-8"))
        text = text[m.end():]
    p = _Parser(text, base)
    g = p.geometry()
    if not p.at_end():
        _, value, start = p.next()
        p.fail(f"trailing input {value!r}", start)
    notes = []
    if p.dropped:
        notes.append("dropped Z/M ordinates")
    if p.collapsed:
        notes.append("collapsed duplicate consecutive coordinates")
    if notes:
        for note in notes:
            warnings.warn(note, GeometryWarning, stacklevel=2)
        g = Geometry(g.kind, g.coords, tuple(notes))
    return g


def _fmt(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _fmt_coords(coords) -> str:
    return "(" + ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in coords) + ")"


def to_wkt(g: Geometry) -> str:
    """Serialise to WKT; ``parse_wkt(to_wkt(g)) == g`` for every supported ``g``."""
    k = g.kind
    if k is GeometryType.EMPTY:
        return "POINT EMPTY"
    if k is GeometryType.POINT:
        return f"POINT ({_fmt(g.coords[0])} {_fmt(g.coords[1])})"
    if k is GeometryType.MULTIPOINT:
        return "MULTIPOINT (" + ", ".join(_fmt_coords([p]) for p in g.coords) + ")"
    if k is GeometryType.LINESTRING:
        return "LINESTRING " + _fmt_coords(g.coords)
    if k is GeometryType.MULTILINESTRING:
        return "MULTILINESTRING (" + ", ".join(_fmt_coords(ln) for ln in g.coords) + ")"
    if k is GeometryType.POLYGON:
        return "POLYGON (" + ", ".join(_fmt_coords(r) for r in g.coords) + ")"
    return "MULTIPOLYGON (" + ", ".join(
        "(" + ", ".join(_fmt_coords(r) for r in poly) + ")" for poly in g.coords) + ")"
