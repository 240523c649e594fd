"""DE-9IM intersection matrices and the named topological predicates.

``relate`` never materialises exteriors. Every segment of one geometry is
split at its intersections with the other, and each resulting piece is
located against the other geometry. Areas are handled through the side on
which their interior lies: rings are normalised so the interior is always on
the left. This is enough to derive all nine cells exactly for valid inputs
of any dimension pairing.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from enum import Enum, IntEnum

from geol import kernels
from geol.errors import InvalidGeometry, UndefinedRelation
from geol.geometry import Geometry, GeometryType, dimension, line_boundary_points
from geol.validity import validate

GEOSPARQL = "http://www.opengis.net/ont/geosparql#"


class Location(IntEnum):
    INTERIOR = 0
    BOUNDARY = 1
    EXTERIOR = 2


I, B, E = Location.INTERIOR, Location.BOUNDARY, Location.EXTERIOR
_SYMBOL = {-1: "F", 0: "0", 1: "1", 2: "2"}


@dataclass(frozen=True)
class IntersectionMatrix:
    """3x3 matrix of intersection dimensions; rows are a's I/B/E, columns b's."""

    cells: tuple

    def __post_init__(self):
        if len(self.cells) != 9 or any(c not in (-1, 0, 1, 2) for c in self.cells):
            raise ValueError(f"bad DE-9IM cells {self.cells!r}")

    @classmethod
    def from_string(cls, s: str) -> IntersectionMatrix:
        return cls(tuple(-1 if ch in "Ff" else int(ch) for ch in s))

    @classmethod
    def from_rows(cls, rows) -> IntersectionMatrix:
        return cls(tuple(c for row in rows for c in row))

    def __getitem__(self, idx) -> int:
        r, c = idx
        return self.cells[3 * r + c]

    def rows(self) -> list[list[int]]:
        return [list(self.cells[i:i + 3]) for i in (0, 3, 6)]

    def transpose(self) -> IntersectionMatrix:
        c = self.cells
        return IntersectionMatrix((c[0], c[3], c[6], c[1], c[4], c[7], c[2], c[5], c[8]))

    def matches(self, pattern) -> bool:
        return matches(self, pattern)

    def __str__(self) -> str:
        return "".join(_SYMBOL[c] for c in self.cells)


@dataclass(frozen=True)
class PatternMatrix:
    chars: str

    def __post_init__(self):
        if len(self.chars) != 9 or any(ch not in "TF*012" for ch in self.chars):
            raise ValueError(f"invalid DE-9IM pattern {self.chars!r}")

    def __str__(self) -> str:
        return self.chars


def matches(m: IntersectionMatrix, p) -> bool:
    chars = p.chars if isinstance(p, PatternMatrix) else PatternMatrix(p).chars
    for cell, ch in zip(m.cells, chars):
        if ch == "*":
            continue
        if ch == "T":
            if cell < 0:
                return False
        elif ch == "F":
            if cell != -1:
                return False
        elif cell != int(ch):
            return False
    return True


class TopoRelation(str, Enum):
    EQUALS = "Equals"
    DISJOINT = "Disjoint"
    INTERSECTS = "Intersects"
    TOUCHES = "Touches"
    CROSSES = "Crosses"
    OVERLAPS = "Overlaps"
    WITHIN = "Within"
    CONTAINS = "Contains"
    COVERS = "Covers"
    COVERED_BY = "CoveredBy"

    @classmethod
    def parse(cls, name: str) -> TopoRelation:
        """Case-insensitive lookup; ``covered by``/``covered_by``/``coveredby`` all work."""
        if isinstance(name, cls):
            return name
        key = "".join(str(name).lower().replace("_", " ").replace("-", " ").split())
        try:
            return _BY_KEY[key]
        except KeyError:
            raise ValueError(f"unknown topological relation {name!r}") from None

    @property
    def iri(self) -> str:
        if self is TopoRelation.COVERS:
            return GEOSPARQL + "ehCovers"
        if self is TopoRelation.COVERED_BY:
            return GEOSPARQL + "ehCoveredBy"
        return GEOSPARQL + "sf" + self.value


_BY_KEY = {r.value.lower(): r for r in TopoRelation}

_P = PatternMatrix
_FIXED = {
    TopoRelation.EQUALS: (_P("T*F**FFF*"),),
    TopoRelation.DISJOINT: (_P("FF*FF****"),),
    TopoRelation.TOUCHES: (_P("FT*******"), _P("F**T*****"), _P("F***T****")),
    TopoRelation.WITHIN: (_P("T*F**F***"),),
    TopoRelation.CONTAINS: (_P("T*****FF*"),),
    TopoRelation.COVERS: (_P("T*****FF*"), _P("*T****FF*"), _P("***T**FF*"), _P("****T*FF*")),
    TopoRelation.COVERED_BY: (_P("T*F**F***"), _P("*TF**F***"), _P("**FT*F***"), _P("**F*TF***")),
}


def patterns_for(rel: TopoRelation, dim_a: int, dim_b: int) -> tuple:
    """Pattern disjunction deciding ``rel`` for the given input dimensions.

    Intersects is returned as the Disjoint pattern; callers negate it.
    Raises :class:`UndefinedRelation` for Crosses on point/point and
    area/area pairs. Overlaps on mixed dimensions yields no patterns (never
    true).
    """
    rel = TopoRelation.parse(rel)
    if rel in _FIXED:
        return _FIXED[rel]
    if rel is TopoRelation.INTERSECTS:
        return _FIXED[TopoRelation.DISJOINT]
    if rel is TopoRelation.CROSSES:
        if dim_a < dim_b:
            return (_P("T*T******"),)
        if dim_a > dim_b:
            return (_P("T*****T**"),)
        if dim_a == 1:
            return (_P("0********"),)
        raise UndefinedRelation(f"Crosses is undefined for dimensions {dim_a}/{dim_b}")
    # Overlaps
    if dim_a != dim_b:
        return ()
    if dim_a == 1:
        return (_P("1*T***T**"),)
    return (_P("T*T***T**"),)


def holds(rel: TopoRelation, m: IntersectionMatrix, dim_a: int, dim_b: int) -> bool:
    """Decide a relation from an already computed matrix."""
    pats = patterns_for(rel, dim_a, dim_b)
    hit = any(matches(m, p) for p in pats)
    return not hit if rel is TopoRelation.INTERSECTS else hit


def evaluate(rel, a: Geometry, b: Geometry) -> bool:
    rel = TopoRelation.parse(rel)
    return holds(rel, relate(a, b), dimension(a), dimension(b))


# --------------------------------------------------------------------------
# prepared geometry
# --------------------------------------------------------------------------

class Prepared:
    """Flattened, orientation-normalised view of a geometry used by ``relate``."""

    __slots__ = ("dim", "points", "segs", "bnd", "polys", "bbox", "bdim")

    def __init__(self, g: Geometry):
        self.dim = dimension(g)
        self.points = frozenset()
        self.segs = array("d")
        self.bnd = frozenset()
        self.polys = []
        self.bbox = None
        k = g.kind
        if k is GeometryType.EMPTY:
            self.bdim = -1
            return
        xs = [p[0] for p in g.vertices()]
        ys = [p[1] for p in g.vertices()]
        self.bbox = (min(xs), min(ys), max(xs), max(ys))
        if self.dim == 0:
            self.points = frozenset(g.vertices())
            self.bdim = -1
        elif self.dim == 1:
            lines = [g.coords] if k is GeometryType.LINESTRING else g.coords
            for line in lines:
                for (x1, y1), (x2, y2) in zip(line, line[1:]):
                    self.segs.extend((x1, y1, x2, y2))
            self.bnd = frozenset(line_boundary_points(lines))
            self.bdim = 0 if self.bnd else -1
        else:
            polys = [g.coords] if k is GeometryType.POLYGON else g.coords
            for poly in polys:
                flats = []
                for r, ring in enumerate(poly):
                    ccw = _signed_area(ring) > 0
                    if ccw != (r == 0):
                        ring = ring[::-1]
                    flat = array("d")
                    for x, y in ring:
                        flat.append(x)
                        flat.append(y)
                    flats.append(flat)
                    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
                        self.segs.extend((x1, y1, x2, y2))
                rx = flats[0][0::2]
                ry = flats[0][1::2]
                self.polys.append((flats[0], flats[1:], (min(rx), min(ry), max(rx), max(ry))))
            self.bdim = 1

    def locate(self, x: float, y: float) -> Location:
        dim = self.dim
        if dim == 2:
            for shell, holes, (x0, y0, x1, y1) in self.polys:
                if x < x0 or x > x1 or y < y0 or y > y1:
                    continue
                r = kernels.point_in_ring(x, y, shell)
                if r == 0:
                    return B
                if r < 0:
                    continue
                for hole in holes:
                    h = kernels.point_in_ring(x, y, hole)
                    if h == 0:
                        return B
                    if h > 0:
                        break
                else:
                    return I
            return E
        if dim == 1:
            if (x, y) in self.bnd:
                return B
            return I if kernels.point_on_segments(x, y, self.segs) else E
        if dim == 0:
            return I if (x, y) in self.points else E
        return E


def _signed_area(ring) -> float:
    s = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def prepare(g: Geometry) -> Prepared:
    p = g.__dict__.get("_prepared")
    if p is None:
        p = Prepared(g)
        object.__setattr__(g, "_prepared", p)
    return p


# --------------------------------------------------------------------------
# relate
# --------------------------------------------------------------------------

def relate(a: Geometry, b: Geometry) -> IntersectionMatrix:
    for g, side in ((a, "first"), (b, "second")):
        report = validate(g)
        if not report.valid:
            raise InvalidGeometry(f"{side} geometry is invalid: {report}", report)
    return relate_prepared(prepare(a), prepare(b))


def relate_prepared(pa: Prepared, pb: Prepared) -> IntersectionMatrix:
    """``relate`` on prepared inputs, skipping the validity check."""
    if pa.dim > pb.dim:
        return IntersectionMatrix(tuple(_relate(pb, pa))).transpose()
    return IntersectionMatrix(tuple(_relate(pa, pb)))


def _relate(pa: Prepared, pb: Prepared) -> list:
    # pa.dim <= pb.dim
    m = [-1] * 9
    m[8] = 2
    if pa.dim < 0 or pb.dim < 0:
        if pb.dim >= 0:
            m[6] = pb.dim
            m[7] = pb.bdim
        return m
    ax0, ay0, ax1, ay1 = pa.bbox
    bx0, by0, bx1, by1 = pb.bbox
    if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
        m[2] = pa.dim
        m[5] = pa.bdim
        m[6] = pb.dim
        m[7] = pb.bdim
        return m

    if pa.dim == 0:
        for x, y in pa.points:
            m[pb.locate(x, y)] = 0
        m[6] = pb.dim
        if pb.dim == 0:
            if pb.points <= pa.points:
                m[6] = -1
        elif pb.dim == 1:
            if any(q not in pa.points for q in pb.bnd):
                m[7] = 0
        else:
            m[7] = 1
        return m

    if pa.dim == 1 and pb.dim == 1:
        return _relate_lines(pa, pb, m)
    if pa.dim == 1:
        return _relate_line_area(pa, pb, m)
    return _relate_areas(pa, pb, m)


def _relate_lines(pa, pb, m):
    pieces, nodes = kernels.split_segments(pa.segs, pb.segs)
    for _, _, on in pieces:
        if on:
            m[0] = 1          # I(a) & I(b)
        else:
            m[2] = 1          # I(a) & E(b)
    if m[0] < 0:
        for node in nodes:
            if node not in pa.bnd and node not in pb.bnd:
                m[0] = 0
                break
    for x, y in pb.bnd:
        loc = pa.locate(x, y)
        if loc == I:
            m[1] = 0          # I(a) & B(b)
        elif loc == B:
            m[4] = 0
        else:
            m[7] = 0          # E(a) & B(b)
    for x, y in pa.bnd:
        loc = pb.locate(x, y)
        m[3 + loc] = 0
    pieces_b, _ = kernels.split_segments(pb.segs, pa.segs)
    if any(on == 0 for _, _, on in pieces_b):
        m[6] = 1              # E(a) & I(b)
    return m


def _relate_line_area(pa, pb, m):
    pieces, nodes = kernels.split_segments(pa.segs, pb.segs)
    for mx, my, on in pieces:
        if on:
            m[1] = 1          # I(a) & B(b)
        else:
            loc = pb.locate(mx, my)
            if loc == I:
                m[0] = 1
            elif loc == E:
                m[2] = 1
            else:
                m[1] = 1
    if m[1] < 0:
        for node in nodes:
            if node not in pa.bnd:
                m[1] = 0
                break
    for x, y in pa.bnd:
        m[3 + pb.locate(x, y)] = 0
    m[6] = 2
    pieces_b, _ = kernels.split_segments(pb.segs, pa.segs)
    if any(on == 0 for _, _, on in pieces_b):
        m[7] = 1              # E(a) & B(b)
    return m


def _relate_areas(pa, pb, m):
    ii = ie = ei = False
    shared = False
    a_in_b = a_out_b = False
    pieces, nodes = kernels.split_segments(pa.segs, pb.segs)
    for mx, my, on in pieces:
        if on:
            shared = True
            if on > 0:
                ii = True
            else:
                ie = ei = True
            continue
        loc = pb.locate(mx, my)
        if loc == I:
            a_in_b = True
        elif loc == E:
            a_out_b = True
        else:
            shared = True
    b_in_a = b_out_a = False
    pieces_b, _ = kernels.split_segments(pb.segs, pa.segs)
    for mx, my, on in pieces_b:
        if on:
            continue
        loc = pa.locate(mx, my)
        if loc == I:
            b_in_a = True
        elif loc == E:
            b_out_a = True
    if ii or a_in_b or b_in_a:
        m[0] = 2
    if b_in_a:
        m[1] = 1
    if ie or a_out_b or b_in_a:
        m[2] = 2
    if a_in_b:
        m[3] = 1
    if shared:
        m[4] = 1
    elif nodes:
        m[4] = 0
    if a_out_b:
        m[5] = 1
    if ei or b_out_a or a_in_b:
        m[6] = 2
    if b_out_a:
        m[7] = 1
    return m
