import math
import warnings

import pytest
from hypothesis import given, strategies as st

from geol.errors import EmptyGeometry, ParseError, UnsupportedType
from geol.geometry import (
    BoundingBox, Geometry, GeometryType, GeometryWarning, boundary, dimension, mbb,
    parse_wkt, to_wkt,
)


def test_parse_point():
    assert parse_wkt("POINT (1 2)") == Geometry.point(1, 2)


def test_parse_polygon():
    g = parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))")
    assert g.kind is GeometryType.POLYGON
    assert len(g.coords) == 1 and len(g.coords[0]) == 5


def test_parse_rejects_open_short_ring():
    with pytest.raises(ParseError) as err:
        parse_wkt("POLYGON ((0 0, 1 1))")
    assert err.value.code in ("UnclosedRing", "TooFewPoints")


def test_unclosed_ring_code():
    with pytest.raises(ParseError) as err:
        parse_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 1))")
    assert err.value.code == "UnclosedRing"


def test_geometrycollection_unsupported():
    with pytest.raises(UnsupportedType):
        parse_wkt("GEOMETRYCOLLECTION (POINT (1 2))")


@pytest.mark.parametrize("text, offset", [
    ("POINT (1 2", 10),
    ("POINT (1 x)", 9),
    ("POINT (1 2) junk", 12),
    ("LINESTRING (0 0)", 11),
])
def test_parse_error_offsets(text, offset):
    with pytest.raises(ParseError) as err:
        parse_wkt(text)
    assert err.value.offset == offset
    assert f"at byte {offset}" in str(err.value)


def test_offsets_count_bytes_after_crs_prefix():
    prefix = "<http://www.opengis.net/def/crs/OGC/1.3/CRS84> "
    with pytest.raises(ParseError) as err:
        parse_wkt(prefix + "POINT (1 x)")
    assert err.value.offset == len(prefix) + 9


def test_crs_prefix_stripped():
    g = parse_wkt("<http://www.opengis.net/def/crs/EPSG/0/4326> POINT (3 4)")
    assert g == Geometry.point(3, 4)


def test_non_finite_rejected():
    with pytest.raises(ParseError):
        parse_wkt("POINT (1e400 2)")


def test_z_dropped_with_warning():
    with pytest.warns(GeometryWarning):
        g = parse_wkt("LINESTRING Z (0 0 1, 1 1 2)")
    assert g == Geometry.linestring([(0, 0), (1, 1)])


def test_untagged_z_dropped_with_warning():
    with pytest.warns(GeometryWarning):
        g = parse_wkt("POINT (1 2 3)")
    assert g == Geometry.point(1, 2)


def test_mixed_coordinate_width_rejected():
    with pytest.raises(ParseError):
        parse_wkt("LINESTRING (0 0, 1 1 1)")


def test_duplicates_collapsed_with_warning():
    with pytest.warns(GeometryWarning):
        g = parse_wkt("LINESTRING (0 0, 0 0, 1 1)")
    assert g.coords == ((0.0, 0.0), (1.0, 1.0))
    assert g.notes


def test_empty_variants():
    for text in ("POINT EMPTY", "POLYGON EMPTY", "MULTIPOLYGON EMPTY"):
        assert parse_wkt(text).is_empty


def test_mbb_examples():
    assert mbb(Geometry.box(0, 0, 4, 4)) == BoundingBox(0, 0, 4, 4)
    assert mbb(Geometry.point(3, 7)) == BoundingBox(3, 7, 3, 7)
    assert mbb(Geometry.multipoint([(1, 5), (3, 2)])).as_tuple() == (1, 2, 3, 5)
    with pytest.raises(EmptyGeometry):
        mbb(Geometry.empty())


def test_bbox_rejects_inverted():
    with pytest.raises(ValueError):
        BoundingBox(1, 0, 0, 1)


def test_boundary_examples():
    assert boundary(Geometry.point(1, 2)).is_empty
    b = boundary(Geometry.linestring([(0, 0), (1, 0), (1, 1)]))
    assert b.kind is GeometryType.MULTIPOINT and set(b.coords) == {(0, 0), (1, 1)}
    assert boundary(Geometry.linestring([(0, 0), (1, 0), (1, 1), (0, 0)])).is_empty
    holed = Geometry.polygon([(0, 0), (4, 0), (4, 4), (0, 4), (0, 0)],
                             [[(1, 1), (1, 2), (2, 2), (2, 1), (1, 1)]])
    b = boundary(holed)
    assert b.kind is GeometryType.MULTILINESTRING and len(b.coords) == 2


def test_boundary_mod2_rule():
    g = Geometry.multilinestring([[(0, 0), (1, 0)], [(1, 0), (2, 0)]])
    assert set(boundary(g).coords) == {(0, 0), (2, 0)}


def test_dimension_examples():
    assert dimension(Geometry.empty()) == -1
    assert dimension(Geometry.multipoint([(0, 0)])) == 0
    assert dimension([Geometry.point(0, 0), Geometry.linestring([(0, 0), (1, 1)])]) == 1
    assert dimension(Geometry.box(0, 0, 1, 1)) == 2


# property tests ------------------------------------------------------------

coord = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
xy = st.tuples(coord, coord)


def _distinct_run(pts):
    out = [pts[0]]
    for p in pts[1:]:
        if p != out[-1]:
            out.append(p)
    return out


lines = st.lists(xy, min_size=2, max_size=6).map(_distinct_run).filter(lambda l: len(l) >= 2)


@st.composite
def rings(draw):
    pts = _distinct_run(draw(st.lists(xy, min_size=3, max_size=6)))
    if pts[-1] == pts[0]:
        pts.pop()
    if len(pts) < 3:
        pts = [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0)]
    return pts + pts[:1]


geometries = st.one_of(
    xy.map(lambda p: Geometry.point(*p)),
    st.lists(xy, min_size=1, max_size=4).map(Geometry.multipoint),
    lines.map(Geometry.linestring),
    st.lists(lines, min_size=1, max_size=3).map(Geometry.multilinestring),
    st.lists(rings(), min_size=1, max_size=3).map(lambda rs: Geometry.polygon(rs[0], rs[1:])),
    st.lists(st.lists(rings(), min_size=1, max_size=2), min_size=1, max_size=2)
    .map(Geometry.multipolygon),
)


@given(geometries)
def test_wkt_round_trip(g):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert parse_wkt(to_wkt(g)) == g


@given(geometries)
def test_mbb_contains_members(g):
    box = mbb(g)
    for part in g.members():
        assert box.contains(mbb(part))
    for x, y in g.vertices():
        assert box.contains_point(x, y)


@given(geometries)
def test_boundary_of_boundary_is_at_most_points(g):
    assert dimension(boundary(boundary(g))) <= 0


def test_repr_roundtrip_of_awkward_floats():
    g = Geometry.point(0.1, -math.pi)
    assert parse_wkt(to_wkt(g)) == g
