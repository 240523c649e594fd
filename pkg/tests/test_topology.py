import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from geol.errors import InvalidGeometry, UndefinedRelation
from geol.geometry import Geometry, dimension, parse_wkt
from geol.topology import (
    IntersectionMatrix, PatternMatrix, TopoRelation, evaluate, holds, matches, patterns_for,
    relate,
)
from gen import random_geometry, random_valid_geometries
from oracle import Undefined, oracle_matrix, oracle_predicate
from geol.validity import validate

SMALL = Geometry.box(1, 1, 2, 2)
BIG = Geometry.box(0, 0, 4, 4)
UNIT = Geometry.box(0, 0, 1, 1)


def cells(rows):
    return IntersectionMatrix.from_rows(rows)


def test_within_configuration():
    m = relate(SMALL, BIG)
    assert m[0, 0] == 2 and m[0, 2] == -1 and m[1, 2] == -1
    assert m == cells([[2, -1, -1], [1, -1, -1], [2, 1, 2]])
    assert m.matches("T*F**F***")
    assert str(m) == "2FF1FF212"


def test_identity_matrix():
    assert relate(UNIT, UNIT) == cells([[2, -1, -1], [-1, 1, -1], [-1, -1, 2]])


def test_disjoint_squares():
    far = Geometry.box(10, 10, 11, 11)
    assert relate(UNIT, far) == cells([[-1, -1, 2], [-1, -1, 1], [2, 1, 2]])


def test_matches_examples():
    m = cells([[2, -1, -1], [-1, 1, -1], [-1, -1, 2]])
    assert matches(m, PatternMatrix("T*F**FFF*"))
    assert not matches(m, PatternMatrix("FF*FF****"))
    assert matches(m, PatternMatrix("*********"))
    assert matches(m, "2FF*1****")
    assert not matches(m, "1********")


def test_pattern_validation():
    with pytest.raises(ValueError):
        PatternMatrix("T*F")
    with pytest.raises(ValueError):
        PatternMatrix("T*F**FFFX")


def test_within_evaluation():
    assert evaluate(TopoRelation.WITHIN, SMALL, BIG)
    assert not evaluate(TopoRelation.WITHIN, BIG, SMALL)


def test_edge_sharing_squares():
    right = Geometry.box(1, 0, 2, 1)
    assert evaluate("Touches", UNIT, right)
    assert not evaluate("Overlaps", UNIT, right)
    assert evaluate("Intersects", UNIT, right)


def test_invalid_input_rejected():
    bowtie = parse_wkt("POLYGON ((0 0, 2 2, 2 0, 0 2, 0 0))")
    with pytest.raises(InvalidGeometry):
        relate(bowtie, UNIT)


def test_crosses_undefined_for_areas_and_points():
    with pytest.raises(UndefinedRelation):
        evaluate("Crosses", UNIT, BIG)
    with pytest.raises(UndefinedRelation):
        patterns_for(TopoRelation.CROSSES, 0, 0)


def test_overlaps_mixed_dimensions_false():
    line = Geometry.linestring([(-1, 0.5), (2, 0.5)])
    assert not evaluate("Overlaps", line, UNIT)
    assert evaluate("Crosses", line, UNIT)


@pytest.mark.parametrize("name", ["covered by", "Covered_By", "COVEREDBY", "covered-by"])
def test_relation_aliases(name):
    assert TopoRelation.parse(name) is TopoRelation.COVERED_BY


def test_unknown_relation():
    with pytest.raises(ValueError):
        TopoRelation.parse("near")


def test_iris():
    assert TopoRelation.WITHIN.iri == "http://www.opengis.net/ont/geosparql#sfWithin"
    assert TopoRelation.COVERS.iri == "http://www.opengis.net/ont/geosparql#ehCovers"


@pytest.mark.parametrize("a, b, expected", [
    ("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)", "0F1FF0102"),
    ("POINT (0 1)", "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "F0FFFF212"),
    ("POINT (5 5)", "POINT (5 5)", "0FFFFFFF2"),
    ("MULTIPOINT ((0 0), (1 1))", "POINT (1 1)", "0F0FFFFF2"),
    ("LINESTRING (0 0, 1 0, 2 0)", "LINESTRING (1 0, 3 0)", "1010F0102"),
    ("LINESTRING (0 0, 1 1, 0 1, 0 0)", "POINT (0 0)", "0F1FFFFF2"),
    ("POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 1 3, 3 3, 3 1, 1 1))",
     "POLYGON ((1 1, 3 1, 3 3, 1 3, 1 1))", "FF2F112F2"),
])
def test_known_matrices(a, b, expected):
    ga, gb = parse_wkt(a), parse_wkt(b)
    assert str(relate(ga, gb)) == expected
    assert str(relate(gb, ga)) == str(IntersectionMatrix.from_string(expected).transpose())


def _all_relations(a, b):
    out = {}
    for rel in TopoRelation:
        try:
            out[rel] = evaluate(rel, a, b)
        except UndefinedRelation:
            out[rel] = None
    return out


def test_oracle_agreement_sample():
    gs = random_valid_geometries(60, seed=11)
    for a, b in itertools.product(gs, repeat=2):
        expected = oracle_matrix(a, b)
        m = relate(a, b)
        assert m.cells == expected, (str(a), str(b))
        da, db = dimension(a), dimension(b)
        for rel in TopoRelation:
            try:
                want = oracle_predicate(rel.value, expected, da, db)
            except Undefined:
                with pytest.raises(UndefinedRelation):
                    holds(rel, m, da, db)
                continue
            assert holds(rel, m, da, db) == want, (rel, str(a), str(b))


def test_shapely_cross_check():
    shapely = pytest.importorskip("shapely")
    from shapely import wkt
    gs = random_valid_geometries(40, seed=5)
    for a, b in itertools.combinations(gs, 2):
        # GEOS treats shared endpoints of multilinestring parts like us, but its
        # noding of disconnected multilines is known to differ; skip those.
        if "MULTILINESTRING" in str(a) or "MULTILINESTRING" in str(b):
            continue
        assert str(relate(a, b)) == wkt.loads(str(a)).relate(wkt.loads(str(b)))


# properties ------------------------------------------------------------------

pair_seeds = st.integers(0, 2 ** 32 - 1)


def _valid(rng):
    while True:
        g = random_geometry(rng)
        if validate(g).valid:
            return g


@settings(max_examples=150, deadline=None)
@given(pair_seeds)
def test_relation_properties(seed):
    rng = random.Random(seed)
    a, b = _valid(rng), _valid(rng)
    ab, ba = _all_relations(a, b), _all_relations(b, a)
    T = TopoRelation
    assert ab[T.WITHIN] == ba[T.CONTAINS]
    assert ab[T.COVERED_BY] == ba[T.COVERS]
    assert ab[T.DISJOINT] == (not ab[T.INTERSECTS])
    for rel in (T.EQUALS, T.DISJOINT, T.INTERSECTS, T.TOUCHES, T.OVERLAPS):
        assert ab[rel] == ba[rel]
    if ab[T.WITHIN]:
        assert ab[T.COVERED_BY]
    if ab[T.COVERED_BY]:
        assert ab[T.INTERSECTS]
    assert relate(a, b) == relate(b, a).transpose()
    assert relate(a, b)[2, 2] == 2


@settings(max_examples=60, deadline=None)
@given(pair_seeds)
def test_reflexivity(seed):
    g = _valid(random.Random(seed))
    r = _all_relations(g, g)
    T = TopoRelation
    for rel in (T.EQUALS, T.WITHIN, T.CONTAINS, T.COVERS, T.COVERED_BY, T.INTERSECTS):
        assert r[rel], rel
    for rel in (T.TOUCHES, T.OVERLAPS, T.DISJOINT):
        assert not r[rel], rel
