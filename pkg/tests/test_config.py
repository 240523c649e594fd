import json

import pytest
from hypothesis import given, settings, strategies as st

from geol.config import TaskConfig, load_config, parse_config
from geol.errors import ConfigError
from geol.topology import TopoRelation

Q = "SELECT ?s ?wkt WHERE { ?s <http://www.opengis.net/ont/geosparql#asWKT> ?wkt }"


def resource(**kw):
    doc = {"endpoint": "https://example.org/sparql", "query": Q, "id_var": "s", "geo_var": "wkt"}
    doc.update(kw)
    return doc


def document(**kw):
    doc = {"source": resource(), "target": resource(), "relation": "within"}
    doc.update(kw)
    return doc


def test_minimal_document_gets_defaults():
    cfg = parse_config(json.dumps(document()))
    assert isinstance(cfg, TaskConfig)
    assert cfg.relation is TopoRelation.WITHIN
    assert cfg.source.offset == 0 and cfg.source.chunksize == 5000 and cfg.source.limit == "all"
    assert cfg.output == "inline" and cfg.cache_dir is None


@pytest.mark.parametrize("name", ["covered by", "covered_by", "coveredby", "CoveredBy"])
def test_relation_aliases(name):
    assert parse_config(document(relation=name)).relation is TopoRelation.COVERED_BY


def test_missing_geo_var_is_named():
    src = resource()
    del src["geo_var"]
    with pytest.raises(ConfigError) as info:
        parse_config(document(source=src))
    assert any("source.geo_var" in p for p in info.value.problems)


def test_all_problems_reported_at_once():
    doc = document(source=resource(offset=-1, limit=0), target=resource(endpoint="ftp://x"),
                   relation="nearby", extra=1)
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    text = " | ".join(info.value.problems)
    for needle in ("source.offset", "source.limit", "target.endpoint", "relation", "extra"):
        assert needle in text
    assert len(info.value.problems) >= 5


def test_chunksize_defaults_to_small_limit():
    cfg = parse_config(document(source=resource(limit=100)))
    assert cfg.source.chunksize == 100
    with pytest.raises(ConfigError):
        parse_config(document(source=resource(limit=100, chunksize=200)))


def test_query_must_mention_variables():
    with pytest.raises(ConfigError) as info:
        parse_config(document(target=resource(geo_var="geom")))
    assert any("?geom" in p for p in info.value.problems)


def test_overrides():
    cfg = parse_config(document()).with_overrides(relation="touches", output="x.nt", cache_dir="/tmp/c")
    assert (cfg.relation, cfg.output, cfg.cache_dir) == (TopoRelation.TOUCHES, "x.nt", "/tmp/c")
    with pytest.raises(ConfigError):
        parse_config(document()).with_overrides(relation="near")


def test_fingerprint_ignores_output():
    a = parse_config(document(output="a.nt"))
    b = parse_config(document(output="b.nt"))
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != parse_config(document(relation="contains")).fingerprint()


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")


@pytest.mark.parametrize("raw", [b"", b"\xff\xfe", b"[]", b"null", b"{", b'{"source": 3}',
                                 b"[" * 100000, json.dumps(document(relation=5)).encode()])
def test_garbage_is_a_config_error(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=200))
def test_parsing_is_total_on_bytes(raw):
    try:
        parse_config(raw)
    except ConfigError:
        pass


json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False) | st.text(max_size=20),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=10), inner, max_size=4),
    max_leaves=20)


@settings(max_examples=300, deadline=None)
@given(st.fixed_dictionaries({}, optional={
    "source": st.one_of(json_values, st.just(resource())),
    "target": st.one_of(json_values, st.builds(lambda o, lim: resource(offset=o, limit=lim),
                                               json_values, json_values)),
    "relation": json_values, "output": json_values, "cache_dir": json_values}))
def test_parsing_is_total_on_documents(doc):
    try:
        parse_config(json.dumps(doc))
    except ConfigError:
        pass
