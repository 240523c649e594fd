import pytest

from geol.errors import EndpointError, QueryError
from geol.sparql import ResourceSpec, SparqlClient, TripleRow, wrap_query
from mock_endpoint import MockEndpoint

Q = "SELECT ?id ?geo WHERE { ?id <http://www.opengis.net/ont/geosparql#asWKT> ?geo }"


def make(n=10, **kw):
    ep = MockEndpoint([(f"http://ex.org/{i}", f"POINT ({i} {i})") for i in range(n)])
    client = SparqlClient(transport=ep.transport(), sleep=lambda s: None, **kw)
    return ep, client


def spec(**kw):
    return ResourceSpec("http://mock/sparql", Q, **kw)


def test_wrap_query_orders_and_hoists_prefixes():
    s = ResourceSpec("http://x", "PREFIX geo: <http://g#>\nSELECT ?id ?geo WHERE { ?id geo:asWKT ?geo }")
    q = wrap_query(s, 20, 5)
    assert q.startswith("PREFIX geo: <http://g#>\nSELECT ?id ?geo WHERE { { SELECT")
    assert q.endswith("ORDER BY ?id OFFSET 20 LIMIT 5")


def test_spec_validation():
    with pytest.raises(ValueError):
        ResourceSpec("http://x", "SELECT ?s WHERE { ?s ?p ?o }")
    with pytest.raises(ValueError):
        ResourceSpec("http://x", Q, limit=10, chunksize=20)
    with pytest.raises(ValueError):
        ResourceSpec("http://x", Q, offset=-1)
    ResourceSpec("http://x", Q, limit="all", chunksize=20)


def test_fetch_page_examples():
    _, c = make(10)
    rows = c.fetch_page(spec(), 8, 5)
    assert [r.index for r in rows] == [8, 9]
    assert c.fetch_page(spec(), 20, 5) == []
    assert [r.index for r in c.fetch_page(spec(), 0, 3)] == [0, 1, 2]
    assert rows[0] == TripleRow(8, "http://ex.org/8", "POINT (8 8)")


def test_has_more_entries():
    _, c = make(10)
    assert c.has_more_entries(spec(), 9)
    assert not c.has_more_entries(spec(), 10)
    _, empty = make(0)
    assert not empty.has_more_entries(spec(), 0)


def test_missing_geometry_kept_with_marker():
    ep = MockEndpoint([("http://ex.org/a", None), ("http://ex.org/b", "POINT (1 1)")])
    c = SparqlClient(transport=ep.transport())
    rows = c.fetch_page(spec(), 0, 5)
    assert rows[0] == TripleRow(0, "http://ex.org/a", "")


def test_retrieve_chunk_schedule():
    _, c = make(2000)
    sizes = []
    n = c.retrieve_triples(spec(chunksize=300), 0, 1000, lambda rows: sizes.append(len(rows)))
    assert n == 1000 and sizes == [300, 300, 300, 100]


def test_retrieve_short_at_end():
    _, c = make(70)
    got = []
    assert c.retrieve_triples(spec(chunksize=300), 50, 50, got.extend) == 20
    assert [r.index for r in got] == list(range(50, 70))


def test_retrieve_unbounded():
    _, c = make(70)
    got = []
    assert c.retrieve_triples(spec(chunksize=30), 0, None, got.extend) == 70


def test_failure_mid_stream_keeps_whole_chunks():
    ep, c = make(2000)
    ep.fail_after = 2
    got = []
    with pytest.raises(EndpointError) as err:
        c.retrieve_triples(spec(chunksize=300), 100, 1000, got.extend)
    assert len(got) == 600
    assert err.value.missing_from == 700
    assert err.value.stored == 600


def test_retry_then_success():
    ep, c = make(10)
    calls = []
    c._sleep = calls.append
    ep.fail_after = 0
    original = ep.answer

    def flaky(query):
        if len(calls) == 0:
            return original(query)
        ep.reset_failures()
        return original(query)

    ep.answer = flaky
    rows = c.fetch_page(spec(), 0, 2)
    assert len(rows) == 2 and calls == [1.0]


def test_query_error_not_retried():
    ep, c = make(10)
    ep.answer = lambda q: (400, b"syntax error")
    with pytest.raises(QueryError):
        c.fetch_page(spec(), 0, 1)


def test_unreachable_endpoint():
    c = SparqlClient(sleep=lambda s: None, timeout=2)
    with pytest.raises(EndpointError):
        c.fetch_page(ResourceSpec("http://127.0.0.1:9/sparql", Q), 0, 1)
