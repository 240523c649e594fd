"""Paginated retrieval of (id, geometry) rows from a SPARQL endpoint.

The user's SELECT query is wrapped so that every page request sees the same
ordering::

    SELECT ?id ?geo WHERE { { <user query> } } ORDER BY ?id OFFSET o LIMIT n

Row ``k`` of a page fetched at offset ``o`` therefore always denotes the
same triple index ``o + k``, which is what makes interval caching sound.
PREFIX and BASE declarations are lifted out of the user query, since they
are only legal in the prologue of the outer query.
"""

from __future__ import annotations

import logging
import re
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple

import httpx

from geol.errors import EndpointError, QueryError

log = logging.getLogger(__name__)

DEFAULT_CHUNKSIZE = 5000
RESULTS_JSON = "application/sparql-results+json"

_PROLOGUE = re.compile(
    r"\A(?:\s+|#[^\n]*\n|PREFIX\s+[\w.\-]*:\s*<[^>]*>|BASE\s+<[^>]*>)*",
    re.IGNORECASE,
)
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _mentions(query: str, var: str) -> bool:
    return re.search(rf"[?$]{re.escape(var)}\b", query) is not None


@dataclass(frozen=True)
class ResourceSpec:
    """One resource set: where to fetch it and which window of rows to use."""

    endpoint: str
    query: str
    id_var: str = "id"
    geo_var: str = "geo"
    offset: int = 0
    limit: int | str = "all"
    chunksize: int = DEFAULT_CHUNKSIZE

    def __post_init__(self):
        problems = []
        for name in ("id_var", "geo_var"):
            var = getattr(self, name)
            if not isinstance(var, str) or not _NAME.match(var):
                problems.append(f"{name} must be a SPARQL variable name, got {var!r}")
            elif not _mentions(self.query, var):
                problems.append(f"query does not mention ?{var}")
        if not isinstance(self.offset, int) or isinstance(self.offset, bool) or self.offset < 0:
            problems.append(f"offset must be a non-negative integer, got {self.offset!r}")
        if self.limit != "all" and (not isinstance(self.limit, int)
                                    or isinstance(self.limit, bool) or self.limit < 1):
            problems.append(f"limit must be a positive integer or 'all', got {self.limit!r}")
        if not isinstance(self.chunksize, int) or isinstance(self.chunksize, bool) or self.chunksize < 1:
            problems.append(f"chunksize must be a positive integer, got {self.chunksize!r}")
        elif isinstance(self.limit, int) and not isinstance(self.limit, bool) \
                and self.limit >= 1 and self.chunksize > self.limit:
            problems.append(f"chunksize {self.chunksize} exceeds limit {self.limit}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def finite(self) -> bool:
        return self.limit != "all"


class TripleRow(NamedTuple):
    index: int
    id: str
    geo_wkt: str  # "" when the row had no geometry binding


def wrap_query(spec: ResourceSpec, offset: int, count: int) -> str:
    m = _PROLOGUE.match(spec.query)
    prologue = spec.query[:m.end()].strip()
    body = spec.query[m.end():].strip()
    head = prologue + "\n" if prologue else ""
    return (f"{head}SELECT ?{spec.id_var} ?{spec.geo_var} WHERE {{ {{ {body} }} }}\n"
            f"ORDER BY ?{spec.id_var} OFFSET {offset} LIMIT {count}")


class SparqlClient:
    """Stateless SPARQL 1.1 protocol client (form-encoded POST, JSON results).

    Each failed page request is retried ``retries`` times with exponential
    backoff ``backoff * 2**attempt`` seconds before an :class:`EndpointError`
    is raised. Endpoint-reported query faults (HTTP 4xx) are not retried.
    """

    def __init__(self, *, timeout: float = 60.0, retries: int = 1, backoff: float = 1.0,
                 sleep: Callable[[float], None] = time.sleep, headers: dict | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep
        self._http = httpx.Client(timeout=timeout, transport=transport,
                                  headers={"Accept": RESULTS_JSON, **(headers or {})})

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # single page ---------------------------------------------------------------

    def fetch_page(self, spec: ResourceSpec, offset: int, count: int) -> list[TripleRow]:
        if count < 1:
            raise ValueError("count must be >= 1")
        query = wrap_query(spec, offset, count)
        attempt = 0
        while True:
            try:
                return self._fetch_once(spec, query, offset, count)
            except QueryError:
                raise
            except EndpointError as exc:
                if attempt >= self.retries:
                    raise
                delay = self.backoff * 2 ** attempt
                log.warning("page at offset %d failed (%s); retrying in %.1fs", offset, exc, delay)
                self._sleep(delay)
                attempt += 1

    def _fetch_once(self, spec, query, offset, count) -> list[TripleRow]:
        try:
            resp = self._http.post(spec.endpoint, data={"query": query})
        except httpx.HTTPError as exc:
            raise EndpointError(f"request to {spec.endpoint} failed: {exc}") from exc
        if 400 <= resp.status_code < 500:
            raise QueryError(f"endpoint rejected query (HTTP {resp.status_code}): {resp.text[:500]}")
        if resp.status_code != 200:
            raise EndpointError(f"endpoint returned HTTP {resp.status_code}")
        try:
            bindings = resp.json()["results"]["bindings"]
        except (ValueError, KeyError, TypeError) as exc:
            raise EndpointError(f"malformed SPARQL results: {exc}") from exc
        if not isinstance(bindings, list) or len(bindings) > count:
            raise EndpointError("malformed SPARQL results: unexpected bindings")
        rows = []
        for k, b in enumerate(bindings):
            try:
                ident = b[spec.id_var]["value"]
                geo = b.get(spec.geo_var)
                wkt = geo["value"] if geo is not None else ""
            except (KeyError, TypeError, AttributeError) as exc:
                raise EndpointError(f"malformed binding at offset {offset + k}: {exc}") from exc
            rows.append(TripleRow(offset + k, str(ident), str(wkt)))
        return rows

    def has_more_entries(self, spec: ResourceSpec, offset: int) -> bool:
        return bool(self.fetch_page(spec, offset, 1))

    # chunked download -------------------------------------------------------------

    def retrieve_triples(self, spec: ResourceSpec, offset: int, count: int | None, sink) -> int:
        """Fetch ``count`` rows from ``offset`` in pages of ``spec.chunksize``.

        Every page is handed to ``sink`` (a callable or an object with
        ``append_rows``) before the next one is requested. ``count=None``
        downloads until the endpoint runs out. Returns the number of rows
        stored; fewer than ``count`` means the data ended.
        """
        persist = sink.append_rows if hasattr(sink, "append_rows") else sink
        stored = 0
        pos = offset
        while count is None or stored < count:
            n = spec.chunksize if count is None else min(spec.chunksize, count - stored)
            try:
                rows = self.fetch_page(spec, pos, n)
            except EndpointError as exc:
                exc.missing_from = pos
                exc.stored = stored
                raise
            if rows:
                persist(rows)
            stored += len(rows)
            pos += len(rows)
            if len(rows) < n:
                break
        return stored
