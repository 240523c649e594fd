"""Instrumented in-process SPARQL endpoint serving a fixed row list."""

from __future__ import annotations

import json
import re
import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs

import httpx

_WINDOW = re.compile(r"ORDER BY \?(\w+) OFFSET (\d+) LIMIT (\d+)\s*$")


class MockEndpoint:
    """Answers wrapped page queries from ``rows`` (a list of (id, wkt-or-None)).

    ``fetched`` counts how often every triple index was returned, ``requests``
    counts page requests. After ``fail_after`` successful requests every
    further request fails with HTTP 500 until ``fail_after`` is reset.
    """

    def __init__(self, rows, id_var="id", geo_var="geo"):
        self.rows = list(rows)
        self.id_var = id_var
        self.geo_var = geo_var
        self.fetched = Counter()
        self.requests = 0
        self.pages = []
        self.queries = []
        self.fail_after = None
        self._ok = 0
        self._lock = threading.Lock()

    def answer(self, query: str) -> tuple[int, bytes]:
        with self._lock:
            self.requests += 1
            self.queries.append(query)
            if self.fail_after is not None and self._ok >= self.fail_after:
                return 500, b"endpoint exploded"
            m = _WINDOW.search(query)
            if m is None:
                return 400, b"unsupported query"
            offset, limit = int(m.group(2)), int(m.group(3))
            page = self.rows[offset:offset + limit]
            bindings = []
            for k, (ident, wkt) in enumerate(page):
                b = {self.id_var: {"type": "uri", "value": ident}}
                if wkt is not None:
                    b[self.geo_var] = {"type": "literal", "value": wkt}
                bindings.append(b)
                self.fetched[offset + k] += 1
            self._ok += 1
            self.pages.append((offset, limit, len(page)))
            body = {"head": {"vars": [self.id_var, self.geo_var]}, "results": {"bindings": bindings}}
            return 200, json.dumps(body).encode()

    def reset_failures(self):
        self.fail_after = None
        self._ok = 0

    # httpx.MockTransport handler
    def __call__(self, request: httpx.Request) -> httpx.Response:
        form = parse_qs(request.content.decode())
        status, body = self.answer(form.get("query", [""])[0])
        return httpx.Response(status, content=body,
                              headers={"Content-Type": "application/sparql-results+json"})

    def transport(self) -> httpx.MockTransport:
        return httpx.MockTransport(self)

    # real HTTP server, for CLI and service tests
    def serve(self):
        endpoint = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                n = int(self.headers.get("Content-Length", 0))
                form = parse_qs(self.rfile.read(n).decode())
                status, body = endpoint.answer(form.get("query", [""])[0])
                self.send_response(status)
                self.send_header("Content-Type", "application/sparql-results+json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server, f"http://127.0.0.1:{server.server_address[1]}/sparql"


def grid_rows(n, prefix="http://example.org/r/", bowties=()):
    """n unit squares on a grid with gaps between them; listed indices become bowties."""
    side = max(1, int(n ** 0.5 + 0.999999))
    rows = []
    bad = set(bowties)
    for i in range(n):
        x, y = 2 * (i % side), 2 * (i // side)
        if i in bad:
            wkt = f"POLYGON (({x} {y}, {x + 1} {y + 1}, {x + 1} {y}, {x} {y + 1}, {x} {y}))"
        else:
            wkt = f"POLYGON (({x} {y}, {x + 1} {y}, {x + 1} {y + 1}, {x} {y + 1}, {x} {y}))"
        rows.append((f"{prefix}{i:07d}", wkt))
    return rows


def router(endpoints: dict) -> httpx.MockTransport:
    """One transport serving several mock endpoints, keyed by URL host."""
    def handle(request: httpx.Request) -> httpx.Response:
        return endpoints[request.url.host](request)
    return httpx.MockTransport(handle)
