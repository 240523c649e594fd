"""JSON task configuration.

A task document names two resources and a relation::

    {
      "source": {"endpoint": "https://example.org/sparql",
                 "query": "SELECT ?s ?wkt WHERE { ... }",
                 "id_var": "s", "geo_var": "wkt",
                 "offset": 0, "limit": 1000, "chunksize": 500},
      "target": {...},
      "relation": "within",
      "output": "links.nt",
      "cache_dir": "/var/cache/geol"
    }

``offset``, ``limit``, ``chunksize``, ``output`` and ``cache_dir`` are
optional. Every problem in a document is collected and reported together.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from urllib.parse import urlparse

from geol.engine import LinkTask
from geol.errors import ConfigError
from geol.sparql import DEFAULT_CHUNKSIZE, ResourceSpec
from geol.topology import TopoRelation

_RESOURCE_KEYS = {"endpoint", "query", "id_var", "geo_var", "offset", "limit", "chunksize"}
_TOP_KEYS = {"source", "target", "relation", "output", "cache_dir"}


@dataclass(frozen=True)
class TaskConfig:
    source: ResourceSpec
    target: ResourceSpec
    relation: TopoRelation
    output: str = "inline"
    cache_dir: str | None = None

    def to_task(self) -> LinkTask:
        return LinkTask(self.source, self.target, self.relation, self.output)

    def with_overrides(self, relation=None, output=None, cache_dir=None) -> TaskConfig:
        changes = {}
        if relation is not None:
            try:
                changes["relation"] = TopoRelation.parse(relation)
            except ValueError as exc:
                raise ConfigError([f"relation: {exc}"]) from None
        if output is not None:
            changes["output"] = output
        if cache_dir is not None:
            changes["cache_dir"] = cache_dir
        return replace(self, **changes)

    def to_dict(self) -> dict:
        def res(spec):
            return {"endpoint": spec.endpoint, "query": spec.query, "id_var": spec.id_var,
                    "geo_var": spec.geo_var, "offset": spec.offset, "limit": spec.limit,
                    "chunksize": spec.chunksize}
        return {"source": res(self.source), "target": res(self.target),
                "relation": self.relation.value, "output": self.output, "cache_dir": self.cache_dir}

    def fingerprint(self) -> str:
        """Stable digest of everything that determines the link output."""
        doc = self.to_dict()
        doc.pop("output")
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _resource(doc, side: str, problems: list) -> ResourceSpec | None:
    if not isinstance(doc, dict):
        problems.append(f"{side}: expected an object")
        return None
    start = len(problems)
    for key in sorted(set(doc) - _RESOURCE_KEYS):
        problems.append(f"{side}.{key}: unknown field")
    for key in ("endpoint", "query", "id_var", "geo_var"):
        if key not in doc:
            problems.append(f"{side}.{key}: required field missing")
        elif not isinstance(doc[key], str) or not doc[key].strip():
            problems.append(f"{side}.{key}: expected a non-empty string")
    endpoint = doc.get("endpoint")
    if isinstance(endpoint, str) and endpoint.strip():
        url = urlparse(endpoint)
        if url.scheme not in ("http", "https") or not url.netloc:
            problems.append(f"{side}.endpoint: expected an http(s) URL, got {endpoint!r}")
    offset = doc.get("offset", 0)
    if not _is_int(offset) or offset < 0:
        problems.append(f"{side}.offset: expected an integer >= 0, got {offset!r}")
    limit = doc.get("limit", "all")
    if isinstance(limit, str) and limit.lower() == "all":
        limit = "all"
    elif not _is_int(limit) or limit < 1:
        problems.append(f"{side}.limit: expected an integer >= 1 or \"all\", got {limit!r}")
    default_chunk = min(DEFAULT_CHUNKSIZE, limit) if _is_int(limit) and limit >= 1 else DEFAULT_CHUNKSIZE
    chunksize = doc.get("chunksize", default_chunk)
    if not _is_int(chunksize) or chunksize < 1:
        problems.append(f"{side}.chunksize: expected an integer >= 1, got {chunksize!r}")
    elif _is_int(limit) and chunksize > limit:
        problems.append(f"{side}.chunksize: {chunksize} exceeds limit {limit}")
    if len(problems) > start:
        return None
    try:
        return ResourceSpec(doc["endpoint"].strip(), doc["query"], doc["id_var"].strip(),
                            doc["geo_var"].strip(), offset, limit, chunksize)
    except ValueError as exc:
        problems.extend(f"{side}: {p}" for p in str(exc).split("; "))
        return None


def parse_config(document) -> TaskConfig:
    """Validate a task document (JSON text, bytes or an already decoded dict)."""
    if isinstance(document, (bytes, bytearray)):
        try:
            document = bytes(document).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError([f"document is not UTF-8: {exc}"]) from None
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except (json.JSONDecodeError, RecursionError) as exc:
            raise ConfigError([f"document is not valid JSON: {exc}"]) from None
    if not isinstance(document, dict):
        raise ConfigError(["document must be a JSON object"])

    problems: list[str] = []
    for key in sorted(set(document) - _TOP_KEYS, key=str):
        problems.append(f"{key}: unknown field")
    specs = {}
    for side in ("source", "target"):
        if side not in document:
            problems.append(f"{side}: required field missing")
        else:
            specs[side] = _resource(document[side], side, problems)
    relation = None
    if "relation" not in document:
        problems.append("relation: required field missing")
    elif not isinstance(document["relation"], str):
        problems.append("relation: expected a string")
    else:
        try:
            relation = TopoRelation.parse(document["relation"])
        except ValueError as exc:
            problems.append(f"relation: {exc}")
    output = document.get("output", "inline")
    if not isinstance(output, str) or not output.strip():
        problems.append("output: expected a path or \"inline\"")
    cache_dir = document.get("cache_dir")
    if cache_dir is not None and (not isinstance(cache_dir, str) or not cache_dir.strip()):
        problems.append("cache_dir: expected a path")
    if problems:
        raise ConfigError(problems)
    return TaskConfig(specs["source"], specs["target"], relation, output, cache_dir)


def load_config(path) -> TaskConfig:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror or exc}"]) from None
    return parse_config(data)
