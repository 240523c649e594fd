"""Persistent resource tables with interval bookkeeping.

Each resource (endpoint + query + variable names) gets one directory::

    <root>/tables/<key>/meta.json   coverage, exhausted_at, committed log size
    <root>/tables/<key>/rows.log    append-only, length-prefixed row records
    <root>/tables/<key>/lock        inter-process lock file

A chunk is committed in two steps: its records are appended to ``rows.log``
and fsynced, then ``meta.json`` is replaced atomically (temp file + rename)
with the extended coverage and the new log size. Bytes past the committed
size belong to an interrupted append and are truncated when the table is
opened, so readers only ever see whole chunks.

:meth:`CacheStore.ensure_cached` downloads each missing triple index at
most once across all calls, probing the endpoint before fetching beyond the
highest stored index.
"""

from __future__ import annotations

import bisect
import hashlib
import json
import os
import struct
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from filelock import FileLock

from geol.errors import CacheMiss, EndpointError, StorageError
from geol.sparql import ResourceSpec, SparqlClient, TripleRow

CACHE_ENV = "GEOL_CACHE_DIR"
_HEADER = struct.Struct(">IQI")  # record length, index, id length


class Interval(NamedTuple):
    lo: int
    hi: int  # inclusive


class IntervalSet:
    """Sorted, disjoint, non-adjacent closed integer intervals."""

    def __init__(self, intervals: Iterable = ()):
        self._lo: list[int] = []
        self._hi: list[int] = []
        for lo, hi in intervals:
            self.add(lo, hi)

    def __iter__(self) -> Iterator[Interval]:
        return (Interval(lo, hi) for lo, hi in zip(self._lo, self._hi))

    def __len__(self) -> int:
        return len(self._lo)

    def __bool__(self) -> bool:
        return bool(self._lo)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and list(self) == list(other)

    def __repr__(self) -> str:
        return f"IntervalSet({[list(iv) for iv in self]})"

    def copy(self) -> IntervalSet:
        out = IntervalSet()
        out._lo = list(self._lo)
        out._hi = list(self._hi)
        return out

    @property
    def min(self) -> int | None:
        return self._lo[0] if self._lo else None

    @property
    def max(self) -> int | None:
        return self._hi[-1] if self._hi else None

    def count(self) -> int:
        return sum(hi - lo + 1 for lo, hi in self)

    def add(self, lo: int, hi: int) -> None:
        if lo > hi or lo < 0:
            raise ValueError(f"bad interval [{lo}, {hi}]")
        # first interval that could touch [lo, hi] (its hi >= lo - 1)
        i = bisect.bisect_left(self._hi, lo - 1)
        j = i
        while j < len(self._lo) and self._lo[j] <= hi + 1:
            lo = min(lo, self._lo[j])
            hi = max(hi, self._hi[j])
            j += 1
        self._lo[i:j] = [lo]
        self._hi[i:j] = [hi]

    def contains(self, lo: int, hi: int) -> bool:
        i = bisect.bisect_right(self._lo, lo) - 1
        return i >= 0 and self._hi[i] >= hi

    def intersection(self, lo: int, hi: int | None) -> list[Interval]:
        out = []
        i = max(0, bisect.bisect_right(self._lo, lo) - 1)
        for k in range(i, len(self._lo)):
            a, b = self._lo[k], self._hi[k]
            if hi is not None and a > hi:
                break
            a, b = max(a, lo), b if hi is None else min(b, hi)
            if a <= b:
                out.append(Interval(a, b))
        return out

    def difference(self, lo: int, hi: int | None) -> list[Interval | tuple]:
        """Parts of ``[lo, hi]`` not covered; ``hi=None`` means unbounded.

        An unbounded request ends with a ``(start, None)`` gap.
        """
        out = []
        pos = lo
        for a, b in self.intersection(lo, hi):
            if a > pos:
                out.append(Interval(pos, a - 1))
            pos = b + 1
        if hi is None:
            out.append(Interval(pos, None))
        elif pos <= hi:
            out.append(Interval(pos, hi))
        return out

    def check(self) -> None:
        for k in range(len(self._lo)):
            assert 0 <= self._lo[k] <= self._hi[k]
            if k:
                assert self._lo[k] > self._hi[k - 1] + 1, "overlapping or adjacent intervals"


def table_key(spec: ResourceSpec) -> str:
    """Stable key of a resource: endpoint, whitespace-normalised query, variable names."""
    query = " ".join(spec.query.split())
    blob = json.dumps([spec.endpoint, query, spec.id_var, spec.geo_var])
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:32]


@dataclass
class CoverageReport:
    requested: Interval | tuple
    downloaded: list = field(default_factory=list)
    served_from_cache: list = field(default_factory=list)
    end_of_data: bool = False
    rows_downloaded: int = 0
    probes: int = 0
    available: Interval | None = None  # readable window after the call, None if empty

    def as_dict(self) -> dict:
        return {
            "requested": list(self.requested),
            "downloaded": [list(iv) for iv in self.downloaded],
            "served_from_cache": [list(iv) for iv in self.served_from_cache],
            "end_of_data": self.end_of_data,
            "rows_downloaded": self.rows_downloaded,
            "probes": self.probes,
            "available": list(self.available) if self.available else None,
        }


class ResourceTable:
    """Rows of one resource, keyed by triple index, backed by a table directory."""

    def __init__(self, path: Path, key: str, spec: ResourceSpec):
        self.path = path
        self.key = key
        self.spec = spec
        self._meta_path = path / "meta.json"
        self._log_path = path / "rows.log"
        self._flock = FileLock(str(path / "lock"))
        self._tlock = threading.RLock()
        self.coverage = IntervalSet()
        self.exhausted_at: int | None = None
        self._rows: dict[int, tuple[str, str]] = {}
        self._log_size = 0
        try:
            path.mkdir(parents=True, exist_ok=True)
            with self.lock():
                if not self._meta_path.exists():
                    self._write_meta()
                self._log_path.touch()
        except OSError as exc:
            raise StorageError(f"cannot initialise cache table at {path}: {exc}") from exc

    # locking / loading ---------------------------------------------------------

    @contextmanager
    def lock(self):
        """Exclusive access across threads and processes; reloads committed state."""
        with self._tlock, self._flock:
            self._refresh()
            yield self

    def _refresh(self) -> None:
        if not self._meta_path.exists():
            return
        try:
            meta = json.loads(self._meta_path.read_text("utf-8"))
            size = int(meta["log_size"])
            coverage = IntervalSet(meta["coverage"])
            exhausted = meta["exhausted_at"]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise StorageError(f"corrupt cache metadata in {self._meta_path}: {exc}") from exc
        if size < self._log_size:
            self._rows.clear()
            self._log_size = 0
        if size > self._log_size:
            self._load_log(self._log_size, size)
        self._log_size = size
        self.coverage = coverage
        self.exhausted_at = exhausted
        # drop any bytes of an append that never got committed
        try:
            if self._log_path.exists() and self._log_path.stat().st_size > size:
                with open(self._log_path, "r+b") as fh:
                    fh.truncate(size)
        except OSError as exc:
            raise StorageError(f"cannot repair {self._log_path}: {exc}") from exc

    def _load_log(self, start: int, end: int) -> None:
        try:
            with open(self._log_path, "rb") as fh:
                fh.seek(start)
                data = fh.read(end - start)
        except OSError as exc:
            raise StorageError(f"cannot read {self._log_path}: {exc}") from exc
        if len(data) != end - start:
            raise StorageError(f"{self._log_path} is shorter than its committed size")
        pos = 0
        while pos < len(data):
            length, index, id_len = _HEADER.unpack_from(data, pos)
            body = data[pos + _HEADER.size:pos + 4 + length]
            ident = body[:id_len].decode("utf-8")
            wkt = body[id_len:].decode("utf-8")
            self._rows[index] = (ident, wkt)
            pos += 4 + length

    def _write_meta(self) -> None:
        meta = {
            "version": 1,
            "key": self.key,
            "spec": {"endpoint": self.spec.endpoint, "query": self.spec.query,
                     "id_var": self.spec.id_var, "geo_var": self.spec.geo_var},
            "coverage": [list(iv) for iv in self.coverage],
            "exhausted_at": self.exhausted_at,
            "log_size": self._log_size,
        }
        tmp = self._meta_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(meta, fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self._meta_path)

    # mutation --------------------------------------------------------------------

    def append_rows(self, rows: Iterable[TripleRow]) -> int:
        """Persist one chunk atomically; rows already stored are skipped."""
        with self.lock():
            fresh = []
            seen = set()
            for r in rows:
                if r.index in seen or self.coverage.contains(r.index, r.index):
                    continue
                seen.add(r.index)
                fresh.append(r)
            if not fresh:
                return 0
            blob = bytearray()
            for r in fresh:
                ident = r.id.encode("utf-8")
                wkt = r.geo_wkt.encode("utf-8")
                blob += _HEADER.pack(_HEADER.size - 4 + len(ident) + len(wkt), r.index, len(ident))
                blob += ident
                blob += wkt
            try:
                with open(self._log_path, "r+b") as fh:
                    fh.seek(self._log_size)
                    fh.truncate()
                    fh.write(blob)
                    fh.flush()
                    os.fsync(fh.fileno())
                for r in fresh:
                    self._rows[r.index] = (r.id, r.geo_wkt)
                old = (self.coverage.copy(), self._log_size)
                coverage = self.coverage.copy()
                for r in fresh:
                    coverage.add(r.index, r.index)
                self.coverage, self._log_size = coverage, self._log_size + len(blob)
                try:
                    self._write_meta()
                except OSError:
                    self.coverage, self._log_size = old
                    raise
            except OSError as exc:
                raise StorageError(f"cannot persist rows to {self.path}: {exc}") from exc
            return len(fresh)

    def mark_exhausted(self, index: int) -> None:
        with self.lock():
            if self.exhausted_at is None or index < self.exhausted_at:
                self.exhausted_at = index
                try:
                    self._write_meta()
                except OSError as exc:
                    raise StorageError(f"cannot update {self._meta_path}: {exc}") from exc

    # reading ---------------------------------------------------------------------

    def read_rows(self, offset: int, count: int) -> list[TripleRow]:
        """Rows ``offset .. offset+count-1`` in index order; CacheMiss unless all are cached."""
        if count < 1:
            return []
        coverage, rows = self.coverage, self._rows
        if not coverage.contains(offset, offset + count - 1):
            raise CacheMiss(f"rows [{offset}, {offset + count - 1}] are not cached")
        return [TripleRow(i, *rows[i]) for i in range(offset, offset + count)]

    def window(self, offset: int, limit: int | str) -> Interval | None:
        """The cached, in-data part of a request window, or None if nothing is there."""
        hi = None if limit == "all" else offset + limit - 1
        if self.exhausted_at is not None:
            hi = self.exhausted_at - 1 if hi is None else min(hi, self.exhausted_at - 1)
        parts = self.coverage.intersection(offset, hi)
        if not parts or parts[0].lo != offset:
            return None
        return parts[0]


def missing_intervals(table: ResourceTable, offset: int, count: int) -> list[Interval]:
    if count < 1:
        raise ValueError("count must be >= 1")
    return table.coverage.difference(offset, offset + count - 1)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "geol"


class CacheStore:
    """All resource tables under one cache directory."""

    def __init__(self, root: str | os.PathLike | None = None, client: SparqlClient | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()
        self._client = client
        self._owns_client = False
        self._tables: dict[str, ResourceTable] = {}
        self._lock = threading.Lock()

    @property
    def client(self) -> SparqlClient:
        if self._client is None:
            self._client = SparqlClient()
            self._owns_client = True
        return self._client

    def close(self) -> None:
        """Close the HTTP client if this store created it."""
        if self._owns_client and self._client is not None:
            self._client.close()
            self._client = None
            self._owns_client = False

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def get_or_create_table(self, spec: ResourceSpec) -> ResourceTable:
        key = table_key(spec)
        with self._lock:
            table = self._tables.get(key)
            if table is None:
                table = ResourceTable(self.root / "tables" / key, key, spec)
                self._tables[key] = table
            return table

    def read_rows(self, spec: ResourceSpec, offset: int, count: int) -> list[TripleRow]:
        return self.get_or_create_table(spec).read_rows(offset, count)

    def ensure_cached(self, spec: ResourceSpec, client: SparqlClient | None = None) -> CoverageReport:
        """Make ``[offset, offset + limit - 1]`` (clipped to the data) readable.

        Covered indices are served from the table. Gaps below the highest
        stored index are known to exist and are fetched directly; a gap above
        it is first probed with a one-row request, whose row is kept. An
        empty probe or a short page records where the data ends.
        """
        client = client or self.client
        table = self.get_or_create_table(spec)
        lo = spec.offset
        hi = spec.offset + spec.limit - 1 if spec.finite else None
        report = CoverageReport(requested=Interval(lo, hi) if hi is not None else (lo, None))
        with table.lock():
            try:
                self._fill(table, spec, client, lo, hi, report)
            except EndpointError as exc:
                report.available = table.window(spec.offset, spec.limit)
                exc.report = report
                raise
            report.available = table.window(spec.offset, spec.limit)
        return report

    def _fill(self, table, spec, client, lo, hi, report) -> None:
        ex = table.exhausted_at
        if ex is not None:
            if lo >= ex:
                report.end_of_data = True
                return
            if hi is None or hi >= ex:
                hi = ex - 1
                report.end_of_data = True
        report.served_from_cache = table.coverage.intersection(lo, hi)
        top = table.coverage.max
        for gap_lo, gap_hi in table.coverage.difference(lo, hi):
            count = None if gap_hi is None else gap_hi - gap_lo + 1
            start = gap_lo
            if top is not None and gap_lo > top:
                # beyond everything stored: is there anything at all here?
                report.probes += 1
                rows = client.fetch_page(spec, gap_lo, 1)
                if not rows:
                    table.mark_exhausted(gap_lo)
                    report.end_of_data = True
                    return
                table.append_rows(rows)
                report.rows_downloaded += 1
                start += 1
                if count is not None:
                    count -= 1
                    if count == 0:
                        report.downloaded.append(Interval(gap_lo, gap_hi))
                        continue
            try:
                stored = client.retrieve_triples(spec, start, count, table)
            except EndpointError as exc:
                report.rows_downloaded += exc.stored
                if exc.missing_from is not None and exc.missing_from > gap_lo:
                    report.downloaded.append(Interval(gap_lo, exc.missing_from - 1))
                raise
            report.rows_downloaded += stored
            end = gap_hi if gap_hi is not None else start + stored - 1
            if end >= gap_lo:
                report.downloaded.append(Interval(gap_lo, end))
            if count is None or stored < count:
                table.mark_exhausted(start + stored)
                report.end_of_data = True
                return
