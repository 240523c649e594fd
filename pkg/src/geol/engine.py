"""Link discovery: cache both resources, filter by MBB, refine with DE-9IM.

``run`` drives one :class:`LinkTask` through six phases, reporting a
:class:`ProgressEvent` stream along the way. The target set is indexed in an
R-tree; each source geometry's MBB is used as a range query and every
candidate pair is refined with the exact intersection matrix. Geometries that
fail to parse or validate are excluded before indexing and reported.

Disjoint cannot be served by the MBB filter, so it is computed as the
complement of the Intersects candidates that actually intersect.
"""

from __future__ import annotations

import logging
import multiprocessing
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Iterator, NamedTuple

from geol.cache import CacheStore
from geol.errors import EndpointError, JobCancelled, ParseError, StorageError, UndefinedRelation
from geol.geometry import BoundingBox, GeometryWarning, dimension, mbb, parse_wkt
from geol.rtree import IndexEntry, RTree
from geol.sparql import ResourceSpec
from geol.topology import TopoRelation, matches, patterns_for, prepare, relate_prepared
from geol.validity import validate

log = logging.getLogger(__name__)

PARALLEL_MIN_SOURCES = 4096


class Phase(str, Enum):
    CACHING_SOURCE = "CachingSource"
    CACHING_TARGET = "CachingTarget"
    PARSING = "Parsing"
    INDEXING = "Indexing"
    LINKING = "Linking"
    WRITING = "Writing"


PHASES = list(Phase)


class ProgressEvent(NamedTuple):
    phase: Phase
    done: int
    total: int

    def __str__(self) -> str:
        return f"{self.phase.value} {self.done}/{self.total}"

    def as_dict(self) -> dict:
        return {"phase": self.phase.value, "done": self.done, "total": self.total}


@dataclass(frozen=True)
class LinkTask:
    source: ResourceSpec
    target: ResourceSpec
    relation: TopoRelation
    output: str | None = "inline"

    def __post_init__(self):
        object.__setattr__(self, "relation", TopoRelation.parse(self.relation))


class Exclusion(NamedTuple):
    id: str
    side: str  # "source" or "target"
    index: int
    reason: object  # ValidityReport, ParseError or a short message

    @property
    def reason_text(self) -> str:
        return str(self.reason)


class LinkSet:
    """Set of (source id, target id) pairs, iterated in sorted order.

    Disjoint results are stored in complement form: every source id pairs
    with every target id except those in ``blocked[source]``. This keeps a
    self-join over 10^4 geometries (about 10^8 links) in memory.
    """

    def __init__(self, pairs=None, *, sources=None, targets=None, blocked=None):
        self._pairs = set(pairs) if pairs is not None else None
        self._source_set = set(sources or ())
        self._target_set = set(targets or ())
        self._sources = sorted(self._source_set)
        self._targets = sorted(self._target_set)
        self._blocked = blocked or {}

    @classmethod
    def complement(cls, sources: Iterable[str], targets: Iterable[str], blocked: dict) -> LinkSet:
        return cls(sources=sources, targets=targets, blocked=blocked)

    @property
    def is_complement(self) -> bool:
        return self._pairs is None

    def __len__(self) -> int:
        if self._pairs is not None:
            return len(self._pairs)
        nt = len(self._targets)
        return sum(nt - len(self._blocked.get(s, ())) for s in self._sources)

    def __contains__(self, pair) -> bool:
        if self._pairs is not None:
            return tuple(pair) in self._pairs
        s, t = pair
        return (s in self._source_set and t in self._target_set
                and t not in self._blocked.get(s, ()))

    def __iter__(self) -> Iterator[tuple[str, str]]:
        if self._pairs is not None:
            yield from sorted(self._pairs)
            return
        for s in self._sources:
            blocked = self._blocked.get(s, ())
            for t in self._targets:
                if t not in blocked:
                    yield (s, t)

    def __eq__(self, other) -> bool:
        if isinstance(other, LinkSet):
            return len(self) == len(other) and all(p in other for p in self)
        if isinstance(other, (set, frozenset)):
            return len(self) == len(other) and all(p in other for p in self)
        return NotImplemented

    def to_set(self) -> set:
        return set(self)


@dataclass
class LinkMapping:
    relation: TopoRelation
    links: LinkSet
    excluded: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def excluded_on(self, side: str) -> list[Exclusion]:
        return [e for e in self.excluded if e.side == side]

    def iter_ntriples(self) -> Iterator[str]:
        rel = f"<{self.relation.iri}>"
        for s, t in self.links:
            yield f"<{_escape_iri(s)}> {rel} <{_escape_iri(t)}> .\n"

    def to_ntriples(self) -> bytes:
        return "".join(self.iter_ntriples()).encode("utf-8")

    def summary(self) -> dict:
        return {
            "relation": self.relation.value,
            "links": len(self.links),
            "excluded": [{"id": e.id, "side": e.side, "index": e.index, "reason": e.reason_text}
                         for e in self.excluded],
            "stats": self.stats,
        }


_IRI_BAD = set('<>"{}|^`\\') | {chr(c) for c in range(0x21)}


def _escape_iri(iri: str) -> str:
    if not any(ch in _IRI_BAD for ch in iri):
        return iri
    return "".join(f"\\u{ord(ch):04X}" if ch in _IRI_BAD else ch for ch in iri)


def write_links(mapping: LinkMapping, destination) -> int:
    """Write N-Triples sorted by (source, target); returns bytes written.

    ``destination`` is a path or a binary file object.
    """
    if hasattr(destination, "write"):
        return _write_lines(mapping, destination)
    path = Path(destination)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "wb") as fh:
        n = _write_lines(mapping, fh)
    os.replace(tmp, path)
    return n


def _write_lines(mapping, fh, on_line: Callable[[int], None] | None = None) -> int:
    n = 0
    buf = []
    for k, line in enumerate(mapping.iter_ntriples(), 1):
        buf.append(line)
        if len(buf) >= 4096:
            data = "".join(buf).encode("utf-8")
            fh.write(data)
            n += len(data)
            buf.clear()
            if on_line:
                on_line(k)
    if buf:
        data = "".join(buf).encode("utf-8")
        fh.write(data)
        n += len(data)
    return n


# ----------------------------------------------------------------------------
# parsing and candidate generation
# ----------------------------------------------------------------------------

class _Item:
    __slots__ = ("id", "index", "geom", "prep", "box", "dim")

    def __init__(self, ident, index, geom):
        self.id = ident
        self.index = index
        self.geom = geom
        self.prep = prepare(geom)
        self.box = mbb(geom).as_tuple()
        self.dim = dimension(geom)


def _parse_row(row):
    """(_Item, None) for a usable row, (None, reason) otherwise."""
    if not row.geo_wkt:
        return None, "missing geometry"
    try:
        g = parse_wkt(row.geo_wkt)
    except ParseError as exc:
        return None, exc
    if g.is_empty:
        return None, "empty geometry"
    report = validate(g)
    if not report.valid:
        return None, report
    return _Item(row.id, row.index, g), None


def candidate_pairs(source_geoms, target_index: RTree) -> Iterator[tuple[str, str]]:
    """Every (source id, target id) whose MBBs intersect.

    ``source_geoms`` yields ``(id, geometry)`` pairs or :class:`IndexEntry`.
    """
    for item in source_geoms:
        if isinstance(item, IndexEntry):
            sid, box = item.id, item.box
        else:
            sid, g = item
            box = mbb(g)
        for e in target_index.query_entries(box):
            yield sid, e.id


def _contained(inner, outer) -> bool:
    return outer[0] <= inner[0] and inner[2] <= outer[2] and outer[1] <= inner[1] and inner[3] <= outer[3]


# Necessary MBB conditions per relation, checked before the exact refine step.
_BOX_FILTER = {
    TopoRelation.WITHIN: lambda s, t: _contained(s, t),
    TopoRelation.COVERED_BY: lambda s, t: _contained(s, t),
    TopoRelation.CONTAINS: lambda s, t: _contained(t, s),
    TopoRelation.COVERS: lambda s, t: _contained(t, s),
    TopoRelation.EQUALS: lambda s, t: s == t,
}


class _Refiner:
    """Exact relation test with per-dimension pattern lookup."""

    def __init__(self, rel: TopoRelation):
        self.rel = TopoRelation.INTERSECTS if rel is TopoRelation.DISJOINT else rel
        self.negate = self.rel is TopoRelation.INTERSECTS
        self.box_ok = _BOX_FILTER.get(self.rel)
        self._patterns = {}

    def patterns(self, da, db):
        key = (da, db)
        if key not in self._patterns:
            try:
                self._patterns[key] = patterns_for(self.rel, da, db)
            except UndefinedRelation:
                self._patterns[key] = None
        return self._patterns[key]

    def __call__(self, s: _Item, t: _Item) -> bool:
        pats = self.patterns(s.dim, t.dim)
        if pats is None:
            return False
        if self.box_ok is not None and not self.box_ok(s.box, t.box):
            return False
        m = relate_prepared(s.prep, t.prep)
        hit = any(matches(m, p) for p in pats)
        return not hit if self.negate else hit


def _link_shard(sources, index, refiner, on_progress=None, cancel=None, base=0):
    """Refine one run of sources; returns ((source position, target id) pairs, tested)."""
    pairs = []
    tested = 0
    box_ok = refiner.box_ok
    for k, s in enumerate(sources):
        for e in index.query_entries(s.box):
            t = e.geometry_ref
            if box_ok is not None and not box_ok(s.box, t.box):
                continue
            tested += 1
            if refiner(s, t):
                pairs.append((base + k, t.id))
        if on_progress is not None and (k & 255) == 255:
            if cancel is not None and cancel.is_set():
                raise JobCancelled("task cancelled")
            on_progress(k + 1)
    return pairs, tested


_FORK_STATE = None


def _fork_shard(bounds):
    sources, index, refiner = _FORK_STATE
    lo, hi = bounds
    return _link_shard(sources[lo:hi], index, refiner, base=lo)


# ----------------------------------------------------------------------------
# orchestration
# ----------------------------------------------------------------------------

class _Progress:
    """Forwards events to the consumer, enforcing phase order and monotone counters."""

    def __init__(self, consumer, cancel):
        self.consumer = consumer
        self.cancel = cancel
        self.phase_no = -1
        self.done = 0

    def __call__(self, phase: Phase, done: int, total: int) -> None:
        if self.cancel is not None and self.cancel.is_set():
            raise JobCancelled("task cancelled")
        no = PHASES.index(phase)
        if no < self.phase_no:
            raise AssertionError(f"phase {phase} reported after {PHASES[self.phase_no]}")
        if no > self.phase_no:
            self.phase_no, self.done = no, 0
        done = min(max(done, self.done), total)
        self.done = done
        if self.consumer is not None:
            self.consumer(ProgressEvent(phase, done, total))


def run(task: LinkTask, progress: Callable[[ProgressEvent], None] | None = None, *,
        store: CacheStore | None = None, destination=None, workers: int | None = None,
        cancel=None) -> LinkMapping:
    """Execute ``task`` and return its link mapping.

    Links are written to ``destination`` (path or binary stream) or, if that
    is None, to ``task.output`` unless it is ``"inline"``. ``workers``
    defaults to the CPU count; process shards are only used for large
    inputs. ``cancel`` is an optional ``threading.Event``.
    """
    store = store or CacheStore()
    emit = _Progress(progress, cancel)
    stats = {"elapsed": {}}
    clock = time.perf_counter()

    def lap(phase):
        nonlocal clock
        now = time.perf_counter()
        stats["elapsed"][phase.value] = round(now - clock, 6)
        clock = now

    # caching
    windows = {}
    for side, spec, phase in (("source", task.source, Phase.CACHING_SOURCE),
                              ("target", task.target, Phase.CACHING_TARGET)):
        emit(phase, 0, 1)
        try:
            report = store.ensure_cached(spec)
        except (EndpointError, StorageError) as exc:
            exc.phase = phase.value
            raise
        table = store.get_or_create_table(spec)
        windows[side] = (table, report.available)
        stats[f"{side}_cache"] = report.as_dict()
        emit(phase, 1, 1)
        lap(phase)

    # parsing
    rows = {}
    for side, (table, window) in windows.items():
        rows[side] = table.read_rows(window.lo, window.hi - window.lo + 1) if window else []
    total = len(rows["source"]) + len(rows["target"])
    emit(Phase.PARSING, 0, total)
    parsed_cache = {}
    items = {"source": [], "target": []}
    excluded = []
    done = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GeometryWarning)
        for side in ("source", "target"):
            key = windows[side][0].key
            for row in rows[side]:
                memo = parsed_cache.get((key, row.index))
                if memo is None:
                    memo = _parse_row(row)
                    parsed_cache[(key, row.index)] = memo
                item, reason = memo
                if item is None:
                    excluded.append(Exclusion(row.id, side, row.index, reason))
                else:
                    items[side].append(item)
                done += 1
                if (done & 1023) == 0:
                    emit(Phase.PARSING, done, total)
    del parsed_cache
    emit(Phase.PARSING, total, total)
    for side in ("source", "target"):
        stats[f"{side}_total"] = len(rows[side])
        stats[f"{side}_valid"] = len(items[side])
        ids = [it.id for it in items[side]]
        if len(set(ids)) != len(ids):
            log.warning("%s set contains duplicate ids; links are collapsed per id", side)
    lap(Phase.PARSING)

    # indexing
    targets = items["target"]
    emit(Phase.INDEXING, 0, len(targets))
    index = RTree.build_bulk(IndexEntry(t.id, BoundingBox(*t.box), t) for t in targets)
    emit(Phase.INDEXING, len(targets), len(targets))
    lap(Phase.INDEXING)

    # linking
    sources = items["source"]
    refiner = _Refiner(task.relation)
    emit(Phase.LINKING, 0, len(sources))
    pairs, tested = _link(sources, index, refiner, workers,
                          lambda k: emit(Phase.LINKING, k, len(sources)), cancel)
    emit(Phase.LINKING, len(sources), len(sources))
    if task.relation is TopoRelation.DISJOINT:
        links = _disjoint_links(sources, targets, pairs)
    else:
        links = LinkSet((sources[k].id, tid) for k, tid in pairs)
    stats["candidates_tested"] = tested
    stats["links_found"] = len(links)
    lap(Phase.LINKING)

    mapping = LinkMapping(task.relation, links, excluded, stats)

    # writing
    if destination is None and task.output not in (None, "inline"):
        destination = task.output
    n_links = stats["links_found"]
    emit(Phase.WRITING, 0, n_links)
    if destination is not None:
        on_line = lambda k: emit(Phase.WRITING, k, n_links)  # noqa: E731
        if hasattr(destination, "write"):
            stats["bytes_written"] = _write_lines(mapping, destination, on_line)
        else:
            path = Path(destination)
            tmp = path.with_name(path.name + ".part")
            with open(tmp, "wb") as fh:
                stats["bytes_written"] = _write_lines(mapping, fh, on_line)
            os.replace(tmp, path)
    emit(Phase.WRITING, n_links, n_links)
    lap(Phase.WRITING)
    return mapping


def _link(sources, index, refiner, workers, on_progress, cancel):
    workers = workers or os.cpu_count() or 1
    use_fork = (workers > 1 and len(sources) >= PARALLEL_MIN_SOURCES
                and "fork" in multiprocessing.get_all_start_methods())
    if not use_fork:
        return _link_shard(sources, index, refiner, on_progress, cancel)
    global _FORK_STATE
    _FORK_STATE = (sources, index, refiner)
    try:
        step = -(-len(sources) // (workers * 4))
        bounds = [(lo, min(lo + step, len(sources))) for lo in range(0, len(sources), step)]
        pairs, tested, done = [], 0, 0
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for (lo, hi), (p, t) in zip(bounds, pool.map(_fork_shard, bounds)):
                pairs.extend(p)
                tested += t
                done += hi - lo
                on_progress(done)
        return pairs, tested
    finally:
        _FORK_STATE = None


def _disjoint_links(sources, targets, intersecting) -> LinkSet:
    """Complement of the intersecting pairs, resolved per id.

    With duplicate ids a pair (s, t) is disjoint when some row of s and some
    row of t are disjoint, so a target id is only blocked for a source row if
    every row carrying that target id intersects it.
    """
    t_rows = {}
    for t in targets:
        t_rows[t.id] = t_rows.get(t.id, 0) + 1
    hits = {}
    for s_row, tid in intersecting:
        per_row = hits.setdefault(s_row, {})
        per_row[tid] = per_row.get(tid, 0) + 1
    blocked = {}
    for k, s in enumerate(sources):
        full = {tid for tid, n in hits.get(k, {}).items() if n >= t_rows[tid]}
        if s.id in blocked:
            blocked[s.id] &= full
        else:
            blocked[s.id] = full
    return LinkSet.complement((s.id for s in sources), t_rows.keys(), blocked)

