"""Topological link discovery between geospatial resources."""

__version__ = "0.1.0"

from geol.cache import CacheStore, CoverageReport, Interval, IntervalSet  # noqa: E402
from geol.config import TaskConfig, load_config, parse_config  # noqa: E402
from geol.engine import (  # noqa: E402
    Exclusion, LinkMapping, LinkSet, LinkTask, Phase, ProgressEvent, candidate_pairs, run,
    write_links,
)
from geol.errors import (  # noqa: E402
    CacheMiss, ConfigError, EmptyGeometry, EndpointError, GeolError, InvalidGeometry,
    JobCancelled, ParseError, QueryError, StorageError, UndefinedRelation, UnsupportedType,
)
from geol.geometry import BoundingBox, Geometry, GeometryType, mbb, parse_wkt, to_wkt  # noqa: E402
from geol.rtree import IndexEntry, RTree  # noqa: E402
from geol.sparql import ResourceSpec, SparqlClient, TripleRow  # noqa: E402
from geol.topology import IntersectionMatrix, TopoRelation, evaluate, relate  # noqa: E402
from geol.validity import ValidityReport, validate  # noqa: E402
