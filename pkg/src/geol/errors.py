"""Exception hierarchy shared by all geol modules."""

from __future__ import annotations


class GeolError(Exception):
    """Base class for every error raised by geol."""


class ParseError(GeolError, ValueError):
    """Malformed WKT input.

    ``offset`` is the byte offset into the (UTF-8 encoded) input at which the
    problem was detected. ``code`` optionally names a structural violation
    such as ``UnclosedRing`` or ``TooFewPoints``.
    """

    def __init__(self, message: str, offset: int = 0, code: str | None = None):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset
        self.code = code


class UnsupportedType(ParseError):
    """WKT geometry type outside the supported subset."""


class EmptyGeometry(GeolError, ValueError):
    pass


class InvalidGeometry(GeolError, ValueError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class UndefinedRelation(GeolError, ValueError):
    """The predicate has no meaning for the given pair of dimensions."""


class EndpointError(GeolError):
    """HTTP or protocol failure talking to a SPARQL endpoint.

    ``missing_from`` is the first triple index that was not persisted, so a
    caller can resume from there. ``stored`` counts rows persisted by the
    failing call before it gave up.
    """

    def __init__(self, message: str, *, missing_from: int | None = None, stored: int = 0):
        super().__init__(message)
        self.missing_from = missing_from
        self.stored = stored
        self.phase = None
        self.report = None


class QueryError(EndpointError):
    """The endpoint rejected the query itself (syntax, unknown prefix, ...)."""


class StorageError(GeolError):
    pass


class CacheMiss(GeolError, LookupError):
    """Rows were requested that the cache does not hold."""


class ConfigError(GeolError, ValueError):
    """Task configuration problems; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class JobCancelled(GeolError):
    pass
