"""Exception types shared across the geolink package."""


class GeolinkError(Exception):
    """Base class for all package errors."""


class GeometryError(GeolinkError, ValueError):
    """Structurally invalid geometry (raised while parsing/constructing)."""


class DegenerateGeometry(GeolinkError):
    """The relate kernel could not resolve a geometry (e.g. a ring that
    properly self-intersects).  Callers skip the pair and count it."""


class EmptyDataset(GeolinkError):
    """An operation that needs at least one geometry got none."""


class IoFailure(GeolinkError):
    """Unreadable input or unwritable output path."""


class FormatError(GeolinkError):
    """Structurally invalid input container (e.g. malformed GeoJSON root)."""


class CapExceeded(GeolinkError):
    """Brute-force oracle refused to run above its pair-count cap."""


class MemoryBudgetExceeded(GeolinkError):
    """A memory-intensive algorithm would exceed the configured byte budget."""


class ConfigError(GeolinkError):
    """Invalid algorithm/parameter combination."""


class WorkerFailure(GeolinkError):
    """A parallel worker failed; carries the partition id."""

    def __init__(self, partition_id, cause):
        super().__init__(f"worker failed on partition {partition_id}: {cause!r}")
        self.partition_id = partition_id
        self.cause = cause
