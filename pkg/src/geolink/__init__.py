"""geolink: geospatial interlinking over LineString/Polygon datasets.

Computes all positive DE-9IM topological relations between a source and
a target dataset through grid-, partition- and tree-based filtering,
with batch, budget-aware (progressive) and multi-worker execution.
"""

from .errors import (
    CapExceeded,
    ConfigError,
    DegenerateGeometry,
    EmptyDataset,
    FormatError,
    GeolinkError,
    GeometryError,
    IoFailure,
    MemoryBudgetExceeded,
    WorkerFailure,
)
from .geometry import Geometry, Mbr, mbr_intersects, mbr_of
from .relations import (
    IntersectionMatrix,
    Relation,
    extract_relations,
    relate,
    transpose_relations,
    verify_pair,
)

__version__ = "0.1.0"
