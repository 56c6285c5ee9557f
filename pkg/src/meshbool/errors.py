"""Exception types shared across the pipeline."""


class MeshBoolError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInput(MeshBoolError):
    """Input mesh violates a precondition (non-finite coords, bad indices, ...)."""


class EmptyInput(MeshBoolError):
    """No usable triangles remain after preprocessing."""


class ParseError(MeshBoolError):
    """A mesh file could not be parsed."""


class UnsupportedFormat(MeshBoolError):
    """File extension / magic does not match any supported mesh format."""


class DegenerateProjection(MeshBoolError):
    """A 2D projection was requested along an axis that collapses the geometry."""


class InvariantViolation(MeshBoolError):
    """An internal exactness invariant failed; the computation is aborted
    rather than silently degraded."""


class OpenBoundary(MeshBoolError):
    """The stitched selection does not form a closed surface."""
