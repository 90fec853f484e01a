"""Exception hierarchy shared across the engine."""


class HigsError(Exception):
    """Base class for all engine errors."""


class DuplicateNidError(HigsError):
    """A node with this nid is already present in the graph."""


class UnknownNidError(HigsError):
    """The referenced nid does not exist in the graph."""


class InvalidGeometryError(HigsError):
    """Non-positive scale or half extents."""


class StrongParentConflictError(HigsError):
    """The destination node already has a strong parent."""


class StrongCycleError(HigsError):
    """Adding this strong edge would create a dependency cycle."""


class RelationMismatchError(HigsError):
    """Operation applied to an edge of the wrong relation type."""


class EmptySceneError(HigsError):
    """Operation requires at least one node."""


class DegenerateAnchorError(HigsError):
    """The anchor's placement surface has (near-)zero area."""


class MissingFloorError(HigsError):
    """Initial scene construction requires a floor node as strong root."""


class UnknownAnchorError(HigsError):
    """The requested anchor nid is not present in the global graph."""


class TooFewVectorsError(HigsError):
    """Direction clustering needs at least two vectors."""


class AllEmptyError(HigsError):
    """Every prompt fragment was empty."""


class AdapterFailureError(HigsError):
    """A backend adapter stage failed.

    ``stage`` names the pipeline stage, ``kind`` is one of
    ``timeout`` / ``bad_schema`` / ``remote``.
    """

    def __init__(self, stage: str, kind: str, message: str = ""):
        self.stage = stage
        self.kind = kind
        super().__init__(f"{stage}: {kind}" + (f": {message}" if message else ""))


class ReplayDivergenceError(HigsError):
    """Replaying a step log did not reproduce the stored scene."""


class SchemaVersionMismatchError(HigsError):
    """The file declares an unsupported schema version."""


class CorruptFileError(HigsError):
    """The file cannot be parsed into a valid document."""
