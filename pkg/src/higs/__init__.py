"""Progressive hierarchical spatial-semantic scene construction engine.

Build 3D scenes step by step: each generation step produces a local
sub-scene around an anchor object, optimizes its layout (orientation
snapping, support stability, recursive pose propagation), and merges it
into the session's global scene graph. Exposed as a library, an HTTP
service (:mod:`higs.service`), and a CLI (``higs``).
"""

from .alignment import DirectionBasis, align_scene, gram_schmidt, kmeans_abs_cosine, project_forward, snap_direction
from .backends import (
    BackendAdapters,
    EndpointSpec,
    ObjectSpec,
    PerceivedObject,
    ProceduralBackend,
    external_adapter_config,
    procedural_backend,
)
from .composition import (
    LocalScene,
    MergeResult,
    RegionTransform,
    align_to_anchor,
    build_initial_global,
    initial_region_yaw,
    merge,
    region_obb,
)
from .errors import (
    AdapterFailureError,
    AllEmptyError,
    CorruptFileError,
    DegenerateAnchorError,
    DuplicateNidError,
    EmptySceneError,
    HigsError,
    InvalidGeometryError,
    MissingFloorError,
    RelationMismatchError,
    ReplayDivergenceError,
    SchemaVersionMismatchError,
    StrongCycleError,
    StrongParentConflictError,
    TooFewVectorsError,
    UnknownAnchorError,
    UnknownNidError,
)
from .geometry import (
    OrientedBoundingBox,
    PlacementArea,
    Rect2,
    clamp_to_rect,
    obb_of_nodes,
    point_in_rect,
    top_surface,
    world_to_local,
    yaw_rotate,
)
from .graph import ObjectNode, RelationEdge, RelationType, RelativeTransform, SceneGraph, Violation
from .layout import (
    LayoutReport,
    optimize_layout,
    propagate_pose,
    record_relative_transforms,
    stability_correct_edge,
    stability_violations,
)
from .pipeline import (
    FLOOR_ANCHOR,
    PromptBundle,
    SceneSession,
    StepRecord,
    compose_prompt,
    graphs_identical,
    replay,
    run_step,
)
from .serialization import load_scene, load_session, save_scene, save_session

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
