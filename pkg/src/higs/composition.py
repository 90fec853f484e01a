"""Progressive scene growth: local sub-scenes built around an anchor are
fitted onto the anchor's placement surface and merged into the global graph.

A merge (1) remaps local nids to fresh global ones, (2) applies one common
rigid+scale transform that rotates the local region onto the anchor's
heading, shrinks it if its footprint overflows the anchor surface, and rests
its bottom on the surface, (3) links every local strong root to the anchor
with an 'On' edge, and (4) re-optimizes the global layout. Because the
transform is common to all local nodes, their mutual arrangement survives
the merge.
"""

from dataclasses import dataclass, field
import math

from .alignment import align_scene, scene_basis
from .errors import DegenerateAnchorError, MissingFloorError, UnknownAnchorError
from .geometry import OrientedBoundingBox, PlacementArea, obb_of_nodes, top_surface, yaw_rotate
from .graph import ObjectNode, RelationEdge, RelationType, SceneGraph
from .layout import LayoutReport, optimize_layout, record_relative_transforms

FLOOR_CATEGORY = "floor"

MIN_SURFACE_HALF = 1e-6


@dataclass
class LocalScene:
    """One generation step's sub-scene, in its own local coordinates."""

    graph: SceneGraph
    anchor_category: str
    step_index: int


@dataclass(frozen=True)
class RegionTransform:
    """Uniform-scale rigid placement: p' = scale * R(yaw) * p + translation."""

    translation: tuple[float, float, float]
    yaw: float
    scale: float

    def apply_point(self, p) -> tuple[float, float, float]:
        xy = yaw_rotate((p[0] * self.scale, p[1] * self.scale), self.yaw)
        return (
            float(xy[0]) + self.translation[0],
            float(xy[1]) + self.translation[1],
            float(p[2]) * self.scale + self.translation[2],
        )


@dataclass
class MergeResult:
    nid_map: dict[int, int]
    applied_transform: RegionTransform
    report: LayoutReport = field(default_factory=LayoutReport)


def region_obb(local: LocalScene, basis_yaw: float) -> OrientedBoundingBox:
    """Oriented bounding box of all local nodes at the caller-chosen yaw."""
    return obb_of_nodes(local.graph.nodes.values(), basis_yaw)


def align_to_anchor(
    local: LocalScene, anchor: ObjectNode, anchor_area: PlacementArea
) -> RegionTransform:
    """Transform placing the local region onto the anchor's surface.

    Rotates the region's box heading onto the anchor yaw, shrinks uniformly
    when the box footprint overflows the placement rectangle (never grows),
    and targets the rectangle center with the box bottom at surface height.
    """
    ax, ay = anchor_area.rect.half_extents
    if ax < MIN_SURFACE_HALF or ay < MIN_SURFACE_HALF:
        raise DegenerateAnchorError(f"anchor '{anchor.category}' has a zero-area surface")
    obb = region_obb(local, 0.0)
    yaw = anchor.yaw - obb.yaw

    ratios = [1.0]
    if obb.half_extents[0] > MIN_SURFACE_HALF:
        ratios.append(ax / obb.half_extents[0])
    if obb.half_extents[1] > MIN_SURFACE_HALF:
        ratios.append(ay / obb.half_extents[1])
    scale = min(ratios)

    # Placement-area center sits at the anchor's own center (local origin).
    cx, cy = anchor_area.rect.center
    target_xy = yaw_rotate((cx, cy), anchor.yaw)
    target = (
        anchor.pos[0] + float(target_xy[0]),
        anchor.pos[1] + float(target_xy[1]),
        anchor.pos[2] + anchor_area.height + scale * obb.half_extents[2],
    )
    rotated_center = yaw_rotate((obb.center[0] * scale, obb.center[1] * scale), yaw)
    return RegionTransform(
        translation=(
            target[0] - float(rotated_center[0]),
            target[1] - float(rotated_center[1]),
            target[2] - obb.center[2] * scale,
        ),
        yaw=yaw,
        scale=scale,
    )


def merge(
    global_graph: SceneGraph, local: LocalScene, anchor_nid: int
) -> tuple[SceneGraph, MergeResult]:
    """Fit a local scene onto an anchor node and absorb it into the graph.

    Local nids are remapped to fresh global ones (ascending local order),
    every local strong root gains an On edge from the anchor, transforms are
    recorded for the new edges, and the whole graph is re-optimized.
    """
    if anchor_nid not in global_graph.nodes:
        raise UnknownAnchorError(f"anchor nid {anchor_nid} not in global graph")
    anchor = global_graph.node(anchor_nid)

    if not local.graph.nodes:
        global_graph.revision += 1
        return global_graph, MergeResult(nid_map={}, applied_transform=RegionTransform((0.0, 0.0, 0.0), 0.0, 1.0))

    transform = align_to_anchor(local, anchor, top_surface(anchor))

    next_nid = max(global_graph.nodes, default=0) + 1
    nid_map: dict[int, int] = {}
    for local_nid in sorted(local.graph.nodes):
        nid_map[local_nid] = next_nid
        next_nid += 1

    local_roots = local.graph.strong_roots()
    for local_nid in sorted(local.graph.nodes):
        src = local.graph.nodes[local_nid]
        global_graph.add_node(
            ObjectNode(
                nid=nid_map[local_nid],
                category=src.category,
                pos=transform.apply_point(src.pos),
                rot=(src.rot[0], src.rot[1], src.rot[2] + transform.yaw),
                scale=src.scale * transform.scale,
                half_extents=src.half_extents,
            )
        )
    for e in sorted(local.graph.edges, key=lambda e: (e.src, e.dst, e.relation.value)):
        global_graph.add_edge(RelationEdge(nid_map[e.src], nid_map[e.dst], e.relation, e.label))
    for root in local_roots:
        global_graph.add_edge(RelationEdge(anchor_nid, nid_map[root], RelationType.ON))

    _, report = optimize_layout(global_graph)
    return global_graph, MergeResult(nid_map=nid_map, applied_transform=transform, report=report)


def build_initial_global(local: LocalScene) -> tuple[SceneGraph, LayoutReport]:
    """Turn the first step's scene into the session's global graph.

    Requires a floor node among the strong roots; aligns all headings to the
    recovered orthogonal basis, records transforms, and optimizes stability.
    """
    floor_nids = [
        nid
        for nid in local.graph.strong_roots()
        if local.graph.nodes[nid].category.lower() == FLOOR_CATEGORY
    ]
    if not floor_nids:
        raise MissingFloorError("initial scene has no floor strong root")
    graph = align_scene(local.graph)
    record_relative_transforms(graph)
    graph, report = optimize_layout(graph)
    return graph, report


def initial_region_yaw(local: LocalScene) -> float:
    """Dominant-direction yaw for the first step's region box (0 if unknown)."""
    recovered = scene_basis(local.graph)
    if recovered is None:
        return 0.0
    basis, _ = recovered
    return math.atan2(basis.d1[1], basis.d1[0])
