"""Layout optimization along strong-dependency chains.

Two mechanisms run here:

* recursive pose propagation — each strong edge stores the child's pose in
  the parent's frame; when a parent moves, those stored offsets are replayed
  onto the whole subtree, parent before child;
* stability correction — for every 'On' edge the child's center must project
  into the parent's top-surface placement rectangle. Offending children are
  moved by the minimal horizontal translation (componentwise clamp in the
  parent frame) and seated so their bottom face rests on the parent's top.

``optimize_layout`` sweeps all trees until a full pass applies no
correction, or a pass cap is reached (non-convergence is reported, never
raised).
"""

from dataclasses import dataclass, field
import math

from .errors import RelationMismatchError
from .geometry import clamp_to_rect, local_to_world, top_surface, world_to_local
from .graph import RelationEdge, RelationType, SceneGraph

DEFAULT_MAX_PASSES = 8

#: Pose changes at or below this are float/rounding dust (9-digit scene
#: files carry up to ~5e-9 of it): not applied, not counted. Well under the
#: 1e-6 stability tolerance, so converged graphs stay bit-stable.
CORRECTION_EPS = 1e-7


@dataclass(frozen=True)
class Correction:
    nid: int
    delta: tuple[float, float, float]
    reason: str  # "stability" | "propagation"


@dataclass
class LayoutReport:
    """What a layout run did: every applied correction, pass count, outcome."""

    corrections: list[Correction] = field(default_factory=list)
    passes: int = 0
    converged: bool = False

    def stability_count(self) -> int:
        return sum(1 for c in self.corrections if c.reason == "stability")


def record_relative_transforms(graph: SceneGraph) -> SceneGraph:
    """Recompute every strong edge's relative transform from world poses."""
    for e in graph.strong_edges():
        graph.rel_transforms[(e.src, e.dst)] = graph._relative_transform(e.src, e.dst)
    return graph


def propagate_pose(graph: SceneGraph, nid: int) -> SceneGraph:
    """Recompute world poses of ``nid``'s strong subtree from stored transforms.

    Children are visited parent-before-child; weak edges never move anything.
    """
    graph.node(nid)
    for child_nid in graph.strong_descendants(nid):
        parent_edge = graph.strong_parent_edge(child_nid)
        assert parent_edge is not None
        _apply_transform(graph, parent_edge.src, child_nid)
    return graph


def _apply_transform(graph: SceneGraph, src: int, dst: int) -> None:
    parent, child = graph.node(src), graph.node(dst)
    tr = graph.rel_transforms[(src, dst)]
    c, s = math.cos(parent.yaw), math.sin(parent.yaw)
    tx, ty, tz = tr.translation
    child.pos = (
        parent.pos[0] + c * tx - s * ty,
        parent.pos[1] + s * tx + c * ty,
        parent.pos[2] + tz,
    )
    child.rot = (child.rot[0], child.rot[1], parent.yaw + tr.yaw_delta)
    child.scale = parent.scale * tr.scale_ratio


def stability_correct_edge(
    graph: SceneGraph, edge: RelationEdge, inset_ratio: float = 0.0
) -> tuple[float, float]:
    """Clamp an 'On' child into its parent's placement rectangle and seat it.

    The child center is expressed in the parent's local frame, its horizontal
    components clamped to the top-surface rectangle, and its height set so the
    child's bottom face rests on the parent's top. If the child moved, its own
    subtree is propagated and the edge's transform re-recorded.

    Returns the applied horizontal delta (parent-frame components).
    """
    if edge.relation is not RelationType.ON:
        raise RelationMismatchError(f"stability correction needs an On edge, got {edge.relation.value}")
    parent, child = graph.node(edge.src), graph.node(edge.dst)
    area = top_surface(parent, inset_ratio)

    local = world_to_local(child.pos[:2], parent.pos[:2], parent.yaw)
    clamped, delta = clamp_to_rect(local, area.rect.half_extents)
    target_z_local = area.height + child.half_extents[2] * child.scale

    world_xy = local_to_world(clamped, parent.pos[:2], parent.yaw)
    new_pos = (float(world_xy[0]), float(world_xy[1]), parent.pos[2] + target_z_local)
    horizontal = math.hypot(new_pos[0] - child.pos[0], new_pos[1] - child.pos[1])
    vertical = abs(new_pos[2] - child.pos[2])
    if horizontal > CORRECTION_EPS or vertical > CORRECTION_EPS:
        child.pos = new_pos
        graph.rel_transforms[(edge.src, edge.dst)] = graph._relative_transform(edge.src, edge.dst)
        propagate_pose(graph, edge.dst)
    return float(delta[0]), float(delta[1])


def optimize_layout(
    graph: SceneGraph,
    max_passes: int = DEFAULT_MAX_PASSES,
    inset_ratio: float = 0.0,
) -> tuple[SceneGraph, LayoutReport]:
    """Iterate stability correction over every tree until a clean pass.

    Strong roots are processed in nid order; within a tree, edges are visited
    parent-before-child so a parent's correction cannot undo a child's.
    Relative transforms are re-recorded from the current world poses first:
    poses are the ground truth, so externally edited scenes (say, a pose
    tweaked by hand in a scene file) are corrected rather than snapped back
    to stale offsets.
    """
    if max_passes < 1:
        raise ValueError("max_passes must be >= 1")
    record_relative_transforms(graph)
    report = LayoutReport()
    for _ in range(max_passes):
        report.passes += 1
        pass_corrections = 0
        for root in graph.strong_roots():
            for edge in _tree_edges(graph, root):
                if edge.relation is not RelationType.ON:
                    continue
                before = {n: graph.node(n).pos for n in (edge.dst, *graph.strong_descendants(edge.dst))}
                dx, dy = stability_correct_edge(graph, edge, inset_ratio)
                child = graph.node(edge.dst)
                dz = child.pos[2] - before[edge.dst][2]
                if math.hypot(dx, dy) > CORRECTION_EPS or abs(dz) > CORRECTION_EPS:
                    pass_corrections += 1
                    report.corrections.append(
                        Correction(edge.dst, (dx, dy, dz), "stability")
                    )
                    for desc in graph.strong_descendants(edge.dst):
                        p0, p1 = before[desc], graph.node(desc).pos
                        report.corrections.append(
                            Correction(
                                desc,
                                (p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]),
                                "propagation",
                            )
                        )
        if pass_corrections == 0:
            report.converged = True
            break
    if report.corrections:
        graph.revision += 1
    return graph, report


def _tree_edges(graph: SceneGraph, root: int):
    """Strong edges of one tree, parent-before-child, children in nid order."""
    stack = list(reversed(graph.strong_child_edges(root)))
    while stack:
        edge = stack.pop()
        yield edge
        stack.extend(reversed(graph.strong_child_edges(edge.dst)))


def stability_violations(graph: SceneGraph, inset_ratio: float = 0.0, tol: float = 1e-6) -> list[RelationEdge]:
    """'On' edges whose child center projects outside the parent's rectangle."""
    bad = []
    for e in graph.edges:
        if e.relation is not RelationType.ON:
            continue
        parent, child = graph.node(e.src), graph.node(e.dst)
        area = top_surface(parent, inset_ratio)
        local = world_to_local(child.pos[:2], parent.pos[:2], parent.yaw)
        hx, hy = area.rect.half_extents
        if abs(local[0]) > hx + tol or abs(local[1]) > hy + tol:
            bad.append(e)
    return bad
