"""Hierarchical spatial-semantic scene graph: nodes, typed relations, and the
strong-dependency forest that drives pose propagation.

Nodes carry pose (position, Euler rotation, uniform scale) and bounding
half-extents; edges carry a relation type. 'On' and 'Inside' are *strong*
dependencies: the source is the supporting parent, the destination the
dependent child, and each strong edge stores the child's pose relative to
its parent so parent moves can be replayed onto the subtree.

A graph instance is mutated by one writer at a time; ``copy()`` produces an
independent snapshot that can be handed to other threads for reading.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
import math

from .errors import (
    DuplicateNidError,
    InvalidGeometryError,
    StrongCycleError,
    StrongParentConflictError,
    UnknownNidError,
)

UPRIGHT_TOL = 1e-9


class RelationType(str, Enum):
    ON = "on"
    INSIDE = "inside"
    ADJACENT = "adjacent"
    FACING = "facing"
    UNDER = "under"
    OTHER = "other"

    @property
    def strong(self) -> bool:
        return self is RelationType.ON or self is RelationType.INSIDE


#: Relation values that create a parent -> child dependency.
STRONG_RELATIONS = (RelationType.ON, RelationType.INSIDE)


def relation_from_string(value: str) -> tuple["RelationType", str]:
    """Map a wire/file relation string to (RelationType, label).

    Known values map to their member; anything else becomes OTHER with the
    original text kept as the label (open relation vocabulary).
    """
    v = value.strip().lower()
    for member in RelationType:
        if member is not RelationType.OTHER and member.value == v:
            return member, ""
    return RelationType.OTHER, value.strip()


@dataclass
class ObjectNode:
    """One scene entity: pose, uniform scale, and local bounding half-sizes.

    ``pos`` is the object's center in the world frame (meters, +Z up);
    ``rot`` is (roll, pitch, yaw) in radians; ``half_extents`` are the local
    axis-aligned half-sizes before ``scale`` is applied.
    """

    nid: int
    category: str
    pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rot: tuple[float, float, float] = (0.0, 0.0, 0.0)
    scale: float = 1.0
    half_extents: tuple[float, float, float] = (0.5, 0.5, 0.5)

    @property
    def yaw(self) -> float:
        return self.rot[2]

    def check_geometry(self) -> None:
        if self.scale <= 0.0:
            raise InvalidGeometryError(f"node {self.nid}: scale must be > 0")
        if any(h <= 0.0 for h in self.half_extents):
            raise InvalidGeometryError(f"node {self.nid}: half extents must be > 0")

    def is_upright(self) -> bool:
        return abs(self.rot[0]) <= UPRIGHT_TOL and abs(self.rot[1]) <= UPRIGHT_TOL


@dataclass(frozen=True)
class RelationEdge:
    """Directed spatial-semantic link; src is the depended-upon (parent) node."""

    src: int
    dst: int
    relation: RelationType
    label: str = ""  # free text for RelationType.OTHER

    @property
    def strong(self) -> bool:
        return self.relation is RelationType.ON or self.relation is RelationType.INSIDE

    def relation_text(self) -> str:
        return self.label if (self.relation is RelationType.OTHER and self.label) else self.relation.value


@dataclass(frozen=True)
class RelativeTransform:
    """Child pose expressed in the parent's yaw-only local frame."""

    src: int
    dst: int
    translation: tuple[float, float, float]
    yaw_delta: float
    scale_ratio: float


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by :meth:`SceneGraph.validate`."""

    kind: str
    nids: tuple[int, ...]
    message: str


@dataclass
class SceneGraph:
    """Mutable scene graph with a strong-dependency forest.

    All mutating operations bump ``revision``. The strong subgraph is kept a
    forest at all times: at most one strong parent per node, no cycles.
    """

    nodes: dict[int, ObjectNode] = field(default_factory=dict)
    edges: list[RelationEdge] = field(default_factory=list)
    rel_transforms: dict[tuple[int, int], RelativeTransform] = field(default_factory=dict)
    revision: int = 0
    # Strong-adjacency cache, rebuilt when (revision, edge count) moves.
    _index_key: tuple[int, int] | None = field(default=None, init=False, repr=False, compare=False)
    _children: dict[int, list[RelationEdge]] = field(default_factory=dict, init=False, repr=False, compare=False)
    _parent: dict[int, RelationEdge] = field(default_factory=dict, init=False, repr=False, compare=False)

    # ------------------------------------------------------------------ reads

    def node(self, nid: int) -> ObjectNode:
        try:
            return self.nodes[nid]
        except KeyError:
            raise UnknownNidError(f"nid {nid} not in graph") from None

    def has_node(self, nid: int) -> bool:
        return nid in self.nodes

    def _reindex(self) -> None:
        key = (self.revision, len(self.edges))
        if self._index_key == key:
            return
        children: dict[int, list[RelationEdge]] = {}
        parent: dict[int, RelationEdge] = {}
        for e in self.edges:
            if e.relation is RelationType.ON or e.relation is RelationType.INSIDE:
                children.setdefault(e.src, []).append(e)
                parent.setdefault(e.dst, e)
        for lst in children.values():
            lst.sort(key=lambda e: e.dst)
        self._children, self._parent, self._index_key = children, parent, key

    def strong_edges(self) -> list[RelationEdge]:
        return [e for e in self.edges if e.strong]

    def strong_parent_edge(self, nid: int) -> RelationEdge | None:
        self._reindex()
        return self._parent.get(nid)

    def strong_child_edges(self, nid: int) -> list[RelationEdge]:
        self._reindex()
        return self._children.get(nid, [])

    def strong_roots(self) -> list[int]:
        self._reindex()
        return sorted(n for n in self.nodes if n not in self._parent)

    def strong_descendants(self, nid: int) -> list[int]:
        """Strong subtree below ``nid`` in parent-before-child order."""
        self.node(nid)
        out: list[int] = []
        stack = [e.dst for e in reversed(self.strong_child_edges(nid))]
        while stack:
            cur = stack.pop()
            out.append(cur)
            stack.extend(e.dst for e in reversed(self.strong_child_edges(cur)))
        return out

    def copy(self) -> "SceneGraph":
        """Independent snapshot; safe to hand to another thread."""
        return SceneGraph(
            nodes={nid: replace(n) for nid, n in self.nodes.items()},
            edges=list(self.edges),
            rel_transforms=dict(self.rel_transforms),
            revision=self.revision,
        )

    # -------------------------------------------------------------- mutations

    def add_node(self, node: ObjectNode) -> "SceneGraph":
        if node.nid in self.nodes:
            raise DuplicateNidError(f"nid {node.nid} already present")
        node.check_geometry()
        self.nodes[node.nid] = node
        self.revision += 1
        return self

    def add_edge(self, edge: RelationEdge) -> "SceneGraph":
        for nid in (edge.src, edge.dst):
            if nid not in self.nodes:
                raise UnknownNidError(f"edge endpoint {nid} not in graph")
        if edge.src == edge.dst:
            raise StrongCycleError(f"self edge on nid {edge.src}")
        if edge in self.edges:
            raise DuplicateNidError(f"duplicate edge {edge.src}->{edge.dst} ({edge.relation.value})")
        if edge.strong:
            existing = self.strong_parent_edge(edge.dst)
            if existing is not None:
                raise StrongParentConflictError(
                    f"nid {edge.dst} already depends on {existing.src}"
                )
            # Cycle iff dst is a strong ancestor of src.
            cur: int | None = edge.src
            while cur is not None:
                if cur == edge.dst:
                    raise StrongCycleError(f"edge {edge.src}->{edge.dst} would close a cycle")
                parent = self.strong_parent_edge(cur)
                cur = parent.src if parent else None
        self.edges.append(edge)
        if edge.strong:
            self.rel_transforms[(edge.src, edge.dst)] = self._relative_transform(edge.src, edge.dst)
        self.revision += 1
        return self

    def remove_edge(self, edge: RelationEdge) -> "SceneGraph":
        try:
            self.edges.remove(edge)
        except ValueError:
            raise UnknownNidError(f"edge {edge.src}->{edge.dst} not in graph") from None
        self.rel_transforms.pop((edge.src, edge.dst), None)
        self.revision += 1
        return self

    def remove_node(self, nid: int, cascade: bool = False) -> "SceneGraph":
        """Delete a node; either cascade to its strong subtree or re-parent it.

        With ``cascade=False`` each strong child is re-attached to the removed
        node's strong parent (keeping the child's own relation type) with its
        transform recomputed from world poses; children of a removed root
        become strong roots.
        """
        self.node(nid)
        parent_edge = self.strong_parent_edge(nid)
        child_edges = self.strong_child_edges(nid)

        doomed = {nid}
        if cascade:
            doomed.update(self.strong_descendants(nid))

        self.edges = [e for e in self.edges if e.src not in doomed and e.dst not in doomed]
        self.rel_transforms = {
            k: v for k, v in self.rel_transforms.items() if k[0] not in doomed and k[1] not in doomed
        }
        for n in doomed:
            del self.nodes[n]

        if not cascade and parent_edge is not None:
            for ce in child_edges:
                new_edge = RelationEdge(parent_edge.src, ce.dst, ce.relation, ce.label)
                self.edges.append(new_edge)
                self.rel_transforms[(new_edge.src, new_edge.dst)] = self._relative_transform(
                    new_edge.src, new_edge.dst
                )
        self.revision += 1
        return self

    def modify_node_pose(self, nid: int, new_pos=None, new_rot=None) -> "SceneGraph":
        """Update a node's pose and carry its strong subtree along.

        The node's own relative transform (to its strong parent, if any) is
        re-recorded, so the edit sticks across later parent moves.
        """
        node = self.node(nid)
        if new_pos is not None:
            node.pos = (float(new_pos[0]), float(new_pos[1]), float(new_pos[2]))
        if new_rot is not None:
            node.rot = (float(new_rot[0]), float(new_rot[1]), float(new_rot[2]))
        parent_edge = self.strong_parent_edge(nid)
        if parent_edge is not None:
            self.rel_transforms[(parent_edge.src, nid)] = self._relative_transform(
                parent_edge.src, nid
            )
        from .layout import propagate_pose  # deferred: layout builds on this module

        propagate_pose(self, nid)
        self.revision += 1
        return self

    # ------------------------------------------------------------- validation

    def validate(self) -> list[Violation]:
        """Structural invariant check; returns [] iff the graph is consistent."""
        out: list[Violation] = []
        for key, node in self.nodes.items():
            if node.nid != key:
                out.append(Violation("nid_mismatch", (key,), f"node keyed {key} carries nid {node.nid}"))
            if node.scale <= 0.0 or any(h <= 0.0 for h in node.half_extents):
                out.append(Violation("invalid_geometry", (node.nid,), "non-positive scale or extents"))

        seen: set[tuple[int, int, RelationType, str]] = set()
        strong_parent: dict[int, int] = {}
        for e in self.edges:
            if e.src not in self.nodes or e.dst not in self.nodes:
                out.append(Violation("unknown_nid", (e.src, e.dst), "edge endpoint missing"))
                continue
            if e.src == e.dst:
                out.append(Violation("self_edge", (e.src,), "edge connects a node to itself"))
            key = (e.src, e.dst, e.relation, e.label)
            if key in seen:
                out.append(Violation("duplicate_edge", (e.src, e.dst), f"duplicate {e.relation.value} edge"))
            seen.add(key)
            if e.strong:
                if e.dst in strong_parent:
                    out.append(
                        Violation(
                            "strong_parent_conflict",
                            (strong_parent[e.dst], e.src, e.dst),
                            f"nid {e.dst} has two strong parents",
                        )
                    )
                else:
                    strong_parent[e.dst] = e.src

        # Cycle scan over the strong parent map (each node has <= 1 parent here).
        color: dict[int, int] = {}
        for start in strong_parent:
            if color.get(start):
                continue
            trail = []
            cur: int | None = start
            while cur is not None and color.get(cur, 0) == 0:
                color[cur] = 1
                trail.append(cur)
                cur = strong_parent.get(cur)
            if cur is not None and color.get(cur) == 1:
                out.append(Violation("strong_cycle", (cur,), "strong dependency cycle"))
            for n in trail:
                color[n] = 2

        strong_keys = {(e.src, e.dst) for e in self.edges if e.strong}
        for key in strong_keys:
            if key not in self.rel_transforms:
                out.append(Violation("missing_transform", key, "strong edge without relative transform"))
        for key, tr in self.rel_transforms.items():
            if key not in strong_keys:
                out.append(Violation("orphan_transform", key, "relative transform without strong edge"))
            if tr.scale_ratio <= 0.0:
                out.append(Violation("invalid_geometry", key, "non-positive scale ratio"))

        for e in self.edges:
            if e.relation is RelationType.ON:
                for nid in (e.src, e.dst):
                    node = self.nodes.get(nid)
                    if node is not None and not node.is_upright():
                        out.append(Violation("not_upright", (nid,), "On participant with roll/pitch != 0"))
        return out

    # --------------------------------------------------------------- internal

    def _relative_transform(self, src: int, dst: int) -> RelativeTransform:
        parent, child = self.node(src), self.node(dst)
        dx = child.pos[0] - parent.pos[0]
        dy = child.pos[1] - parent.pos[1]
        c, s = math.cos(-parent.yaw), math.sin(-parent.yaw)
        return RelativeTransform(
            src=src,
            dst=dst,
            translation=(c * dx - s * dy, s * dx + c * dy, child.pos[2] - parent.pos[2]),
            yaw_delta=child.yaw - parent.yaw,
            scale_ratio=child.scale / parent.scale,
        )
