"""Step orchestration: prompt assembly, session state, and step execution.

Each generation step runs the adapter chain (object listing, scene prompt,
image artifact, reconstruction, relation estimation), builds a local scene,
and folds it into the session's global graph — step 0 founds the graph
around a floor root, later steps merge onto a user-chosen anchor object.
Every step is recorded with its inputs and seed, so a session log can be
replayed to reproduce the final scene bit for bit.
"""

from dataclasses import dataclass, field
import logging
from typing import Callable

from .backends import ISO_FRAGMENT, BackendAdapters, PerceivedObject
from .composition import LocalScene, MergeResult, RegionTransform, build_initial_global, merge
from .errors import (
    AdapterFailureError,
    AllEmptyError,
    ReplayDivergenceError,
    UnknownAnchorError,
)
from .graph import ObjectNode, RelationEdge, SceneGraph
from .layout import LayoutReport

logger = logging.getLogger(__name__)

#: Anchor sentinel for the initial step (there is no graph to anchor into yet).
FLOOR_ANCHOR = -1

PROMPT_SEPARATOR = "; "


@dataclass(frozen=True)
class PromptBundle:
    """The per-step prompt fragments: isometric-view constraint (step 0
    only), the session-wide style/context constraint, and the scene text for
    the image stage."""

    iso: str | None
    global_text: str
    sd: str
    step_index: int

    def __post_init__(self):
        if (self.iso is not None) != (self.step_index == 0):
            raise ValueError("iso fragment is present exactly on step 0")


def compose_prompt(bundle: PromptBundle, separator: str = PROMPT_SEPARATOR) -> str:
    """Join the bundle's fragments in iso -> global -> scene order."""
    parts = [p for p in (bundle.iso, bundle.global_text, bundle.sd) if p]
    if not parts:
        raise AllEmptyError("every prompt fragment is empty")
    return separator.join(parts)


def default_summary(graph: SceneGraph) -> str:
    """Category summary of the scene's top-level objects (floor children and
    other strong roots), used as the accumulated global context."""
    toplevel: list[str] = []
    for root in graph.strong_roots():
        node = graph.nodes[root]
        if node.category.lower() == "floor":
            toplevel.extend(graph.nodes[e.dst].category for e in graph.strong_child_edges(root))
        else:
            toplevel.append(node.category)
    if not toplevel:
        return ""
    counts: dict[str, int] = {}
    for cat in toplevel:
        counts[cat] = counts.get(cat, 0) + 1
    return "scene so far: " + ", ".join(f"{c} x{counts[c]}" for c in sorted(counts))


@dataclass
class StepRecord:
    """Everything needed to reproduce (and inspect) one generation step."""

    step_index: int
    anchor_nid: int
    user_text: str
    seed: int
    prompt: PromptBundle
    artifact: str
    local_graph: SceneGraph
    nid_map: dict[int, int]
    applied_transform: RegionTransform
    report: LayoutReport
    warnings: list[str] = field(default_factory=list)
    viewpoint: str = ""


@dataclass
class SceneSession:
    """One evolving scene: global graph, step log, and the generation backend."""

    session_id: str
    adapters: BackendAdapters
    backend_seed: int = 0
    global_graph: SceneGraph = field(default_factory=SceneGraph)
    log: list[StepRecord] = field(default_factory=list)
    style_text: str = ""
    created: str = ""

    @property
    def step_index(self) -> int:
        """Index of the last completed step (-1 before the first)."""
        return len(self.log) - 1

    @property
    def revision(self) -> int:
        return self.global_graph.revision


def run_step(session: SceneSession, anchor_nid: int, user_text: str, seed: int) -> SceneSession:
    """Execute one generation step and commit it to the session.

    The step is atomic: every mutation happens on copies, and the session is
    only touched once the whole chain has succeeded.
    """
    n = len(session.log)
    if n == 0:
        if anchor_nid != FLOOR_ANCHOR:
            raise UnknownAnchorError(f"step 0 anchors on the floor sentinel ({FLOOR_ANCHOR}), got {anchor_nid}")
        anchor_category = "floor"
    else:
        if anchor_nid not in session.global_graph.nodes:
            raise UnknownAnchorError(f"anchor nid {anchor_nid} not in global graph")
        anchor_category = session.global_graph.node(anchor_nid).category

    style = user_text if n == 0 else session.style_text
    summary = default_summary(session.global_graph)
    global_text = f"{style}{PROMPT_SEPARATOR}{summary}" if summary else style

    warnings: list[str] = []
    adapters = session.adapters

    objects = _stage("object_lister", adapters.object_lister, user_text, global_text)
    if not objects:
        warnings.append("object lister recognized no vocabulary; step adds nothing")
    sd = _stage("scene_prompter", adapters.scene_prompter, objects, global_text)
    bundle = PromptBundle(
        iso=ISO_FRAGMENT if n == 0 else None,
        global_text=global_text,
        sd=sd,
        step_index=n,
    )
    prompt = compose_prompt(bundle)
    artifact = _stage("image_generator", adapters.image_generator, prompt, seed)
    perceived = _stage("reconstructor", adapters.reconstructor, artifact)
    raw_edges = _stage("relation_estimator", adapters.relation_estimator, perceived)

    local_graph = build_local_graph(perceived, raw_edges, warnings)
    local = LocalScene(graph=local_graph, anchor_category=anchor_category, step_index=n)

    if n == 0:
        new_global, report = build_initial_global(local)
        result = MergeResult(
            nid_map={nid: nid for nid in sorted(local_graph.nodes)},
            applied_transform=RegionTransform((0.0, 0.0, 0.0), 0.0, 1.0),
            report=report,
        )
    else:
        work = session.global_graph.copy()
        work, result = merge(work, local, anchor_nid)
        new_global = work

    record = StepRecord(
        step_index=n,
        anchor_nid=anchor_nid,
        user_text=user_text,
        seed=seed,
        prompt=bundle,
        artifact=artifact,
        local_graph=local_graph,
        nid_map=result.nid_map,
        applied_transform=result.applied_transform,
        report=result.report,
        warnings=warnings,
        viewpoint="isometric" if n == 0 else f"focus:{anchor_category}",
    )
    if n == 0:
        session.style_text = user_text
    session.global_graph = new_global
    session.log.append(record)
    return session


def build_local_graph(
    perceived: list[PerceivedObject],
    raw_edges: list[RelationEdge],
    warnings: list[str],
) -> SceneGraph:
    """Assemble the local scene graph from perceived objects and estimated
    relations. Indices into the perceived list are the local nids.

    Strong edges are inserted child-nid ascending; one that would break the
    forest (second parent, or a cycle) is dropped and logged — the drop rule
    discards the edge whose child has the larger nid.
    """
    graph = SceneGraph()
    for i, obj in enumerate(perceived):
        graph.add_node(
            ObjectNode(
                nid=i,
                category=obj.category,
                pos=obj.pos,
                rot=(0.0, 0.0, obj.yaw),
                scale=obj.scale,
                half_extents=obj.half_extents,
            )
        )
    weak = [e for e in raw_edges if not e.strong]
    strong = sorted((e for e in raw_edges if e.strong), key=lambda e: (e.dst, e.src))
    for e in weak + strong:
        if e.src not in graph.nodes or e.dst not in graph.nodes or e.src == e.dst:
            warnings.append(f"dropped malformed edge {e.src}->{e.dst}")
            continue
        if e in graph.edges:
            warnings.append(f"dropped duplicate edge {e.src}->{e.dst}")
            continue
        try:
            graph.add_edge(e)
        except Exception as exc:
            warnings.append(f"dropped strong edge {e.src}->{e.dst}: {type(exc).__name__}")
    return graph


def replay(
    log: list[StepRecord],
    adapters: BackendAdapters,
    expected: SceneGraph | None = None,
) -> SceneGraph:
    """Re-execute a step log with its recorded inputs and seeds.

    When ``expected`` is given, any mismatch with the replayed graph raises
    ReplayDivergenceError (which would indicate a nondeterminism bug).
    """
    session = SceneSession(session_id="replay", adapters=adapters)
    for i, record in enumerate(log):
        if record.step_index != i:
            raise ReplayDivergenceError(f"log indices not contiguous at position {i}")
        run_step(session, record.anchor_nid, record.user_text, record.seed)
    if expected is not None and not graphs_identical(session.global_graph, expected):
        raise ReplayDivergenceError("replayed graph differs from the stored scene")
    return session.global_graph


def graphs_identical(a: SceneGraph, b: SceneGraph) -> bool:
    """Exact structural equality (poses compared bitwise; revision ignored)."""
    if set(a.nodes) != set(b.nodes):
        return False
    for nid, na in a.nodes.items():
        nb = b.nodes[nid]
        if (na.category, na.pos, na.rot, na.scale, na.half_extents) != (
            nb.category,
            nb.pos,
            nb.rot,
            nb.scale,
            nb.half_extents,
        ):
            return False
    if sorted(a.edges, key=_edge_key) != sorted(b.edges, key=_edge_key):
        return False
    return a.rel_transforms == b.rel_transforms


def _edge_key(e: RelationEdge):
    return (e.src, e.dst, e.relation.value, e.label)


def _stage(name: str, fn: Callable, *args):
    try:
        return fn(*args)
    except AdapterFailureError:
        raise
    except Exception as exc:
        raise AdapterFailureError(name, "remote", str(exc)) from exc
