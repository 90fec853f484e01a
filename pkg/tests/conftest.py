"""Shared generators for randomized suites."""

import math
import random

import pytest

from higs.graph import ObjectNode, RelationEdge, RelationType, SceneGraph


def make_node(nid, category="box", pos=(0.0, 0.0, 0.0), yaw=0.0, scale=1.0, half=(0.5, 0.5, 0.5)):
    return ObjectNode(
        nid=nid,
        category=category,
        pos=tuple(float(c) for c in pos),
        rot=(0.0, 0.0, float(yaw)),
        scale=float(scale),
        half_extents=tuple(float(h) for h in half),
    )


def random_forest(
    rng: random.Random,
    n_roots: int = 2,
    max_depth: int = 5,
    max_fanout: int = 4,
    settled: bool = False,
) -> SceneGraph:
    """Strong forest of upright boxes joined by On edges.

    Children are spawned within 2x the parent footprint, with jittered
    heights. ``settled=True`` seats every child exactly inside/on its parent
    so the graph starts out stable.
    """
    graph = SceneGraph()
    next_nid = [1]

    def spawn(parent: ObjectNode | None, depth: int) -> None:
        nid = next_nid[0]
        next_nid[0] += 1
        if parent is None:
            half = (rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5), rng.uniform(0.1, 0.5))
            scale = rng.uniform(0.8, 1.2)
            node = make_node(
                nid,
                category=f"root{nid}",
                pos=(rng.uniform(-4, 4), rng.uniform(-4, 4), half[2] * scale),
                yaw=rng.uniform(-math.pi, math.pi),
                scale=scale,
                half=half,
            )
            graph.add_node(node)
        else:
            half = tuple(h * rng.uniform(0.15, 0.45) for h in parent.half_extents)
            scale = rng.uniform(0.8, 1.2)
            phx = parent.half_extents[0] * parent.scale
            phy = parent.half_extents[1] * parent.scale
            if settled:
                lx = rng.uniform(-0.9, 0.9) * phx
                ly = rng.uniform(-0.9, 0.9) * phy
                lz = parent.half_extents[2] * parent.scale + half[2] * scale
            else:
                lx = rng.uniform(-1.6, 1.6) * phx
                ly = rng.uniform(-1.6, 1.6) * phy
                lz = parent.half_extents[2] * parent.scale + half[2] * scale + rng.uniform(-0.3, 0.3)
            c, s = math.cos(parent.yaw), math.sin(parent.yaw)
            node = make_node(
                nid,
                category=f"item{nid}",
                pos=(
                    parent.pos[0] + c * lx - s * ly,
                    parent.pos[1] + s * lx + c * ly,
                    parent.pos[2] + lz,
                ),
                yaw=rng.uniform(-math.pi, math.pi),
                scale=scale,
                half=half,
            )
            graph.add_node(node)
            graph.add_edge(RelationEdge(parent.nid, nid, RelationType.ON))
        if depth < max_depth:
            for _ in range(rng.randint(0, max_fanout)):
                spawn(node, depth + 1)

    for _ in range(n_roots):
        spawn(None, 1)
    return graph


def settled_local_scene(rng: random.Random, n_roots: int = 2, max_depth: int = 2):
    """Internally stable local scene whose strong roots rest exactly on z=0."""
    from higs.composition import LocalScene
    from higs.layout import optimize_layout, record_relative_transforms

    g = random_forest(rng, n_roots=n_roots, max_depth=max_depth, settled=True)
    for root in g.strong_roots():
        node = g.nodes[root]
        node.pos = (node.pos[0], node.pos[1], node.half_extents[2] * node.scale)
    record_relative_transforms(g)
    optimize_layout(g)
    return LocalScene(graph=g, anchor_category="table", step_index=1)


ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, outcome in ACCEPTANCE_RESULTS.items():
            mark = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"  [{mark}] {name}")


@pytest.fixture
def rng():
    return random.Random(20260810)
