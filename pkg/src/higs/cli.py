"""Command line interface.

Subcommands: ``generate`` (run a multi-step procedural session), ``validate``
(graph invariant check), ``optimize`` (stability correction on a scene file),
``replay`` (re-execute a session log and compare), ``stats`` (scene metrics),
``serve`` (start the HTTP service). ``--json`` switches the output of the
inspection commands to machine-readable JSON on stdout.
"""

import json
import sys

import click

from .backends import ProceduralBackend
from .errors import HigsError
from .graph import SceneGraph
from .layout import optimize_layout, stability_violations
from .pipeline import FLOOR_ANCHOR, SceneSession, run_step
from .serialization import (
    load_scene,
    load_session,
    report_document,
    save_scene,
    save_session,
    scene_meta,
)


@click.group()
def main():
    """Progressive 3D scene construction engine."""


@main.command()
@click.option("--text", required=True, help="Scene description for the initial step.")
@click.option("--steps", default="", help="Expansion steps as 'anchorCategory:text;...'.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--session", "session_path", default=None, type=click.Path(dir_okay=False), help="Also write the replayable session file.")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON summary to stdout.")
def generate(text, steps, seed, out_path, session_path, as_json):
    """Build a scene with the procedural backend and save it."""
    session = SceneSession(session_id="cli", adapters=ProceduralBackend(seed).adapters(), backend_seed=seed)
    try:
        run_step(session, FLOOR_ANCHOR, text, seed)
        for i, part in enumerate(p for p in steps.split(";") if p.strip()):
            if ":" not in part:
                raise click.ClickException(f"step {i + 1}: expected 'anchorCategory:text', got {part!r}")
            anchor_cat, step_text = part.split(":", 1)
            anchor_nid = _resolve_anchor(session.global_graph, anchor_cat.strip())
            run_step(session, anchor_nid, step_text.strip(), seed + i + 1)
    except HigsError as exc:
        raise click.ClickException(str(exc)) from exc

    with open(out_path, "wb") as f:
        f.write(save_scene(session.global_graph, seed=seed, step_count=len(session.log)))
    if session_path:
        with open(session_path, "wb") as f:
            f.write(save_session(session))
    summary = {
        "steps": len(session.log),
        "nodes": len(session.global_graph.nodes),
        "edges": len(session.global_graph.edges),
        "out": out_path,
    }
    if as_json:
        click.echo(json.dumps(summary))
    else:
        click.echo(f"wrote {out_path}: {summary['nodes']} nodes over {summary['steps']} steps")


@main.command()
@click.argument("scene", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def validate(scene, as_json):
    """Exit 0 iff the scene file passes every graph invariant."""
    graph = _load_scene_or_die(scene)
    violations = graph.validate()
    if as_json:
        click.echo(json.dumps({"violations": [{"kind": v.kind, "nids": list(v.nids), "message": v.message} for v in violations]}))
    else:
        for v in violations:
            click.echo(f"{v.kind}: nids {list(v.nids)}: {v.message}")
        click.echo(f"{len(violations)} violation(s)")
    sys.exit(0 if not violations else 1)


@main.command()
@click.argument("scene", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False))
@click.option("--inset", default=0.0, show_default=True, type=float, help="Placement-area inset ratio.")
@click.option("--max-passes", default=8, show_default=True, type=int)
@click.option("--json", "as_json", is_flag=True)
def optimize(scene, out_path, report_path, inset, max_passes, as_json):
    """Run stability correction over a scene file."""
    graph = _load_scene_or_die(scene)
    meta = scene_meta(_read(scene))
    graph, report = optimize_layout(graph, max_passes=max_passes, inset_ratio=inset)
    with open(out_path, "wb") as f:
        f.write(save_scene(graph, created=meta.get("created", ""), seed=meta.get("seed", 0), step_count=meta.get("stepCount", 0)))
    doc = report_document(report)
    if report_path:
        with open(report_path, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    if as_json:
        click.echo(json.dumps(doc))
    else:
        click.echo(
            f"{len(report.corrections)} correction(s) in {report.passes} pass(es); "
            f"{'converged' if report.converged else 'did not converge'}"
        )
    sys.exit(0 if report.converged else 1)


@main.command()
@click.argument("session_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def replay(session_file, as_json):
    """Re-execute a session log; exit 0 iff it reproduces the stored scene."""
    data = _read(session_file)
    try:
        stored = load_session(data, adapters=None)  # adapters attached below
    except HigsError as exc:
        raise click.ClickException(str(exc)) from exc
    adapters = ProceduralBackend(stored.backend_seed).adapters()
    replayed = SceneSession(session_id="replay", adapters=adapters)
    diverged = None
    try:
        for record in stored.log:
            run_step(replayed, record.anchor_nid, record.user_text, record.seed)
    except HigsError as exc:
        diverged = f"replay failed: {exc}"
    if diverged is None:
        expected = save_scene(stored.global_graph)
        actual = save_scene(replayed.global_graph)
        if expected != actual:
            diverged = "replayed scene differs from the stored scene"
    if as_json:
        click.echo(json.dumps({"ok": diverged is None, "error": diverged}))
    elif diverged:
        click.echo(diverged)
    else:
        click.echo(f"replay ok: {len(stored.log)} step(s), {len(replayed.global_graph.nodes)} nodes")
    sys.exit(0 if diverged is None else 1)


@main.command()
@click.argument("scene", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def stats(scene, as_json):
    """Scene metrics: counts, strong-tree depth, support violations."""
    graph = _load_scene_or_die(scene)
    categories: dict[str, int] = {}
    for node in graph.nodes.values():
        categories[node.category] = categories.get(node.category, 0) + 1
    out = {
        "nodes": len(graph.nodes),
        "edges": len(graph.edges),
        "strongDepth": _strong_depth(graph),
        "categories": dict(sorted(categories.items())),
        "onViolations": len(stability_violations(graph)),
    }
    if as_json:
        click.echo(json.dumps(out))
    else:
        click.echo(f"nodes: {out['nodes']}")
        click.echo(f"edges: {out['edges']}")
        click.echo(f"strong depth: {out['strongDepth']}")
        click.echo(f"on-violations: {out['onViolations']}")
        for cat, n in out["categories"].items():
            click.echo(f"  {cat}: {n}")
    sys.exit(0)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8750, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int, help="Default session seed.")
@click.option("--endpoints", default=None, type=click.Path(exists=True, dir_okay=False), help="JSON file of external adapter endpoints.")
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True, file_okay=False), help="Static directory to serve at /ui.")
def serve(host, port, seed, endpoints, ui_dir):
    """Start the session HTTP service."""
    import uvicorn

    from .backends import EndpointSpec
    from .service import ServiceConfig, create_app

    spec = None
    if endpoints:
        with open(endpoints) as f:
            raw = json.load(f)
        spec = EndpointSpec(**raw)
    app = create_app(ServiceConfig(default_seed=seed, endpoints=spec))
    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)


def _resolve_anchor(graph: SceneGraph, category: str) -> int:
    matches = sorted(nid for nid, n in graph.nodes.items() if n.category.lower() == category.lower())
    if not matches:
        raise click.ClickException(f"no node with category {category!r} in the scene")
    return matches[0]


def _strong_depth(graph: SceneGraph) -> int:
    depth = 0
    for root in graph.strong_roots():
        stack = [(root, 0)]
        while stack:
            nid, d = stack.pop()
            depth = max(depth, d)
            stack.extend((e.dst, d + 1) for e in graph.strong_child_edges(nid))
    return depth


def _read(path: str) -> bytes:
    with open(path, "rb") as f:
        return f.read()


def _load_scene_or_die(path: str) -> SceneGraph:
    try:
        return load_scene(_read(path))
    except HigsError as exc:
        raise click.ClickException(str(exc)) from exc


if __name__ == "__main__":
    main()
