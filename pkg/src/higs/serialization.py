"""Versioned scene and session files with canonical, replayable JSON.

Canonicalization rules: fixed field order, nodes/edges/transforms sorted,
floats rounded to 9 significant digits (and negative zero normalized), so
identical graphs always produce identical bytes and save -> load -> save is
a fixed point.
"""

import json

from .backends import BackendAdapters
from .composition import RegionTransform
from .errors import CorruptFileError, SchemaVersionMismatchError
from .graph import ObjectNode, RelationEdge, RelativeTransform, SceneGraph, relation_from_string
from .layout import Correction, LayoutReport
from .pipeline import PromptBundle, SceneSession, StepRecord

SCENE_VERSION = "higs-scene/1"
SESSION_VERSION = "higs-session/1"


def canon_float(x: float) -> float:
    """Round to 9 significant digits; idempotent, -0.0 folded to 0.0."""
    x = float(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.9g}")


def _vec(v) -> list[float]:
    return [canon_float(c) for c in v]


# ----------------------------------------------------------------- scene file


def scene_document(graph: SceneGraph, created: str = "", seed: int = 0, step_count: int = 0) -> dict:
    """The scene file as an ordered plain dict (pure function of content)."""
    return {
        "version": SCENE_VERSION,
        "meta": {"created": created, "seed": int(seed), "stepCount": int(step_count)},
        "nodes": [
            {
                "nid": n.nid,
                "category": n.category,
                "pos": _vec(n.pos),
                "rot": _vec(n.rot),
                "scale": canon_float(n.scale),
                "halfExtents": _vec(n.half_extents),
            }
            for n in (graph.nodes[k] for k in sorted(graph.nodes))
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "relation": e.relation_text()}
            for e in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.relation_text()))
        ],
        "relTransforms": [
            {
                "src": t.src,
                "dst": t.dst,
                "translation": _vec(t.translation),
                "yawDelta": canon_float(t.yaw_delta),
                "scaleRatio": canon_float(t.scale_ratio),
            }
            for t in (graph.rel_transforms[k] for k in sorted(graph.rel_transforms))
        ],
    }


def save_scene(graph: SceneGraph, created: str = "", seed: int = 0, step_count: int = 0) -> bytes:
    doc = scene_document(graph, created, seed, step_count)
    return _dump(doc)


def load_scene(data: bytes) -> SceneGraph:
    doc = _parse(data)
    _check_version(doc, SCENE_VERSION)
    graph = graph_from_document(doc, path="$")
    violations = graph.validate()
    if violations:
        first = violations[0]
        raise CorruptFileError(
            f"scene violates graph invariants ({len(violations)} total): "
            f"{first.kind} at nids {list(first.nids)}: {first.message}"
        )
    return graph


def scene_meta(data: bytes) -> dict:
    doc = _parse(data)
    _check_version(doc, SCENE_VERSION)
    return dict(doc.get("meta", {}))


def graph_from_document(doc: dict, path: str) -> SceneGraph:
    """Raw (unvalidated) graph assembly with field-level diagnostics."""
    graph = SceneGraph()
    for i, raw in enumerate(_req(doc, "nodes", list, path)):
        p = f"{path}.nodes[{i}]"
        nid = _req(raw, "nid", int, p)
        graph.nodes[nid] = ObjectNode(
            nid=nid,
            category=_req(raw, "category", str, p),
            pos=_vec3(raw, "pos", p),
            rot=_vec3(raw, "rot", p),
            scale=_num(raw, "scale", p),
            half_extents=_vec3(raw, "halfExtents", p),
        )
    for i, raw in enumerate(_req(doc, "edges", list, path)):
        p = f"{path}.edges[{i}]"
        relation, label = relation_from_string(_req(raw, "relation", str, p))
        graph.edges.append(
            RelationEdge(src=_req(raw, "src", int, p), dst=_req(raw, "dst", int, p), relation=relation, label=label)
        )
    for i, raw in enumerate(_req(doc, "relTransforms", list, path)):
        p = f"{path}.relTransforms[{i}]"
        t = RelativeTransform(
            src=_req(raw, "src", int, p),
            dst=_req(raw, "dst", int, p),
            translation=_vec3(raw, "translation", p),
            yaw_delta=_num(raw, "yawDelta", p),
            scale_ratio=_num(raw, "scaleRatio", p),
        )
        graph.rel_transforms[(t.src, t.dst)] = t
    return graph


# --------------------------------------------------------------- session file


def session_document(session: SceneSession) -> dict:
    return {
        "version": SESSION_VERSION,
        "sessionId": session.session_id,
        "meta": {
            "created": session.created,
            "backendSeed": int(session.backend_seed),
            "styleText": session.style_text,
        },
        "scene": scene_document(
            session.global_graph,
            created=session.created,
            seed=session.backend_seed,
            step_count=len(session.log),
        ),
        "log": [_step_record_doc(r) for r in session.log],
    }


def save_session(session: SceneSession) -> bytes:
    return _dump(session_document(session))


def load_session(data: bytes, adapters: BackendAdapters | None) -> SceneSession:
    doc = _parse(data)
    _check_version(doc, SESSION_VERSION)
    meta = _req(doc, "meta", dict, "$")
    scene_doc = _req(doc, "scene", dict, "$")
    _check_version(scene_doc, SCENE_VERSION)
    graph = graph_from_document(scene_doc, path="$.scene")
    session = SceneSession(
        session_id=_req(doc, "sessionId", str, "$"),
        adapters=adapters,
        backend_seed=_req(meta, "backendSeed", int, "$.meta"),
        global_graph=graph,
        style_text=_req(meta, "styleText", str, "$.meta"),
        created=_req(meta, "created", str, "$.meta"),
    )
    for i, raw in enumerate(_req(doc, "log", list, "$")):
        session.log.append(_step_record_from_doc(raw, f"$.log[{i}]"))
    return session


def _step_record_doc(r: StepRecord) -> dict:
    local = scene_document(r.local_graph)
    return {
        "step": r.step_index,
        "anchorNid": r.anchor_nid,
        "text": r.user_text,
        "seed": r.seed,
        "prompt": {"iso": r.prompt.iso, "global": r.prompt.global_text, "sd": r.prompt.sd},
        "artifact": r.artifact,
        "local": {k: local[k] for k in ("nodes", "edges", "relTransforms")},
        "nidMap": {str(k): v for k, v in sorted(r.nid_map.items())},
        "appliedTransform": {
            "translation": _vec(r.applied_transform.translation),
            "yaw": canon_float(r.applied_transform.yaw),
            "scale": canon_float(r.applied_transform.scale),
        },
        "report": report_document(r.report),
        "warnings": list(r.warnings),
        "viewpoint": r.viewpoint,
    }


def _step_record_from_doc(raw: dict, path: str) -> StepRecord:
    prompt_raw = _req(raw, "prompt", dict, path)
    iso = prompt_raw.get("iso")
    if iso is not None and not isinstance(iso, str):
        raise CorruptFileError(f"{path}.prompt.iso must be a string or null")
    local_raw = _req(raw, "local", dict, path)
    local_doc = {"nodes": local_raw.get("nodes", []), "edges": local_raw.get("edges", []), "relTransforms": local_raw.get("relTransforms", [])}
    tr = _req(raw, "appliedTransform", dict, path)
    report_raw = _req(raw, "report", dict, path)
    step_index = _req(raw, "step", int, path)
    return StepRecord(
        step_index=step_index,
        anchor_nid=_req(raw, "anchorNid", int, path),
        user_text=_req(raw, "text", str, path),
        seed=_req(raw, "seed", int, path),
        prompt=PromptBundle(
            iso=iso,
            global_text=_req(prompt_raw, "global", str, f"{path}.prompt"),
            sd=_req(prompt_raw, "sd", str, f"{path}.prompt"),
            step_index=step_index,
        ),
        artifact=_req(raw, "artifact", str, path),
        local_graph=graph_from_document(local_doc, path=f"{path}.local"),
        nid_map={int(k): v for k, v in _req(raw, "nidMap", dict, path).items()},
        applied_transform=RegionTransform(
            translation=_vec3(tr, "translation", f"{path}.appliedTransform"),
            yaw=_num(tr, "yaw", f"{path}.appliedTransform"),
            scale=_num(tr, "scale", f"{path}.appliedTransform"),
        ),
        report=LayoutReport(
            corrections=[
                Correction(
                    nid=_req(c, "nid", int, f"{path}.report.corrections[{j}]"),
                    delta=_vec3(c, "delta", f"{path}.report.corrections[{j}]"),
                    reason=_req(c, "reason", str, f"{path}.report.corrections[{j}]"),
                )
                for j, c in enumerate(_req(report_raw, "corrections", list, f"{path}.report"))
            ],
            passes=_req(report_raw, "passes", int, f"{path}.report"),
            converged=_req(report_raw, "converged", bool, f"{path}.report"),
        ),
        warnings=[str(w) for w in raw.get("warnings", [])],
        viewpoint=str(raw.get("viewpoint", "")),
    )


def report_document(report: LayoutReport) -> dict:
    return {
        "passes": report.passes,
        "converged": report.converged,
        "corrections": [
            {"nid": c.nid, "delta": _vec(c.delta), "reason": c.reason} for c in report.corrections
        ],
    }


# ------------------------------------------------------------------- plumbing


def _dump(doc: dict) -> bytes:
    try:
        return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")
    except ValueError as exc:
        raise CorruptFileError(f"document contains non-finite numbers: {exc}") from None


def _parse(data: bytes):
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFileError(f"not a valid JSON document: {exc}") from None
    if not isinstance(doc, dict):
        raise CorruptFileError("top-level value must be an object")
    return doc


def _check_version(doc: dict, expected: str) -> None:
    version = doc.get("version")
    if version is None:
        raise CorruptFileError("missing field 'version'")
    if version != expected:
        raise SchemaVersionMismatchError(f"expected {expected!r}, found {version!r}")


def _req(obj, key: str, typ, path: str):
    if not isinstance(obj, dict) or key not in obj:
        raise CorruptFileError(f"missing field '{path}.{key}'")
    v = obj[key]
    if typ is int and isinstance(v, bool):
        raise CorruptFileError(f"field '{path}.{key}' must be {typ.__name__}")
    if not isinstance(v, typ):
        raise CorruptFileError(f"field '{path}.{key}' must be {typ.__name__}")
    return v


def _num(obj: dict, key: str, path: str) -> float:
    if not isinstance(obj, dict) or key not in obj:
        raise CorruptFileError(f"missing field '{path}.{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise CorruptFileError(f"field '{path}.{key}' must be a number")
    return float(v)


def _vec3(obj: dict, key: str, path: str) -> tuple[float, float, float]:
    v = _req(obj, key, list, path)
    if len(v) != 3 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        raise CorruptFileError(f"field '{path}.{key}' must be a 3-vector of numbers")
    return float(v[0]), float(v[1]), float(v[2])
