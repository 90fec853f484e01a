"""Session HTTP service.

Thin JSON layer over the library: every endpoint's effect is exactly the
corresponding library call sequence on the session's graph (POST steps ->
run_step; PATCH node -> modify_node_pose + optimize_layout; DELETE node ->
remove_node). Mutations on one session are serialized by a per-session lock
and bump the graph revision; clients may send ``If-Match: <revision>`` for
optimistic concurrency and get 409 (state untouched) on mismatch.
"""

from dataclasses import dataclass
import itertools
import threading
from typing import Any

from fastapi import FastAPI, Header, HTTPException, Response
from pydantic import BaseModel

from .backends import BackendAdapters, EndpointSpec, ProceduralBackend, external_adapter_config
from .errors import AdapterFailureError, UnknownAnchorError, UnknownNidError
from .layout import optimize_layout, stability_violations
from .pipeline import FLOOR_ANCHOR, SceneSession, run_step
from .serialization import report_document, save_scene, scene_document
from .service_time import now_iso


@dataclass
class ServiceConfig:
    default_seed: int = 0
    endpoints: EndpointSpec | None = None  # None -> procedural backend
    deterministic_created: bool = False  # suppress wall-clock timestamps


class _Entry:
    def __init__(self, session: SceneSession):
        self.session = session
        self.lock = threading.Lock()
        # most recent layout report: last step's merge or last pose edit
        self.last_report = session.log[-1].report if session.log else None


class CreateSessionBody(BaseModel):
    text: str
    seed: int | None = None


class StepBody(BaseModel):
    anchorNid: int
    text: str
    seed: int | None = None


class PatchNodeBody(BaseModel):
    pos: list[float] | None = None
    rot: list[float] | None = None


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="higs scene service")
    sessions: dict[str, _Entry] = {}
    registry_lock = threading.Lock()
    counter = itertools.count(1)

    def make_backend(seed: int) -> BackendAdapters:
        if config.endpoints is not None:
            return external_adapter_config(config.endpoints)
        return ProceduralBackend(seed).adapters()

    def entry_of(session_id: str) -> _Entry:
        with registry_lock:
            entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return entry

    def check_revision(session: SceneSession, if_match: str | None) -> None:
        if if_match is None:
            return
        try:
            expected = int(if_match.strip().strip('"'))
        except ValueError:
            raise HTTPException(status_code=422, detail="If-Match must be a revision integer") from None
        if expected != session.revision:
            raise HTTPException(
                status_code=409,
                detail={"message": "revision mismatch", "revision": session.revision},
            )

    def summary(session: SceneSession) -> dict[str, Any]:
        return {
            "sessionId": session.session_id,
            "stepIndex": session.step_index,
            "revision": session.revision,
            "nodeCount": len(session.global_graph.nodes),
            "backendSeed": session.backend_seed,
            "created": session.created,
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        seed = config.default_seed if body.seed is None else body.seed
        session_id = f"s{next(counter):04d}"
        session = SceneSession(
            session_id=session_id,
            adapters=make_backend(seed),
            backend_seed=seed,
            created="" if config.deterministic_created else now_iso(),
        )
        try:
            run_step(session, FLOOR_ANCHOR, body.text, seed)
        except AdapterFailureError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        with registry_lock:
            sessions[session_id] = _Entry(session)
        return {**summary(session), "scene": scene_document(session.global_graph, created=session.created, seed=seed, step_count=len(session.log))}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            return summary(entry.session)

    @app.get("/sessions/{session_id}/scene")
    def get_scene(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            payload = save_scene(
                session.global_graph,
                created=session.created,
                seed=session.backend_seed,
                step_count=len(session.log),
            )
        return Response(content=payload, media_type="application/json")

    @app.get("/sessions/{session_id}/graph")
    def get_graph(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            graph = session.global_graph
            doc = scene_document(graph)
            return {
                "revision": session.revision,
                "nodes": doc["nodes"],
                "edges": doc["edges"],
                "relTransforms": doc["relTransforms"],
                "strongRoots": graph.strong_roots(),
                "onViolations": [[e.src, e.dst] for e in stability_violations(graph)],
            }

    @app.post("/sessions/{session_id}/steps")
    def post_step(session_id: str, body: StepBody, if_match: str | None = Header(default=None)):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            check_revision(session, if_match)
            seed = body.seed if body.seed is not None else session.backend_seed + 1000 * len(session.log)
            try:
                run_step(session, body.anchorNid, body.text, seed)
            except UnknownAnchorError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            except AdapterFailureError as exc:
                raise HTTPException(status_code=502, detail=str(exc)) from exc
            record = session.log[-1]
            entry.last_report = record.report
            return {
                "stepIndex": record.step_index,
                "revision": session.revision,
                "seed": record.seed,
                "newNids": sorted(record.nid_map.values()),
                "nidMap": {str(k): v for k, v in sorted(record.nid_map.items())},
                "report": report_document(record.report),
                "warnings": record.warnings,
            }

    @app.patch("/sessions/{session_id}/nodes/{nid}")
    def patch_node(
        session_id: str,
        nid: int,
        body: PatchNodeBody,
        if_match: str | None = Header(default=None),
    ):
        for name, v in (("pos", body.pos), ("rot", body.rot)):
            if v is not None and len(v) != 3:
                raise HTTPException(status_code=422, detail=f"{name} must have 3 components")
        if body.pos is None and body.rot is None:
            raise HTTPException(status_code=422, detail="nothing to update")
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            check_revision(session, if_match)
            graph = session.global_graph
            if nid not in graph.nodes:
                raise HTTPException(status_code=404, detail=f"unknown nid {nid}")
            graph.modify_node_pose(nid, new_pos=body.pos, new_rot=body.rot)
            _, report = optimize_layout(graph)
            entry.last_report = report
            return {"revision": session.revision, "report": report_document(report)}

    @app.delete("/sessions/{session_id}/nodes/{nid}")
    def delete_node(
        session_id: str,
        nid: int,
        cascade: bool = False,
        if_match: str | None = Header(default=None),
    ):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            check_revision(session, if_match)
            graph = session.global_graph
            if nid not in graph.nodes:
                raise HTTPException(status_code=404, detail=f"unknown nid {nid}")
            before = set(graph.nodes)
            try:
                graph.remove_node(nid, cascade=cascade)
            except UnknownNidError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            return {"revision": session.revision, "removed": sorted(before - set(graph.nodes))}

    @app.get("/sessions/{session_id}/report")
    def get_report(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            steps = [
                {
                    "stepIndex": r.step_index,
                    "anchorNid": r.anchor_nid,
                    "text": r.user_text,
                    "corrections": len(r.report.corrections),
                    "converged": r.report.converged,
                    "warnings": r.warnings,
                }
                for r in session.log
            ]
            last = report_document(entry.last_report) if entry.last_report else None
            return {"revision": session.revision, "steps": steps, "last": last}

    return app
