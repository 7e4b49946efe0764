"""HTTP/JSON API for guided graph authoring.

Endpoints:
  POST /v1/sessions                   create a session (optional initial graph)
  GET  /v1/sessions/{id}              current partial graph and round history
  POST /v1/sessions/{id}/complete     sample completion candidates
  POST /v1/sessions/{id}/accept       keep a node subset of one candidate
  GET  /v1/library                    operator schemas for UI rendering

Every returned graph passes the independent validator. Completion
candidates carry per-node provenance (pinned vs newly generated) and
low-resolution channel thumbnails.
"""

from __future__ import annotations

import base64
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..io.graphfile import graph_to_doc
from ..ops.evaluate import evaluate_graph
from ..ops.export import png_bytes
from ..ops.library import builtin_library
from ..pipeline.sampler import CompletionRequest, ModelBundle, SamplerConfig, autocomplete
from .sessions import SessionError, SessionStore

THUMBNAIL_RESOLUTION = 128


class CreateSessionBody(BaseModel):
    graph: dict | None = None


class CompleteBody(BaseModel):
    pinned_node_ids: list[int] | None = None
    count: int = Field(default=3, ge=1, le=16)
    temperature: float = Field(default=1.0, ge=0.0, le=4.0)
    seed: int = 0
    max_nodes: int = Field(default=60, ge=1, le=400)
    thumbnails: bool = True


class AcceptBody(BaseModel):
    candidate_index: int
    kept_node_ids: list[int]


def _session_view(session) -> dict:
    return {
        "session_id": session.session_id,
        "revision": session.revision,
        "graph": graph_to_doc(session.graph),
        "history": session.history,
        "has_pending_round": session.pending is not None,
    }


def _thumbnails(graph: MaterialGraph) -> dict[str, str]:
    output = evaluate_graph(graph, THUMBNAIL_RESOLUTION)
    return {
        name: base64.b64encode(png_bytes(img)).decode()
        for name, img in output.channels().items()
    }


def _library_doc(library: OperatorLibrary) -> dict:
    return {
        "version": library.version,
        "hash": library.content_hash,
        "operators": [
            {
                "id": s.type.id,
                "name": s.type.name,
                "input_slots": s.num_input_slots,
                "output_slots": s.num_output_slots,
                "is_generator": s.is_generator,
                "is_output_marker": s.is_output_marker,
                "params": [
                    {
                        "name": p.name,
                        "kind": p.kind.value,
                        "vector_dim": p.vector_dim,
                        "is_discrete": p.is_discrete,
                        "min": p.min_value,
                        "max": p.max_value,
                        "default": list(p.default_value),
                    }
                    for p in s.params
                ],
            }
            for s in library
        ],
    }


def create_app(
    models_dir: str | Path | None = None,
    bundle: ModelBundle | None = None,
    library: OperatorLibrary | None = None,
    data_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    if bundle is None:
        if models_dir is None:
            raise ValueError("either a models directory or a prebuilt bundle is required")
        from ..cli import load_bundle

        bundle, library = load_bundle(models_dir)
    if library is None:
        library = builtin_library()
    store = SessionStore(library, data_dir=data_dir)

    app = FastAPI(title="matgen authoring service")

    @app.exception_handler(SessionError)
    async def session_error_handler(_request: Request, err: SessionError):
        return JSONResponse(status_code=err.status, content={"detail": err.message})

    @app.get("/v1/library")
    def get_library():
        return _library_doc(library)

    @app.post("/v1/sessions")
    def create_session(body: CreateSessionBody):
        session = store.create(body.graph)
        return _session_view(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_view(store.get(session_id))

    @app.post("/v1/sessions/{session_id}/complete")
    def complete(session_id: str, body: CompleteBody):
        session = store.get(session_id)
        graph_ids = set(session.graph.node_ids())
        pinned = body.pinned_node_ids
        if pinned is not None and not set(pinned) <= graph_ids:
            raise SessionError(422, "pinned node ids must be a subset of the session graph")
        request = CompletionRequest(
            partial_graph=session.graph,
            pinned_node_ids=pinned,
            count=body.count,
            config=SamplerConfig(temperature=body.temperature, seed=body.seed, max_nodes=body.max_nodes),
        )
        results = autocomplete(bundle, library, request)
        pinned_set = set(pinned) if pinned is not None else graph_ids
        candidates = []
        meta = []
        for res in results:
            provenance = {
                str(n.node_id): ("pinned" if n.node_id in pinned_set else "generated")
                for n in res.graph.nodes
            }
            entry = {
                "graph": graph_to_doc(res.graph),
                "provenance": provenance,
            }
            if body.thumbnails:
                entry["thumbnails"] = _thumbnails(res.graph)
            candidates.append(entry)
            meta.append({"provenance": provenance})
        store.record_completion(
            session,
            request={"pinned_node_ids": pinned, "count": body.count, "temperature": body.temperature, "seed": body.seed},
            candidates=[r.graph for r in results],
            meta=meta,
        )
        return {"revision": session.revision, "candidates": candidates}

    @app.post("/v1/sessions/{session_id}/accept")
    def accept(session_id: str, body: AcceptBody):
        session = store.get(session_id)
        graph = store.accept(session, body.candidate_index, body.kept_node_ids)
        return {"revision": session.revision, "graph": graph_to_doc(graph)}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
