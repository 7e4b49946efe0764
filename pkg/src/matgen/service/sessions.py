"""Authoring sessions: current partial graph, completion rounds, and an
append-only on-disk event log so sessions survive service restarts.

Accepting a completion consumes the pending round under the session lock,
so two racing accepts resolve as exactly one success and one conflict.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..graph.graph import MaterialGraph, OperatorLibrary
from ..graph.validation import validate_graph
from ..io.graphfile import graph_to_doc, parse_graph


class SessionError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


@dataclass
class Session:
    session_id: str
    graph: MaterialGraph
    revision: int = 0
    history: list[dict] = field(default_factory=list)
    pending: list[MaterialGraph] | None = None
    pending_meta: list[dict] | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    def __init__(self, library: OperatorLibrary, data_dir: str | Path | None = None):
        self.library = library
        self.data_dir = Path(data_dir) if data_dir else None
        self._sessions: dict[str, Session] = {}
        self._store_lock = threading.Lock()
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._replay_all()

    # -- event log -----------------------------------------------------------

    def _log_path(self, session_id: str) -> Path | None:
        if self.data_dir is None:
            return None
        return self.data_dir / f"session_{session_id}.jsonl"

    def _append_event(self, session_id: str, event: dict) -> None:
        path = self._log_path(session_id)
        if path is None:
            return
        with open(path, "a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _replay_all(self) -> None:
        assert self.data_dir is not None
        for path in sorted(self.data_dir.glob("session_*.jsonl")):
            session_id = path.stem[len("session_"):]
            session = None
            for line in path.read_text().splitlines():
                event = json.loads(line)
                if event["type"] == "created":
                    graph = parse_graph(json.dumps(event["graph"]), self.library)
                    session = Session(session_id=session_id, graph=graph)
                elif session is not None and event["type"] == "completed":
                    session.pending = [
                        parse_graph(json.dumps(doc), self.library) for doc in event["candidates"]
                    ]
                    session.pending_meta = event["meta"]
                    session.history.append({"round": "completed", "request": event["request"]})
                elif session is not None and event["type"] == "accepted":
                    assert session.pending is not None
                    chosen = session.pending[event["candidate_index"]]
                    session.graph = chosen.subgraph(event["kept_node_ids"])
                    session.pending = None
                    session.pending_meta = None
                    session.revision += 1
                    session.history.append({
                        "round": "accepted",
                        "candidate_index": event["candidate_index"],
                        "kept_node_ids": event["kept_node_ids"],
                    })
            if session is not None:
                self._sessions[session_id] = session

    # -- operations ------------------------------------------------------------

    def create(self, graph_doc: dict | None) -> Session:
        if graph_doc is None:
            graph = MaterialGraph(self.library)
        else:
            try:
                graph = parse_graph(json.dumps(graph_doc), self.library)
            except Exception as err:
                raise SessionError(422, f"invalid initial graph: {err}") from None
        problems = validate_graph(graph)
        if problems:
            raise SessionError(422, "invalid initial graph: " + "; ".join(problems))
        session = Session(session_id=uuid.uuid4().hex[:12], graph=graph)
        with self._store_lock:
            self._sessions[session.session_id] = session
        self._append_event(session.session_id, {"type": "created", "graph": graph_to_doc(graph)})
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionError(404, f"unknown session {session_id!r}")
        return session

    def record_completion(
        self,
        session: Session,
        request: dict,
        candidates: list[MaterialGraph],
        meta: list[dict],
    ) -> None:
        with session.lock:
            session.pending = candidates
            session.pending_meta = meta
            session.history.append({"round": "completed", "request": request})
        self._append_event(session.session_id, {
            "type": "completed",
            "request": request,
            "candidates": [graph_to_doc(g) for g in candidates],
            "meta": meta,
        })

    def accept(self, session: Session, candidate_index: int, kept_node_ids: list[int]) -> MaterialGraph:
        with session.lock:
            if session.pending is None:
                raise SessionError(409, "no pending completion round; the session advanced concurrently")
            if not 0 <= candidate_index < len(session.pending):
                raise SessionError(422, f"candidate index {candidate_index} out of range")
            chosen = session.pending[candidate_index]
            candidate_ids = set(chosen.node_ids())
            if not set(kept_node_ids) <= candidate_ids:
                raise SessionError(422, "kept node ids must be a subset of the candidate's nodes")
            session.graph = chosen.subgraph(kept_node_ids)
            session.pending = None
            session.pending_meta = None
            session.revision += 1
            session.history.append({
                "round": "accepted",
                "candidate_index": candidate_index,
                "kept_node_ids": sorted(kept_node_ids),
            })
        self._append_event(session.session_id, {
            "type": "accepted",
            "candidate_index": candidate_index,
            "kept_node_ids": sorted(kept_node_ids),
        })
        return session.graph
