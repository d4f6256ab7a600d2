"""HTTP JSON service exposing the analyzer to interactive clients.

Session model: POST /api/nets uploads a net and gets back a content-derived
id (the SHA-256 of the canonical native serialization), so uploading the
same net twice lands in the same session. Sessions are kept in a bounded
LRU; evicting one only drops caches, since any client can re-upload and get
the identical id back.
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .decide import COVER, EXACT, NOT_REACHABLE, NetAnalyzer
from .formats import format_native, load_net
from .netcore import NetError
from .oracle import CapExceeded
from .structure import validate_structure

MAX_SESSIONS = 64


class _Session:
    def __init__(self, net_id, wf, report):
        self.net_id = net_id
        self.wf = wf
        self.report = report
        self.analyzer = NetAnalyzer(wf)
        self.analyzer.prepare()
        self.lock = threading.Lock()


def _error(status, code, message, extra=None):
    body = {"error": {"code": code, "message": message}}
    if extra:
        body.update(extra)
    return JSONResponse(body, status_code=status)


def _net_json(session):
    wf = session.wf
    net = wf.net
    nodes = []
    for i, label in enumerate(net.labels):
        nodes.append(
            {
                "id": label,
                "kind": "place" if net.is_place[i] else "transition",
                "isSource": i == wf.source,
                "isSink": i == wf.sink,
            }
        )
    edges = [{"from": net.labels[a], "to": net.labels[b]} for a, b in net.arcs]
    return {
        "netId": session.net_id,
        "nodes": nodes,
        "edges": edges,
        "structureReport": session.report.to_json_dict(),
        "soundness": session.analyzer.soundness_label,
    }


def create_app(max_sessions=MAX_SESSIONS):
    app = FastAPI(title="wfreach", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    sessions = OrderedDict()
    registry_lock = threading.Lock()

    def get_session(net_id):
        with registry_lock:
            session = sessions.get(net_id)
            if session is not None:
                sessions.move_to_end(net_id)
            return session

    @app.post("/api/nets")
    async def upload(request: Request):
        text = (await request.body()).decode("utf-8", errors="replace")
        try:
            wf = load_net(text, validate=False)
        except NetError as err:
            return _error(400, err.code, str(err))
        report = validate_structure(wf)
        if not (report.is_workflow and report.is_proper):
            return _error(
                422,
                "STRUCTURE_VIOLATION",
                "net failed structural validation",
                {"structureReport": report.to_json_dict()},
            )
        canonical = format_native(wf)
        net_id = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
        with registry_lock:
            session = sessions.get(net_id)
            if session is not None:
                sessions.move_to_end(net_id)
        if session is None:
            try:
                session = _Session(net_id, wf, report)
            except CapExceeded as err:
                return _error(422, "CAP_EXCEEDED", str(err))
            with registry_lock:
                sessions[net_id] = session
                while len(sessions) > max_sessions:
                    sessions.popitem(last=False)
        return JSONResponse(
            {
                "netId": net_id,
                "structureReport": session.report.to_json_dict(),
                "soundness": session.analyzer.soundness_label,
            }
        )

    @app.get("/api/nets/{net_id}")
    async def get_net(net_id: str):
        session = get_session(net_id)
        if session is None:
            return _error(404, "UNKNOWN_NET", f"no session for net id {net_id!r}")
        return JSONResponse(_net_json(session))

    def _run_analysis(session, payload, with_witness):
        marking = payload.get("marking")
        mode = payload.get("mode", EXACT)
        if isinstance(marking, list):
            counts = {}
            for label in marking:
                counts[label] = counts.get(label, 0) + 1
            marking = counts
        if not isinstance(marking, (str, dict)) or not marking:
            return _error(400, "BAD_MARKING", "marking must be a literal, object, or list")
        if mode not in (EXACT, COVER):
            return _error(400, "BAD_MODE", f"mode must be {EXACT!r} or {COVER!r}")
        an = session.analyzer
        try:
            with session.lock:
                report = an.analyze(marking, mode=mode)
                if with_witness and report.verdict != NOT_REACHABLE:
                    an.build_witness(report)
        except NetError as err:
            return _error(400, err.code, str(err))
        return JSONResponse(report.to_json_dict())

    @app.post("/api/nets/{net_id}/analyze")
    async def analyze(net_id: str, request: Request):
        session = get_session(net_id)
        if session is None:
            return _error(404, "UNKNOWN_NET", f"no session for net id {net_id!r}")
        payload = await request.json()
        return _run_analysis(session, payload, with_witness=False)

    @app.post("/api/nets/{net_id}/witness")
    async def witness(net_id: str, request: Request):
        session = get_session(net_id)
        if session is None:
            return _error(404, "UNKNOWN_NET", f"no session for net id {net_id!r}")
        payload = await request.json()
        return _run_analysis(session, payload, with_witness=True)

    @app.get("/api/nets/{net_id}/concurrency")
    async def concurrency(net_id: str):
        session = get_session(net_id)
        if session is None:
            return _error(404, "UNKNOWN_NET", f"no session for net id {net_id!r}")
        an = session.analyzer
        wf = session.wf
        with session.lock:
            if an.source == "structural":
                rel = an.caches()[2]
            else:
                rel = an._oracle_caches()[0]
        keep = an.tr.orig_all
        adjacency = {
            wf.labels[p]: wf.to_labels(rel.places_of(p) & keep) for p in wf.places()
        }
        return JSONResponse({"netId": session.net_id, "concurrency": adjacency})

    return app
