"""Session-oriented HTTP+JSON API over the customization engine.

The service is a stateful wizard backend: upload a model, open a session
with area and pins, answer open decisions one at a time (each answer
reports its forced consequences), preview what-ifs without mutating, and
finalize into configuration, customized model and customized documents.

Responses are pure functions of (model, session log): nothing carries
timestamps, so replaying a request log reproduces identical bodies
modulo the opaque session id.
"""

from __future__ import annotations

import hashlib
import json
import re
import secrets
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import derive
from .configure import (
    Consequence,
    ConsequenceKind,
    Decision,
    Requirements,
    Session,
    apply_requirements,
    total_configuration,
)
from .errors import FamvarError, InvalidModelError
from .model import Diagnostic, FamilyModel
from .trace import ModelDocument, check_traces, customize_document
from .xmlio import (
    parse_family_model,
    parse_model_document,
    serialize_configuration,
    serialize_family_model,
    serialize_model_document,
)


class ApiError(Exception):
    def __init__(self, status: int, body: dict):
        super().__init__(f"HTTP {status}")
        self.status = status
        self.body = body


def _diag_json(diagnostics: list[Diagnostic]) -> list[dict]:
    return [{"code": d.code, "subject": d.subject, "message": d.message} for d in diagnostics]


def _error_json(exc: FamvarError) -> list[dict]:
    if isinstance(exc, InvalidModelError) and exc.diagnostics:
        return _diag_json(exc.diagnostics)
    return [{"code": exc.code, "subject": exc.subject or "", "message": exc.message}]


def _consequences_json(consequences: list[Consequence]) -> list[dict]:
    return [{"kind": c.kind.value, "subject": c.subject, "cause": c.cause} for c in consequences]


def _entries_json(entries) -> list[dict]:
    return [
        {
            "variant": e.variant,
            "description": e.description,
            "guard": list(e.guard),
            "choices": [{"value": ref, "name": name} for ref, name in e.choices],
            "trace": e.trace,
            "children": _entries_json(e.children),
        }
        for e in entries
    ]


def _configuration_json(area: str, states) -> dict:
    return {
        "area": area,
        "states": {
            vid: {
                "kind": state.kind.value,
                "selected": list(state.selected),
                "cause": state.cause,
            }
            for vid, state in states.items()
        },
    }


def _feature_json(node) -> dict:
    return {
        "name": node.name,
        "kind": node.kind.value,
        "children": [_feature_json(child) for child in node.children],
    }


def _model_json(model: FamilyModel) -> dict:
    return {
        "name": model.name,
        "areas": list(model.areas),
        "variants": [
            {
                "id": v.id,
                "name": v.name,
                "question": v.question,
                "relation": v.relation.value,
                "mandatory": v.mandatory,
                "applicableAreas": sorted(v.applicable_areas, key=model.area_sort_key),
                "dependsOn": list(v.depends_on),
                "values": [
                    {"id": val.id, "name": val.name, "dependsOn": list(val.depends_on)}
                    for val in v.values
                ],
            }
            for v in model.variants
        ],
    }


@dataclass
class SessionRecord:
    id: str
    model_id: str
    session: Session
    created_at: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class VariabilityService:
    """Transport-independent request handling; the HTTP layer stays thin."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._models: dict[str, FamilyModel] = {}
        self._documents: dict[str, list[tuple[str, ModelDocument]]] = {}
        self._sessions: dict[str, SessionRecord] = {}

    # -- registry ----------------------------------------------------------

    def _model(self, model_id: str) -> FamilyModel:
        with self._lock:
            model = self._models.get(model_id)
        if model is None:
            raise ApiError(404, {"error": f"unknown model '{model_id}'"})
        return model

    def _session(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._sessions.get(session_id)
        if record is None:
            raise ApiError(404, {"error": f"unknown session '{session_id}'"})
        return record

    # -- endpoint bodies -----------------------------------------------------

    def post_model(self, body: bytes) -> tuple[int, dict]:
        try:
            model = parse_family_model(body)
        except FamvarError as exc:
            raise ApiError(422, {"diagnostics": _error_json(exc)})
        model_id = hashlib.sha256(serialize_family_model(model)).hexdigest()[:12]
        with self._lock:
            self._models[model_id] = model
            self._documents.setdefault(model_id, [])
        return 200, {"modelId": model_id, "diagnostics": []}

    def post_document(self, model_id: str, body: bytes) -> tuple[int, dict]:
        model = self._model(model_id)
        try:
            doc = parse_model_document(body)
        except FamvarError as exc:
            raise ApiError(422, {"diagnostics": _error_json(exc)})
        diagnostics = check_traces(doc, model)
        if diagnostics:
            raise ApiError(422, {"diagnostics": _diag_json(diagnostics)})
        doc_id = hashlib.sha256(serialize_model_document(doc)).hexdigest()[:12]
        with self._lock:
            docs = self._documents.setdefault(model_id, [])
            if all(existing_id != doc_id for existing_id, _ in docs):
                docs.append((doc_id, doc))
        return 200, {"documentId": doc_id, "diagnostics": []}

    def get_model(self, model_id: str) -> tuple[int, dict]:
        return 200, {"model": _model_json(self._model(model_id))}

    def get_features(self, model_id: str) -> tuple[int, dict]:
        model = self._model(model_id)
        return 200, {"features": _feature_json(derive.export_feature_tree(model))}

    def get_table(self, model_id: str) -> tuple[int, dict]:
        model = self._model(model_id)
        table = derive.derive_decision_table(model)
        return 200, {"entries": _entries_json(table.entries)}

    def post_session(self, payload: dict) -> tuple[int, dict]:
        model_id = payload.get("modelId")
        if not isinstance(model_id, str):
            raise ApiError(400, {"error": "modelId is required"})
        model = self._model(model_id)
        area = payload.get("area")
        if not isinstance(area, str):
            raise ApiError(400, {"error": "area is required"})
        pins = payload.get("pins", [])
        excludes = payload.get("excludes", [])
        for refs in (pins, excludes):
            if not isinstance(refs, list) or not all(isinstance(r, str) for r in refs):
                raise ApiError(400, {"error": "pins and excludes must be arrays of ids"})
        reqs = Requirements(area=area, pins=frozenset(pins), excludes=frozenset(excludes))
        try:
            customized, partial = apply_requirements(model, reqs)
            session = Session(customized, area, baseline=partial.states)
        except FamvarError as exc:
            raise ApiError(422, {"diagnostics": _error_json(exc)})
        session_id = secrets.token_urlsafe(16)
        record = SessionRecord(
            id=session_id, model_id=model_id, session=session, created_at=time.time()
        )
        with self._lock:
            self._sessions[session_id] = record
        return 200, {
            "sessionId": session_id,
            "reducedModel": serialize_family_model(customized).decode("utf-8"),
            "openDecisions": self._open_decisions(session),
            "configuration": _configuration_json(session.area, session.states),
        }

    def _open_decisions(self, session: Session) -> list[dict]:
        table = derive.derive_decision_table(session.model)
        open_table = derive.filter_decision_table(table, session.model, set(session.open_variants()))
        return _entries_json(open_table.entries)

    def get_decisions(self, session_id: str) -> tuple[int, dict]:
        record = self._session(session_id)
        with record.lock:
            return 200, {"openDecisions": self._open_decisions(record.session)}

    @staticmethod
    def _decision_from(payload: dict) -> Decision:
        action = payload.get("action")
        ref = payload.get("ref")
        if action not in ("include", "exclude") or not isinstance(ref, str):
            raise ApiError(400, {"error": "body must carry action include|exclude and a ref"})
        return Decision(action, ref)

    def post_decision(self, session_id: str, payload: dict) -> tuple[int, dict]:
        record = self._session(session_id)
        decision = self._decision_from(payload)
        with record.lock:
            try:
                consequences = record.session.apply_decision(decision)
            except FamvarError as exc:
                raise ApiError(422, {"diagnostics": _error_json(exc)})
            if any(c.kind is ConsequenceKind.CONFLICT for c in consequences):
                raise ApiError(409, {"consequences": _consequences_json(consequences)})
            return 200, {
                "consequences": _consequences_json(consequences),
                "openDecisions": self._open_decisions(record.session),
                "configuration": _configuration_json(record.session.area, record.session.states),
            }

    def post_preview(self, session_id: str, payload: dict) -> tuple[int, dict]:
        record = self._session(session_id)
        decision = self._decision_from(payload)
        with record.lock:
            try:
                consequences = record.session.preview_decision(decision)
            except FamvarError as exc:
                raise ApiError(422, {"diagnostics": _error_json(exc)})
        return 200, {"consequences": _consequences_json(consequences)}

    def delete_decision(self, session_id: str, ref: str) -> tuple[int, dict]:
        record = self._session(session_id)
        with record.lock:
            match = next((d for d in record.session.log if d.ref == ref), None)
            if match is None:
                raise ApiError(404, {"error": f"no decision on '{ref}' in the session log"})
            record.session.retract_decision(match)
            return 200, {
                "openDecisions": self._open_decisions(record.session),
                "configuration": _configuration_json(record.session.area, record.session.states),
            }

    def post_finalize(self, session_id: str) -> tuple[int, dict]:
        record = self._session(session_id)
        with record.lock:
            session = record.session
            if not session.is_complete():
                raise ApiError(409, {"openDecisions": self._open_decisions(session)})
            config = session.configuration()
            full_model = self._model(record.model_id)
            full_config = total_configuration(full_model, config)
            documents = []
            with self._lock:
                docs = list(self._documents.get(record.model_id, []))
            for _doc_id, doc in docs:
                customized = customize_document(doc, full_model, full_config)
                documents.append(
                    {"name": doc.name, "xml": serialize_model_document(customized).decode("utf-8")}
                )
            # the customized model is the session's reduced variant model;
            # the decisions themselves travel in the configuration
            model_xml = (
                serialize_family_model(session.model).decode("utf-8")
                if session.model.variants
                else None
            )
            return 200, {
                "configurationXml": serialize_configuration(config).decode("utf-8"),
                "customizedModelXml": model_xml,
                "customizedDocuments": documents,
            }


# ---------------------------------------------------------------------------
# HTTP plumbing
# ---------------------------------------------------------------------------

_ROUTES = [
    ("POST", re.compile(r"/models\Z"), "post_model_raw"),
    ("GET", re.compile(r"/models/([^/]+)\Z"), "get_model"),
    ("POST", re.compile(r"/models/([^/]+)/documents\Z"), "post_document_raw"),
    ("GET", re.compile(r"/models/([^/]+)/features\Z"), "get_features"),
    ("GET", re.compile(r"/models/([^/]+)/table\Z"), "get_table"),
    ("POST", re.compile(r"/sessions\Z"), "post_session_json"),
    ("GET", re.compile(r"/sessions/([^/]+)/decisions\Z"), "get_decisions"),
    ("POST", re.compile(r"/sessions/([^/]+)/decisions\Z"), "post_decision_json"),
    ("POST", re.compile(r"/sessions/([^/]+)/preview\Z"), "post_preview_json"),
    ("DELETE", re.compile(r"/sessions/([^/]+)/decisions/([^/]+)\Z"), "delete_decision"),
    ("POST", re.compile(r"/sessions/([^/]+)/finalize\Z"), "post_finalize"),
]

_UI_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def make_handler(service: VariabilityService, ui_dir: str | None = None):
    ui_root = Path(ui_dir).resolve() if ui_dir else None

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # tests stay quiet
            pass

        def _send(self, status: int, body: dict) -> None:
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _body(self) -> bytes:
            length = int(self.headers.get("Content-Length") or 0)
            return self.rfile.read(length) if length else b""

        def _json_body(self) -> dict:
            raw = self._body()
            try:
                payload = json.loads(raw.decode("utf-8")) if raw else {}
            except (ValueError, UnicodeDecodeError):
                raise ApiError(400, {"error": "request body is not valid JSON"})
            if not isinstance(payload, dict):
                raise ApiError(400, {"error": "request body must be a JSON object"})
            return payload

        def _dispatch(self, method: str) -> None:
            path = self.path.split("?", 1)[0]
            try:
                for route_method, pattern, name in _ROUTES:
                    if route_method != method:
                        continue
                    match = pattern.fullmatch(path)
                    if not match:
                        continue
                    status, body = self._invoke(name, match)
                    self._send(status, body)
                    return
                if method == "GET" and ui_root is not None and self._serve_static(path):
                    return
                self._send(404, {"error": f"no route for {method} {path}"})
            except ApiError as exc:
                self._send(exc.status, exc.body)

        def _invoke(self, name: str, match: re.Match) -> tuple[int, dict]:
            groups = match.groups()
            if name == "post_model_raw":
                return service.post_model(self._body())
            if name == "post_document_raw":
                return service.post_document(groups[0], self._body())
            if name == "post_session_json":
                return service.post_session(self._json_body())
            if name == "post_decision_json":
                return service.post_decision(groups[0], self._json_body())
            if name == "post_preview_json":
                return service.post_preview(groups[0], self._json_body())
            if name == "delete_decision":
                return service.delete_decision(groups[0], groups[1])
            if name == "post_finalize":
                return service.post_finalize(groups[0])
            return getattr(service, name)(*groups)

        def _serve_static(self, path: str) -> bool:
            rel = path.lstrip("/") or "index.html"
            target = (ui_root / rel).resolve()
            if not str(target).startswith(str(ui_root)) or not target.is_file():
                return False
            data = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", _UI_TYPES.get(target.suffix, "application/octet-stream"))
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
            return True

        def do_GET(self) -> None:
            self._dispatch("GET")

        def do_POST(self) -> None:
            self._dispatch("POST")

        def do_DELETE(self) -> None:
            self._dispatch("DELETE")

    return Handler


def make_server(port: int = 0, ui_dir: str | None = None) -> ThreadingHTTPServer:
    """Bound but not yet serving; port 0 picks a free port."""
    service = VariabilityService()
    return ThreadingHTTPServer(("127.0.0.1", port), make_handler(service, ui_dir))


def serve(port: int, ui_dir: str | None = None) -> None:
    server = ThreadingHTTPServer(("0.0.0.0", port), make_handler(VariabilityService(), ui_dir))
    print(f"famvar service listening on port {server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
