"""HTTP facade over sessions, the object bank, and rendering.

Routes (JSON unless noted):
  POST /sessions                   create session {model, seed|codes}
  GET  /sessions/{id}              session resource
  POST /sessions/{id}/edits        apply one edit op (409 on write contention)
  GET  /sessions/{id}/render       PNG; ?layer=N returns a feature heatmap
  GET  /sessions/{id}/layout       parsed layout, 404 when none attached
  GET  /objects                    bank catalog
  GET  /objects/{id}/thumbnail     mask thumbnail PNG
  GET  /healthz                    liveness + counters

Every 4xx body is {"error": {"code": <enum>, "message": ...}} with codes
from ERROR_CODES. Renders carry an ETag equal to the session log digest,
so equal histories produce equal tags (and equal bytes on the toy model).
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass, field

import numpy as np
from fastapi import Body, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image

from .bank import ObjectBank
from .composer import apply_edit, attach_segmentation, validate_edit
from .demo import build_demo_segmentation
from .errors import LoganError, ScriptParseError, UnknownObjectError
from .imaging import feature_heatmap_png, image_to_png_bytes
from .masks import area_downsample
from .model import GeneratorModel, LatentCode
from .session import Session

ERROR_CODES = (
    "invalid_body",      # 400: malformed JSON or bad creation fields
    "unknown_model",     # 404: model ref not registered
    "unknown_session",   # 404: no such session id
    "unknown_object",    # 404/422: bank has no such object
    "no_layout",         # 404: session has no parsed layout
    "invalid_op",        # 422: edit fails schema or execution contract
    "bad_layer",         # 422: layer outside 1..L+1
    "busy",              # 409: another edit in flight on this session
    "session_limit",     # 429: max concurrent sessions reached
)

THUMBNAIL_SIZE = (96, 96)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        assert code in ERROR_CODES
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class _Entry:
    session: Session
    model_ref: str
    lock: threading.Lock = field(default_factory=threading.Lock)


def create_app(models: dict[str, GeneratorModel],
               bank: ObjectBank | None = None,
               max_sessions: int = 16) -> FastAPI:
    """Build the service app around registered models and a read-only bank."""
    app = FastAPI(title="logan-edit-service", docs_url=None, redoc_url=None)
    sessions: dict[str, _Entry] = {}
    registry_lock = threading.Lock()

    @app.exception_handler(ApiError)
    def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}})

    @app.exception_handler(RequestValidationError)
    def _body_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"code": "invalid_body", "message": str(exc)}})

    def _entry(session_id: str) -> _Entry:
        with registry_lock:
            if session_id not in sessions:
                raise ApiError(404, "unknown_session",
                               f"no session {session_id!r}")
            return sessions[session_id]

    def _resource(entry: _Entry) -> dict:
        s = entry.session
        return {
            "id": s.id,
            "status": "ready",
            "model": entry.model_ref,
            "log": list(s.log),
            "etag": s.log_digest(),
            "links": {
                "self": f"/sessions/{s.id}",
                "render": f"/sessions/{s.id}/render",
                "layout": f"/sessions/{s.id}/layout",
            },
        }

    @app.get("/healthz")
    def healthz() -> dict:
        with registry_lock:
            count = len(sessions)
        return {"status": "ok", "models": sorted(models),
                "sessions": count,
                "bank_objects": len(bank) if bank is not None else 0}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict = Body(...)) -> dict:
        allowed = {"model", "seed", "codes", "demo_segmentation"}
        unknown = set(body) - allowed
        if unknown:
            raise ApiError(400, "invalid_body",
                           f"unknown field {sorted(unknown)[0]!r}")
        ref = body.get("model")
        if not isinstance(ref, str):
            raise ApiError(400, "invalid_body", "field 'model' must be a string")
        if ref not in models:
            raise ApiError(404, "unknown_model", f"model {ref!r} not registered")
        model = models[ref]
        has_seed, has_codes = "seed" in body, "codes" in body
        if has_seed == has_codes:
            raise ApiError(400, "invalid_body",
                           "provide exactly one of 'seed' or 'codes'")
        try:
            if has_seed:
                if not isinstance(body["seed"], int):
                    raise ApiError(400, "invalid_body",
                                   "field 'seed' must be an integer")
                session = Session(model, seed=body["seed"])
            else:
                raw = body["codes"]
                if (not isinstance(raw, list)
                        or not all(isinstance(c, list) for c in raw)):
                    raise ApiError(400, "invalid_body",
                                   "field 'codes' must be a list of lists")
                codes = [LatentCode(i + 1, np.asarray(c, dtype=np.float64))
                         for i, c in enumerate(raw)]
                session = Session(model, base_codes=codes)
            if body.get("demo_segmentation"):
                attach_segmentation(
                    session, build_demo_segmentation(model.output_resolution))
        except ApiError:
            raise
        except (LoganError, TypeError, ValueError) as exc:
            raise ApiError(400, "invalid_body", str(exc)) from exc

        entry = _Entry(session, ref)
        with registry_lock:
            if len(sessions) >= max_sessions:
                raise ApiError(429, "session_limit",
                               f"at most {max_sessions} concurrent sessions")
            sessions[session.id] = entry
        return _resource(entry)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return _resource(_entry(session_id))

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, body: dict = Body(...)) -> dict:
        entry = _entry(session_id)
        try:
            edit = validate_edit(body)
        except ScriptParseError as exc:
            raise ApiError(422, "invalid_op", str(exc)) from exc
        if not entry.lock.acquire(blocking=False):
            raise ApiError(409, "busy",
                           "another edit is in flight on this session")
        try:
            apply_edit(entry.session, edit, bank)
            entry.session.ensure_current()  # synchronous: render before ack
        except UnknownObjectError as exc:
            raise ApiError(422, "unknown_object", str(exc)) from exc
        except LoganError as exc:
            raise ApiError(422, "invalid_op", str(exc)) from exc
        finally:
            entry.lock.release()
        return _resource(entry)

    @app.get("/sessions/{session_id}/render")
    def get_render(session_id: str, request: Request,
                   layer: int | None = None) -> Response:
        entry = _entry(session_id)
        session = entry.session
        model = session.model
        if layer is not None and not 1 <= layer <= model.layer_count + 1:
            raise ApiError(422, "bad_layer",
                           f"layer {layer} out of range 1..{model.layer_count + 1}")
        with entry.lock:
            etag = f'"{session.log_digest()}"'
            if request.headers.get("if-none-match") == etag:
                return Response(status_code=304, headers={"ETag": etag})
            if layer is None:
                png = image_to_png_bytes(session.render())
            else:
                png = feature_heatmap_png(session.features_at(layer),
                                          model.output_resolution)
        return Response(content=png, media_type="image/png",
                        headers={"ETag": etag})

    @app.get("/sessions/{session_id}/layout")
    def get_layout(session_id: str) -> dict:
        session = _entry(session_id).session
        if session.layout is None:
            raise ApiError(404, "no_layout",
                           "session has no segmentation-derived layout")
        low = session.fill.low_confidence if session.fill is not None else ()
        return {"layout": session.layout.to_dict(),
                "low_confidence": list(low)}

    @app.get("/objects")
    def list_objects() -> dict:
        objects = []
        if bank is not None:
            for asset in bank:
                objects.append({
                    "id": asset.id,
                    "category": asset.category,
                    "priority": asset.priority,
                    "layers": list(asset.layers),
                    "bbox": list(asset.bbox),
                    "canonical": list(asset.canonical_resolution),
                })
        return {"objects": objects}

    @app.get("/objects/{object_id}/thumbnail")
    def object_thumbnail(object_id: str) -> Response:
        if bank is None:
            raise ApiError(404, "unknown_object", "no bank configured")
        try:
            asset = bank.get(object_id)
        except UnknownObjectError as exc:
            raise ApiError(404, "unknown_object", str(exc)) from exc
        small = area_downsample(asset.mask, THUMBNAIL_SIZE)
        buf = io.BytesIO()
        Image.fromarray(np.round(small * 255.0).astype(np.uint8),
                        mode="L").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app


def demo_app() -> FastAPI:
    """Demo-scene wiring for ``uvicorn --factory logan.service:demo_app``."""
    # local import: demo pulls in the composer stack, which the bare
    # service does not need
    from .demo import DEMO_MODEL_REF, build_demo_bank, build_demo_session

    model, session = build_demo_session(DEMO_MODEL_REF)
    return create_app({DEMO_MODEL_REF: model}, bank=build_demo_bank(session))
