"""HTTP front end for the trainer: sessions, stimuli, answers, reports.

All request and response bodies are UTF-8 JSON except the WAV stimulus
and CSV report downloads.  Every error is shaped as
``{"error": message, "code": status}``.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import DomainError, GridtoneError, ValidationError
from .trainer import (
    DuplicateAnswerError,
    Trainer,
    UnknownItemError,
    UnknownSessionError,
)

_STATUS_BY_TYPE = (
    (DuplicateAnswerError, 409),
    (UnknownSessionError, 404),
    (UnknownItemError, 404),
    (ValidationError, 400),
    (DomainError, 400),
)


def _status_for(exc: GridtoneError) -> int:
    for kind, status in _STATUS_BY_TYPE:
        if isinstance(exc, kind):
            return status
    return 500


def _error_response(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, "code": status})


async def _json_body(request: Request) -> dict:
    try:
        body = await request.body()
        parsed = json.loads(body) if body else {}
    except json.JSONDecodeError as exc:
        raise ValidationError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(parsed, dict):
        raise ValidationError("request body must be a JSON object")
    return parsed


def create_app(trainer: Trainer | None = None) -> FastAPI:
    """Build the service around a trainer, creating a default one if needed."""
    if trainer is None:
        trainer = Trainer()
    app = FastAPI(title="gridtone trainer", docs_url=None, redoc_url=None)
    app.state.trainer = trainer
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(GridtoneError)
    async def _gridtone_error(_request: Request, exc: GridtoneError):
        return _error_response(_status_for(exc), str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request: Request, exc: StarletteHTTPException):
        return _error_response(exc.status_code, str(exc.detail))

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "sessions": len(trainer.sessions)}

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await _json_body(request)
        section = body.get("section")
        if not isinstance(section, int):
            raise ValidationError("body needs an integer section in 1..5")
        participant = body.get("participant") or {}
        if not isinstance(participant, dict):
            raise ValidationError("participant must be a JSON object")
        seed = body.get("seed")
        if seed is not None and not isinstance(seed, int):
            raise ValidationError("seed must be an integer when given")
        session = trainer.create_session(section, participant, seed=seed)
        return {
            "id": session.id,
            "section": session.section,
            "item_count": len(session.items),
            "created": session.created,
        }

    @app.get("/sessions/{session_id}/next")
    async def next_item(session_id: str):
        return trainer.next_item(session_id)

    @app.post("/sessions/{session_id}/answers")
    async def submit_answer(session_id: str, request: Request):
        body = await _json_body(request)
        item_id = body.get("item_id")
        if not isinstance(item_id, str):
            raise ValidationError("body needs an item_id string")
        if "answer" not in body:
            raise ValidationError("body needs an answer object")
        return trainer.submit_answer(session_id, item_id, body["answer"])

    @app.get("/sessions/{session_id}/report")
    async def session_report(session_id: str):
        return trainer.session_report(session_id)

    @app.get("/report.csv")
    async def report_csv():
        return Response(content=trainer.report_csv(), media_type="text/csv")

    @app.get("/stimuli/{digest}")
    async def stimulus(digest: str):
        return Response(content=trainer.stimulus(digest), media_type="audio/wav")

    return app


def serve(trainer: Trainer, port: int, host: str = "127.0.0.1") -> None:
    """Run the service until interrupted; uvicorn handles signals."""
    import uvicorn

    uvicorn.run(create_app(trainer), host=host, port=port, log_level="info")
