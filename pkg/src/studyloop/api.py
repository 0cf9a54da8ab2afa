"""HTTP surface of the study service.

Plain JSON endpoints; paths, verbs, and body schemas are documented in
docs/HTTP_API.md. Question views never include the answer key.
"""

from __future__ import annotations

from dataclasses import asdict
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.encoders import jsonable_encoder
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .course import manifest_to_dict
from .scheduler import InitialPassIncomplete
from .service import (
    InvalidWatchReport,
    NotFoundError,
    StaleQuestionError,
    StudyService,
)


class StartSessionBody(BaseModel):
    user_id: str
    course_id: str


class AnswerBody(BaseModel):
    question_id: str
    selected: list[bool]


class WatchBody(BaseModel):
    video_id: str
    from_s: int = Field(ge=0)
    to_s: int = Field(ge=0)
    action: Literal["play", "pause", "seek", "heartbeat"]


class SkipClickBody(BaseModel):
    video_id: str
    from_s: int = Field(ge=0)
    to_s: int = Field(ge=0)


class TimelineExpandBody(BaseModel):
    question_id: str


def create_app(service: StudyService, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="studyloop", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(NotFoundError)
    async def not_found(request: Request, exc: NotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": str(exc.args[0])})

    @app.exception_handler(StaleQuestionError)
    async def stale_question(request: Request, exc: StaleQuestionError) -> JSONResponse:
        return JSONResponse(
            status_code=409,
            content={"detail": str(exc), "current_question_id": exc.current},
        )

    @app.exception_handler(InitialPassIncomplete)
    async def pass_incomplete(request: Request, exc: InitialPassIncomplete) -> JSONResponse:
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(InvalidWatchReport)
    async def invalid_watch(request: Request, exc: InvalidWatchReport) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/courses/{course_id}")
    def get_course(course_id: str) -> dict:
        return manifest_to_dict(service.course(course_id))

    @app.post("/sessions", status_code=201)
    def start_session(body: StartSessionBody) -> dict:
        return jsonable_encoder(asdict(service.start_session(body.user_id, body.course_id)))

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return jsonable_encoder(asdict(service.session_view(session_id)))

    @app.get("/sessions/{session_id}/question")
    def get_current_question(session_id: str) -> dict:
        return jsonable_encoder(asdict(service.current_question(session_id)))

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: AnswerBody) -> dict:
        result = service.submit_answer(session_id, body.question_id, body.selected)
        return jsonable_encoder(asdict(result))

    @app.post("/sessions/{session_id}/watch")
    def report_watch(session_id: str, body: WatchBody) -> dict:
        regions = service.report_watch(
            session_id, body.video_id, body.from_s, body.to_s, body.action
        )
        return {"video_id": body.video_id, "regions": [asdict(r) for r in regions]}

    @app.get("/sessions/{session_id}/watch/{video_id}")
    def get_watch_regions(session_id: str, video_id: str) -> dict:
        regions = service.watch_regions(session_id, video_id)
        return {"video_id": video_id, "regions": [asdict(r) for r in regions]}

    @app.get("/sessions/{session_id}/timeline")
    def get_timeline(session_id: str) -> dict:
        entries = service.get_timeline(session_id)
        return {"entries": [jsonable_encoder(asdict(e)) for e in entries]}

    @app.get("/sessions/{session_id}/review")
    def get_review(session_id: str) -> dict:
        entries = service.get_review(session_id)
        return {"entries": [jsonable_encoder(asdict(e)) for e in entries]}

    @app.get("/sessions/{session_id}/skip-target")
    def get_skip_target(session_id: str, video_id: str, position_s: int) -> dict:
        return {"target_s": service.get_skip_target(session_id, video_id, position_s)}

    @app.post("/sessions/{session_id}/skip-clicks", status_code=204)
    def log_skip_click(session_id: str, body: SkipClickBody) -> None:
        service.log_skip_click(session_id, body.video_id, body.from_s, body.to_s)

    @app.post("/sessions/{session_id}/timeline-expansions", status_code=204)
    def log_timeline_expand(session_id: str, body: TimelineExpandBody) -> None:
        service.log_timeline_expand(session_id, body.question_id)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
