"""HTTP service composing the tutor modules.

Bearer pseudonymous tokens, JSON error envelope {code, message, retryable},
summary-only feedback by default, and one interaction event per accepted
student mutation.
"""

from __future__ import annotations

import json
import time
import uuid
from collections import defaultdict, deque
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from enum import Enum
from threading import Lock
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import analytics, context_store as cs, feedback as fb
from . import session as ts
from .config import ServiceConfig
from .errors import NoSubmission, RateLimited, TutorError
from .event_log import (
    EventLog,
    Phase,
    SurveyCategory,
    SurveyResponse,
    record_survey,
)
from .llm_gateway import HttpProvider, ScriptedProvider, load_script_file


class RoleKind(Enum):
    STUDENT = "Student"
    INSTRUCTOR = "Instructor"


@dataclass
class Registration:
    student_id: str  # pseudonymous bearer token
    display_alias: str
    registered_at: float
    role: RoleKind


@dataclass
class AppState:
    config: ServiceConfig
    corpus: cs.Corpus
    index: cs.VectorIndex
    embedder: cs.LocalHashEmbedder
    provider: object
    log: EventLog
    registrations: dict[str, Registration] = field(default_factory=dict)
    sessions: dict[str, ts.Session] = field(default_factory=dict)
    reports: dict[str, fb.FeedbackReport] = field(default_factory=dict)
    llm_request_times: dict[str, deque] = field(default_factory=lambda: defaultdict(deque))
    lock: Lock = field(default_factory=Lock)

    def check_rate_limit(self, token: str) -> None:
        limit = self.config.rate_limit_per_hour
        now = time.time()
        with self.lock:
            times = self.llm_request_times[token]
            while times and now - times[0] > 3600:
                times.popleft()
            if len(times) >= limit:
                raise RateLimited("LLM request budget exhausted; try again later")
            times.append(now)

    def save_registry(self) -> None:
        # identity-to-token mapping lives apart from the interaction log
        if not self.config.registry_path:
            return
        with open(self.config.registry_path, "w", encoding="utf-8") as fh:
            json.dump(
                {
                    token: {
                        "alias": r.display_alias,
                        "role": r.role.value,
                        "registered_at": r.registered_at,
                    }
                    for token, r in self.registrations.items()
                },
                fh,
            )


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, retryable: bool = False):
        self.status = status
        self.code = code
        self.message = message
        self.retryable = retryable


class RegisterBody(BaseModel):
    alias: str


class SessionBody(BaseModel):
    problem_index: str


class QuestionBody(BaseModel):
    text: str
    assistance_level: str = "OpenEnded"


class SubmissionBody(BaseModel):
    text: str
    equation_format: str = "Plain"


class SurveyBody(BaseModel):
    category: str
    free_text: Optional[str] = None


def build_state(config: ServiceConfig, provider=None) -> AppState:
    config.validate()
    corpus = cs.load_corpus(config.corpus_path)
    embedder = cs.LocalHashEmbedder(dim=config.embed_dim)
    index = cs.build_index(corpus, embedder)
    if provider is None:
        settings = config.provider
        if settings.kind == "scripted":
            script = load_script_file(settings.script_path) if settings.script_path else []
            provider = ScriptedProvider(script, max_retries=settings.max_retries)
        else:
            provider = HttpProvider(
                settings.endpoint, settings.model, max_retries=settings.max_retries
            )
    log = EventLog(config.log_store_path)
    return AppState(
        config=config,
        corpus=corpus,
        index=index,
        embedder=embedder,
        provider=provider,
        log=log,
    )


def create_app(config: ServiceConfig, provider=None) -> FastAPI:
    state = build_state(config, provider)

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        state.log.close()

    app = FastAPI(title="smarttutor", lifespan=lifespan)
    app.state.tutor = state

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "retryable": exc.retryable},
        )

    @app.exception_handler(TutorError)
    async def handle_tutor_error(_: Request, exc: TutorError):
        status = {
            "unknown_problem": 404,
            "no_submission": 409,
            "empty_submission": 400,
            "invalid_survey": 400,
            "rate_limited": 429,
        }.get(exc.code, 500)
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": exc.message, "retryable": exc.retryable},
        )

    def auth(authorization: Optional[str] = Header(default=None)) -> Registration:
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "unauthorized", "missing bearer token")
        token = authorization[len("Bearer "):]
        reg = state.registrations.get(token)
        if reg is None:
            raise ApiError(401, "unauthorized", "unknown token")
        return reg

    def instructor(reg: Registration = Depends(auth)) -> Registration:
        if reg.role != RoleKind.INSTRUCTOR:
            raise ApiError(403, "forbidden", "instructor role required")
        return reg

    def owned_session(session_id: str, reg: Registration) -> ts.Session:
        session = state.sessions.get(session_id)
        if session is None:
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        if session.student_id != reg.student_id:
            raise ApiError(403, "forbidden", "session belongs to another student")
        return session

    @app.post("/register", status_code=201)
    def register(body: RegisterBody):
        alias = body.alias.strip()
        if not alias:
            raise ApiError(400, "invalid_alias", "alias must be non-empty")
        token = uuid.uuid4().hex
        role = (
            RoleKind.INSTRUCTOR
            if alias in state.config.instructor_aliases
            else RoleKind.STUDENT
        )
        with state.lock:
            state.registrations[token] = Registration(
                student_id=token,
                display_alias=alias,
                registered_at=time.time(),
                role=role,
            )
            state.save_registry()
        return {"student_id": token, "role": role.value}

    @app.post("/sessions", status_code=201)
    def start_session(body: SessionBody, reg: Registration = Depends(auth)):
        session = ts.start_session(reg.student_id, body.problem_index, state.corpus)
        state.sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "problem_index": session.problem_index,
            "phase": session.phase.value,
        }

    @app.post("/sessions/{session_id}/questions")
    def ask(session_id: str, body: QuestionBody, reg: Registration = Depends(auth)):
        session = owned_session(session_id, reg)
        try:
            level = ts.AssistanceLevel(body.assistance_level)
        except ValueError:
            raise ApiError(400, "invalid_assistance_level", body.assistance_level)
        if not body.text.strip():
            raise ApiError(400, "empty_question", "question text must be non-empty")
        state.check_rate_limit(reg.student_id)
        answer = ts.ask_question(
            session,
            body.text,
            state.corpus,
            state.index,
            state.embedder,
            state.provider,
            log=state.log,
            assistance_level=level,
            k=state.config.retrieval_k,
            score_floor=state.config.retrieval_floor,
        )
        return {
            "answer": answer.text,
            "guard_status": answer.guard_status.value,
            "context_doc_ids": list(answer.context_doc_ids),
            "phase": session.phase.value,
        }

    @app.post("/sessions/{session_id}/submission")
    def submit(session_id: str, body: SubmissionBody, reg: Registration = Depends(auth)):
        session = owned_session(session_id, reg)
        try:
            eq_format = ts.EquationFormat(body.equation_format)
        except ValueError:
            raise ApiError(400, "invalid_equation_format", body.equation_format)
        submission = ts.Submission(text=body.text, equation_format=eq_format)
        ts.record_submission(session, submission, log=state.log)
        return {"phase": session.phase.value}

    @app.post("/sessions/{session_id}/feedback", status_code=201)
    def request_feedback(session_id: str, reg: Registration = Depends(auth)):
        session = owned_session(session_id, reg)
        state.check_rate_limit(reg.student_id)
        report = fb.evaluate_submission(session, state.corpus, state.provider, log=state.log)
        state.reports[session_id] = report
        return {"summary": fb.render_feedback(report, fb.DetailLevel.SUMMARY_ONLY)}

    @app.get("/sessions/{session_id}/feedback")
    def get_feedback(
        session_id: str,
        detail: str = Query(default="summary"),
        reg: Registration = Depends(auth),
    ):
        session = owned_session(session_id, reg)
        report = state.reports.get(session_id)
        if report is None:
            raise NoSubmission("no feedback generated for this session yet")
        # summary-only unless the request explicitly asks for the breakdown
        if detail == "full":
            return {
                "summary": report.summary,
                "reports": [
                    {
                        "metric": r.metric.value,
                        "heading": fb.METRIC_HEADINGS[r.metric],
                        "verdict": r.verdict.value,
                        "explanation": r.explanation,
                    }
                    for r in report.reports
                ],
                "rendered": fb.render_feedback(report, fb.DetailLevel.FULL),
            }
        return {"summary": fb.render_feedback(report, fb.DetailLevel.SUMMARY_ONLY)}

    @app.post("/sessions/{session_id}/survey", status_code=201)
    def survey(session_id: str, body: SurveyBody, reg: Registration = Depends(auth)):
        session = owned_session(session_id, reg)
        try:
            category = SurveyCategory(body.category)
        except ValueError:
            raise ApiError(400, "invalid_survey", f"unknown category {body.category!r}")
        response = SurveyResponse(
            category=category,
            student_id=reg.student_id,
            problem_index=session.problem_index,
            free_text=body.free_text,
        )
        record_survey(state.log, response)
        return {"recorded": True}

    @app.get("/analytics/problems")
    def analytics_problems(
        homework: Optional[str] = Query(default=None),
        _: Registration = Depends(instructor),
    ):
        scope = (
            [p.strip() for p in homework.split(",") if p.strip()]
            if homework
            else sorted(state.corpus.records)
        )
        usages = analytics.problem_usage(state.log, scope)
        return {
            "problems": [
                {
                    "problem_index": u.problem_index,
                    "pre_submission_askers": u.pre_submission_askers,
                    "feedback_requesters": u.feedback_requesters,
                    "post_submission_askers": u.post_submission_askers,
                }
                for u in usages
            ],
            "snapshot_event_id": state.log.last_event_id(),
        }

    @app.get("/analytics/survey")
    def analytics_survey(_: Registration = Depends(instructor)):
        breakdown = analytics.survey_breakdown(state.log)
        return {
            "total": breakdown.total,
            "empty": breakdown.empty,
            "per_category": {
                cat.value: {"count": count, "percentage": pct}
                for cat, (count, pct) in breakdown.per_category.items()
            },
        }

    @app.get("/analytics/faqs")
    def analytics_faqs(
        phase: str = Query(default="PreSubmission"),
        _: Registration = Depends(instructor),
    ):
        try:
            phase_enum = Phase(phase)
        except ValueError:
            raise ApiError(400, "invalid_phase", phase)
        clusters = analytics.extract_faqs(
            state.log,
            phase_enum,
            state.embedder,
            threshold=state.config.faq_threshold,
        )
        return {
            "clusters": [
                {
                    "canonical_question": c.canonical_question,
                    "member_count": c.member_count,
                    "phase": c.phase.value,
                    "example_members": list(c.example_members),
                }
                for c in clusters
            ]
        }

    @app.get("/analytics/students/{student_id}")
    def analytics_student(student_id: str, _: Registration = Depends(instructor)):
        summary = analytics.student_summary(state.log, student_id)
        return {
            "student_id": summary.student_id,
            "problems_touched": list(summary.problems_touched),
            "questions_asked": summary.questions_asked,
            "feedback_requests": summary.feedback_requests,
            "narrative": summary.narrative,
        }

    return app
