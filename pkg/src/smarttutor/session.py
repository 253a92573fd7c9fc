"""Tutoring session state machine and grounded prompt assembly.

A session binds one student to one problem, tracks the pre/post-submission
phase, and runs every answer through the leak guard before the student
sees it.
"""

from __future__ import annotations

import re
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import context_store as cs
from .errors import EmptySubmission, UnknownProblem
from .event_log import EventKind, EventLog, Phase, new_event
from .llm_gateway import CompletionRequest, PromptMessage, Purpose, Role

LEAK_NGRAM_LEN = 12
REDACTION_TEXT = "[withheld — try deriving this step]"
MAX_QUESTION_CHARS = 8000
MAX_SUBMISSION_CHARS = 40000
SESSION_IDLE_TIMEOUT_S = 24 * 3600

SUBMISSION_BLOCK_HEADER = "=== STUDENT SUBMISSION ==="
NO_DISCLOSURE_DIRECTIVE = (
    "Never reveal, quote, or paraphrase the reference solution to the student. "
    "Use it only to check the student's reasoning and guide them."
)


class AssistanceLevel(Enum):
    METHOD_HINT = "MethodHint"
    STEP_BY_STEP = "StepByStep"
    OPEN_ENDED = "OpenEnded"


ASSISTANCE_DIRECTIVES = {
    AssistanceLevel.METHOD_HINT: (
        "Give high-level strategy only: name the applicable method and the "
        "general approach, without working through the specific numbers."
    ),
    AssistanceLevel.STEP_BY_STEP: (
        "Walk the student through the solution process in detailed, numbered "
        "steps, explaining the reasoning at each step."
    ),
    AssistanceLevel.OPEN_ENDED: (
        "Answer the student's question directly and conversationally, at the "
        "depth the question calls for."
    ),
}


class EquationFormat(Enum):
    LATEX = "LaTeX"
    PLAIN = "Plain"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Submission:
    text: str
    equation_format: EquationFormat = EquationFormat.PLAIN
    submitted_at: float = field(default_factory=time.time)

    def __post_init__(self):
        if not self.text.strip():
            raise EmptySubmission("submission text is empty")
        if len(self.text) > MAX_SUBMISSION_CHARS:
            raise ValueError(f"submission exceeds {MAX_SUBMISSION_CHARS} characters")


@dataclass(frozen=True)
class Question:
    text: str
    asked_at: float
    phase_at_ask: Phase

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("question text is empty")
        if len(self.text) > MAX_QUESTION_CHARS:
            raise ValueError(f"question exceeds {MAX_QUESTION_CHARS} characters")


class GuardStatus(Enum):
    CLEAN = "Clean"
    REDACTED = "Redacted"


@dataclass(frozen=True)
class Answer:
    text: str
    guard_status: GuardStatus
    context_doc_ids: tuple[str, ...] = ()


@dataclass
class Session:
    session_id: str
    student_id: str
    problem_index: str
    phase: Phase = Phase.PRE_SUBMISSION
    transcript: list[tuple[Question, Answer]] = field(default_factory=list)
    latest_submission: Optional[Submission] = None
    last_active: float = field(default_factory=time.time)

    @property
    def expired(self) -> bool:
        return time.time() - self.last_active > SESSION_IDLE_TIMEOUT_S

    def touch(self) -> None:
        self.last_active = time.time()


def start_session(student_id: str, problem_index: str, corpus: cs.Corpus) -> Session:
    if cs.lookup_exact(corpus, problem_index) is None:
        raise UnknownProblem(f"problem {problem_index!r} not in corpus")
    return Session(
        session_id=uuid.uuid4().hex,
        student_id=student_id,
        problem_index=problem_index,
    )


# ---------------------------------------------------------------------------
# Leak guard
# ---------------------------------------------------------------------------

_WORD_RE = re.compile(r"\S+")
_STRIP_PUNCT_RE = re.compile(r"[^a-z0-9]+")


def _tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Whitespace-split tokens normalized to lowercase alphanumerics, with the
    original character span of each surviving token."""
    tokens = []
    for m in _WORD_RE.finditer(text):
        norm = _STRIP_PUNCT_RE.sub("", m.group().lower())
        if norm:
            tokens.append((norm, m.start(), m.end()))
    return tokens


def tokenize(text: str) -> list[str]:
    return [t for t, _, _ in _tokenize_with_spans(text)]


def leak_guard(
    candidate_text: str,
    reference_solution: str,
    ngram_len: int = LEAK_NGRAM_LEN,
) -> tuple[str, GuardStatus]:
    """Redact any run of >= ngram_len contiguous reference-solution tokens.

    Short overlaps (method names, "KCL at node A") are legitimate tutoring
    language; long verbatim runs are disclosure and get replaced.
    """
    cand_tokens = _tokenize_with_spans(candidate_text)
    ref_tokens = tokenize(reference_solution)
    if len(cand_tokens) < ngram_len or len(ref_tokens) < ngram_len:
        return candidate_text, GuardStatus.CLEAN

    ref_grams = {
        tuple(ref_tokens[i : i + ngram_len])
        for i in range(len(ref_tokens) - ngram_len + 1)
    }
    flagged = [False] * len(cand_tokens)
    cand_norm = [t for t, _, _ in cand_tokens]
    for i in range(len(cand_norm) - ngram_len + 1):
        if tuple(cand_norm[i : i + ngram_len]) in ref_grams:
            for j in range(i, i + ngram_len):
                flagged[j] = True
    if not any(flagged):
        return candidate_text, GuardStatus.CLEAN

    # replace each maximal flagged span (by original char offsets) once
    pieces = []
    cursor = 0
    i = 0
    while i < len(cand_tokens):
        if flagged[i]:
            start = cand_tokens[i][1]
            while i < len(cand_tokens) and flagged[i]:
                end = cand_tokens[i][2]
                i += 1
            pieces.append(candidate_text[cursor:start])
            pieces.append(REDACTION_TEXT)
            cursor = end
        else:
            i += 1
    pieces.append(candidate_text[cursor:])
    return "".join(pieces), GuardStatus.REDACTED


# ---------------------------------------------------------------------------
# Prompt assembly
# ---------------------------------------------------------------------------


def assemble_prompt(
    session: Session,
    question: Question,
    record: cs.ProblemRecord,
    retrieved_context: list[cs.ContextDocument],
    assistance_level: AssistanceLevel = AssistanceLevel.OPEN_ENDED,
) -> CompletionRequest:
    parts = [
        "You are a patient tutor for an undergraduate circuit-analysis course. "
        "Help the student reason about the problem themselves.",
        ASSISTANCE_DIRECTIVES[assistance_level],
        NO_DISCLOSURE_DIRECTIVE,
        f"Problem {record.problem_index}:\n{record.statement}",
    ]
    if record.method_notes:
        parts.append(f"Instructor method notes:\n{record.method_notes}")
    # reference solution rides along as guarded grounding only
    parts.append(
        "Reference solution (for your eyes only, never to be shown):\n"
        + record.reference_solution
    )
    for doc in retrieved_context:
        parts.append(f"Context document {doc.doc_id}:\n{doc.body}")
    if session.phase == Phase.POST_SUBMISSION:
        assert session.latest_submission is not None
        parts.append(SUBMISSION_BLOCK_HEADER + "\n" + session.latest_submission.text)
    system = "\n\n".join(parts)
    return CompletionRequest(
        messages=(
            PromptMessage(Role.SYSTEM, system),
            PromptMessage(Role.USER, question.text),
        ),
        purpose=Purpose.QA,
    )


def ask_question(
    session: Session,
    text: str,
    corpus: cs.Corpus,
    index: cs.VectorIndex,
    embedder,
    provider,
    log: Optional[EventLog] = None,
    assistance_level: AssistanceLevel = AssistanceLevel.OPEN_ENDED,
    k: int = cs.DEFAULT_TOP_K,
    score_floor: float = cs.DEFAULT_SCORE_FLOOR,
) -> Answer:
    record = cs.lookup_exact(corpus, session.problem_index)
    if record is None:
        raise UnknownProblem(f"problem {session.problem_index!r} not in corpus")
    question = Question(text=text, asked_at=time.time(), phase_at_ask=session.phase)

    retrieved: list[cs.ContextDocument] = []
    if len(index) > 0:
        query = embedder.embed(text)
        if query.searchable:
            retrieved = [
                r.document
                for r in index.search_similar(query, k=k, min_score=score_floor)
            ]

    request = assemble_prompt(session, question, record, retrieved, assistance_level)
    result = provider.complete(request)
    guarded_text, status = leak_guard(result.text, record.reference_solution)
    answer = Answer(
        text=guarded_text,
        guard_status=status,
        context_doc_ids=tuple(d.doc_id for d in retrieved),
    )
    session.transcript.append((question, answer))
    session.touch()
    if log is not None:
        log.append(
            new_event(
                student_id=session.student_id,
                problem_index=session.problem_index,
                phase=question.phase_at_ask,
                kind=EventKind.QUESTION_ASKED,
                payload=text,
            )
        )
    return answer


def record_submission(
    session: Session,
    submission: Submission,
    log: Optional[EventLog] = None,
) -> Session:
    """PreSubmission -> PostSubmission; resubmission replaces the latest
    submission but never moves the phase backwards."""
    session.latest_submission = submission
    session.phase = Phase.POST_SUBMISSION
    session.touch()
    if log is not None:
        digest = submission.text[:200]
        log.append(
            new_event(
                student_id=session.student_id,
                problem_index=session.problem_index,
                phase=Phase.POST_SUBMISSION,
                kind=EventKind.SUBMISSION_RECORDED,
                payload=digest,
            )
        )
    return session
