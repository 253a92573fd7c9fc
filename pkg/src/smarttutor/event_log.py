"""Append-only interaction log.

One event per line, tab-separated fields, with a length-prefixed escaped
payload so arbitrary text survives the round trip.  Events are never
mutated or deleted; analytics replays the file.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .errors import DuplicateEventError, InvalidSurvey

_FORMAT_VERSION = "v1"


class Phase(Enum):
    PRE_SUBMISSION = "PreSubmission"
    POST_SUBMISSION = "PostSubmission"


class EventKind(Enum):
    QUESTION_ASKED = "QuestionAsked"
    SUBMISSION_RECORDED = "SubmissionRecorded"
    FEEDBACK_REQUESTED = "FeedbackRequested"
    SURVEY_ANSWERED = "SurveyAnswered"


class SurveyCategory(Enum):
    HELPFUL = "Helpful"
    ALREADY_KNEW = "AlreadyKnew"
    ERRORS_IN_FEEDBACK = "ErrorsInFeedback"
    OTHER = "Other"


@dataclass(frozen=True)
class InteractionEvent:
    event_id: str
    occurred_at: int  # UTC milliseconds
    student_id: str
    problem_index: str
    phase: Phase
    kind: EventKind
    payload: str

    def __post_init__(self):
        if self.kind == EventKind.QUESTION_ASKED and not self.payload:
            raise ValueError("QuestionAsked events need a non-empty payload")


@dataclass(frozen=True)
class SurveyResponse:
    category: SurveyCategory
    student_id: str
    problem_index: str
    free_text: Optional[str] = None
    occurred_at: Optional[int] = None

    def __post_init__(self):
        if self.category == SurveyCategory.OTHER and not self.free_text:
            raise InvalidSurvey("category Other requires free_text")


def new_event(
    student_id: str,
    problem_index: str,
    phase: Phase,
    kind: EventKind,
    payload: str,
    occurred_at: Optional[int] = None,
) -> InteractionEvent:
    return InteractionEvent(
        event_id=uuid.uuid4().hex,
        occurred_at=occurred_at if occurred_at is not None else now_ms(),
        student_id=student_id,
        problem_index=problem_index,
        phase=phase,
        kind=kind,
        payload=payload,
    )


def now_ms() -> int:
    return int(time.time() * 1000)


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _encode(event: InteractionEvent) -> str:
    payload = _escape(event.payload)
    return "\t".join(
        [
            _FORMAT_VERSION,
            event.event_id,
            str(event.occurred_at),
            event.student_id,
            event.problem_index,
            event.phase.value,
            event.kind.value,
            f"{len(payload)}:{payload}",
        ]
    )


def _decode(line: str) -> InteractionEvent:
    parts = line.split("\t", 7)
    if len(parts) != 8 or parts[0] != _FORMAT_VERSION:
        raise ValueError(f"malformed log line: {line[:80]!r}")
    length_str, _, payload = parts[7].partition(":")
    if len(payload) != int(length_str):
        raise ValueError("payload length mismatch (truncated write?)")
    return InteractionEvent(
        event_id=parts[1],
        occurred_at=int(parts[2]),
        student_id=parts[3],
        problem_index=parts[4],
        phase=Phase(parts[5]),
        kind=EventKind(parts[6]),
        payload=_unescape(payload),
    )


@dataclass(frozen=True)
class EventFilter:
    student_id: Optional[str] = None
    problem_index: Optional[str] = None
    kind: Optional[EventKind] = None
    phase: Optional[Phase] = None
    time_range: Optional[tuple[int, int]] = None  # inclusive [start, end] ms

    def matches(self, event: InteractionEvent) -> bool:
        if self.student_id is not None and event.student_id != self.student_id:
            return False
        if self.problem_index is not None and event.problem_index != self.problem_index:
            return False
        if self.kind is not None and event.kind != self.kind:
            return False
        if self.phase is not None and event.phase != self.phase:
            return False
        if self.time_range is not None:
            start, end = self.time_range
            if not (start <= event.occurred_at <= end):
                return False
        return True


class EventLog:
    """Single-writer append-only store backed by one log file."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._events: list[InteractionEvent] = []
        self._ids: set[str] = set()
        self._last_ts = 0
        try:
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    event = _decode(line)
                    self._events.append(event)
                    self._ids.add(event.event_id)
                    self._last_ts = max(self._last_ts, event.occurred_at)
        except FileNotFoundError:
            pass
        self._fh = open(path, "a", encoding="utf-8")

    def append(self, event: InteractionEvent) -> InteractionEvent:
        """Durable before return; service-assigned timestamps never run backwards."""
        with self._lock:
            if event.event_id in self._ids:
                raise DuplicateEventError(f"event_id {event.event_id!r} already stored")
            if event.occurred_at < self._last_ts:
                event = replace(event, occurred_at=self._last_ts)
            self._last_ts = event.occurred_at
            self._fh.write(_encode(event) + "\n")
            self._fh.flush()
            self._events.append(event)
            self._ids.add(event.event_id)
            return event

    def query(self, flt: Optional[EventFilter] = None) -> list[InteractionEvent]:
        with self._lock:
            snapshot = list(self._events)
        if flt is not None:
            snapshot = [e for e in snapshot if flt.matches(e)]
        snapshot.sort(key=lambda e: (e.occurred_at, e.event_id))
        return snapshot

    def __len__(self) -> int:
        with self._lock:
            return len(self._events)

    def last_event_id(self) -> Optional[str]:
        with self._lock:
            return self._events[-1].event_id if self._events else None

    def export_text(self) -> str:
        with self._lock:
            return "\n".join(_encode(e) for e in self._events)

    def close(self) -> None:
        with self._lock:
            self._fh.close()


def record_survey(store: EventLog, response: SurveyResponse) -> InteractionEvent:
    """Surveys land in the same log as SurveyAnswered events; duplicates are
    allowed (students may answer once per problem session)."""
    payload = json.dumps(
        {"category": response.category.value, "free_text": response.free_text},
        ensure_ascii=False,
    )
    event = new_event(
        student_id=response.student_id,
        problem_index=response.problem_index,
        phase=Phase.POST_SUBMISSION,
        kind=EventKind.SURVEY_ANSWERED,
        payload=payload,
        occurred_at=response.occurred_at,
    )
    return store.append(event)


def survey_payload(event: InteractionEvent) -> dict:
    return json.loads(event.payload)
