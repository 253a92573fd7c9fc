"""Instructor-facing reports over the interaction log.

Everything here is a pure function of a log snapshot: per-problem usage by
distinct students, survey proportions, FAQ clusters, and per-student
summaries.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Optional

from .event_log import (
    EventFilter,
    EventKind,
    EventLog,
    Phase,
    SurveyCategory,
    survey_payload,
)
from .llm_gateway import CompletionRequest, PromptMessage, Purpose, Role

FAQ_SIMILARITY_THRESHOLD = 0.85
FAQ_MIN_CLUSTER_SIZE = 2


@dataclass(frozen=True)
class ProblemUsage:
    problem_index: str
    pre_submission_askers: int
    feedback_requesters: int
    post_submission_askers: int


@dataclass(frozen=True)
class SurveyBreakdown:
    total: int
    per_category: dict[SurveyCategory, tuple[int, float]]  # count, percentage

    @property
    def empty(self) -> bool:
        return self.total == 0


@dataclass(frozen=True)
class FaqCluster:
    canonical_question: str
    member_count: int
    phase: Phase
    example_members: tuple[str, ...]


@dataclass(frozen=True)
class StudentSummary:
    student_id: str
    problems_touched: tuple[str, ...]
    questions_asked: int
    feedback_requests: int
    narrative: Optional[str] = None


def problem_usage(store: EventLog, homework_scope: list[str]) -> list[ProblemUsage]:
    """Distinct-student counts per problem (a student asking five pre-sub
    questions on one problem counts once)."""
    if not homework_scope:
        raise ValueError("homework scope must be non-empty")
    events = store.query()
    usages = []
    for problem in homework_scope:
        pre, feedback, post = set(), set(), set()
        for e in events:
            if e.problem_index != problem:
                continue
            if e.kind == EventKind.QUESTION_ASKED and e.phase == Phase.PRE_SUBMISSION:
                pre.add(e.student_id)
            elif e.kind == EventKind.QUESTION_ASKED and e.phase == Phase.POST_SUBMISSION:
                post.add(e.student_id)
            elif e.kind == EventKind.FEEDBACK_REQUESTED:
                feedback.add(e.student_id)
        usages.append(
            ProblemUsage(
                problem_index=problem,
                pre_submission_askers=len(pre),
                feedback_requesters=len(feedback),
                post_submission_askers=len(post),
            )
        )
    return usages


def survey_breakdown(
    store: EventLog, time_range: Optional[tuple[int, int]] = None
) -> SurveyBreakdown:
    events = store.query(
        EventFilter(kind=EventKind.SURVEY_ANSWERED, time_range=time_range)
    )
    counts = {cat: 0 for cat in SurveyCategory}
    for e in events:
        counts[SurveyCategory(survey_payload(e)["category"])] += 1
    total = len(events)
    per_category = {}
    for cat, count in counts.items():
        pct = round(100.0 * count / total, 1) if total else 0.0
        per_category[cat] = (count, pct)
    return SurveyBreakdown(total=total, per_category=per_category)


_NORM_WS_RE = re.compile(r"\s+")
_PUNCT_RE = re.compile(r"[^\w\s]")


def normalize_question(text: str) -> str:
    return _NORM_WS_RE.sub(" ", _PUNCT_RE.sub("", text.lower())).strip()


def extract_faqs(
    store: EventLog,
    phase: Phase,
    embedder,
    provider=None,
    min_cluster_size: int = FAQ_MIN_CLUSTER_SIZE,
    threshold: float = FAQ_SIMILARITY_THRESHOLD,
) -> list[FaqCluster]:
    """Single-link clustering of question texts at a cosine threshold.

    Deterministic: same log and embedder always produce the same clusters.
    The optional provider only rewrites each cluster's canonical question.
    """
    events = store.query(EventFilter(kind=EventKind.QUESTION_ASKED, phase=phase))
    questions = [e.payload for e in events]
    vectors = [embedder.embed(normalize_question(q)) for q in questions]

    # union-find over pairs above the similarity threshold
    parent = list(range(len(questions)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(questions)):
        if not vectors[i].searchable:
            continue
        for j in range(i + 1, len(questions)):
            if not vectors[j].searchable:
                continue
            dot = sum(a * b for a, b in zip(vectors[i].values, vectors[j].values))
            sim = dot / (vectors[i].norm * vectors[j].norm)
            if sim >= threshold:
                parent[find(i)] = find(j)

    groups: dict[int, list[str]] = {}
    for i in range(len(questions)):
        groups.setdefault(find(i), []).append(questions[i])

    clusters = []
    for members in groups.values():
        if len(members) < min_cluster_size:
            continue
        canonical = max(members, key=lambda q: (len(q), q))
        if provider is not None:
            canonical = _rewrite_canonical(provider, canonical, members)
        clusters.append(
            FaqCluster(
                canonical_question=canonical,
                member_count=len(members),
                phase=phase,
                example_members=tuple(members[:5]),
            )
        )
    clusters.sort(key=lambda c: (-c.member_count, c.canonical_question))
    return clusters


def _rewrite_canonical(provider, canonical: str, members: list[str]) -> str:
    request = CompletionRequest(
        messages=(
            PromptMessage(
                Role.SYSTEM,
                "Rewrite the representative student question below as one "
                "clear, well-formed question. Reply with the question only.",
            ),
            PromptMessage(Role.USER, canonical),
        ),
        purpose=Purpose.SUMMARY,
    )
    return provider.complete(request).text.strip() or canonical


def student_summary(
    store: EventLog, student_id: str, provider=None
) -> StudentSummary:
    events = store.query(EventFilter(student_id=student_id))
    problems = sorted({e.problem_index for e in events if e.problem_index})
    questions = [e for e in events if e.kind == EventKind.QUESTION_ASKED]
    feedback = [e for e in events if e.kind == EventKind.FEEDBACK_REQUESTED]
    narrative = None
    if provider is not None and events:
        transcript = "\n".join(
            f"[{e.kind.value} / {e.phase.value} / {e.problem_index}] {e.payload}"
            for e in events
        )
        request = CompletionRequest(
            messages=(
                PromptMessage(
                    Role.SYSTEM,
                    "Summarize this student's tutoring activity for their "
                    "instructor: topics of difficulty, progress, and needs.",
                ),
                PromptMessage(Role.USER, transcript),
            ),
            purpose=Purpose.LOG_SUMMARY,
        )
        narrative = provider.complete(request).text.strip()
    return StudentSummary(
        student_id=student_id,
        problems_touched=tuple(problems),
        questions_asked=len(questions),
        feedback_requests=len(feedback),
        narrative=narrative,
    )


# ---------------------------------------------------------------------------
# Report export
# ---------------------------------------------------------------------------


def usage_csv(usages: list[ProblemUsage]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["problem_index", "pre_submission_askers", "feedback_requesters", "post_submission_askers"]
    )
    for u in usages:
        writer.writerow(
            [u.problem_index, u.pre_submission_askers, u.feedback_requesters, u.post_submission_askers]
        )
    return buf.getvalue()


def survey_csv(breakdown: SurveyBreakdown) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["category", "count", "percentage"])
    for cat, (count, pct) in breakdown.per_category.items():
        writer.writerow([cat.value, count, pct])
    return buf.getvalue()


def faq_csv(clusters: list[FaqCluster]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["canonical_question", "member_count", "phase"])
    for c in clusters:
        writer.writerow([c.canonical_question, c.member_count, c.phase.value])
    return buf.getvalue()
