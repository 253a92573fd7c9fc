"""Multi-round homework feedback.

Four independent metric rounds (final answer & arithmetic, completeness,
method, units) followed by one summarization round.  The summary is the
default student-facing view; the per-metric breakdown is served on request.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum

from . import context_store as cs
from .errors import NoSubmission, UnknownProblem
from .event_log import EventKind, EventLog, Phase, new_event
from .llm_gateway import CompletionRequest, PromptMessage, Purpose, Role
from .session import Session


class Metric(Enum):
    FINAL_ANSWER_ARITHMETIC = "FinalAnswerArithmetic"
    COMPLETENESS = "Completeness"
    METHOD = "Method"
    UNITS = "Units"


# canonical evaluation and rendering order
METRIC_ORDER = (
    Metric.FINAL_ANSWER_ARITHMETIC,
    Metric.COMPLETENESS,
    Metric.METHOD,
    Metric.UNITS,
)

METRIC_HEADINGS = {
    Metric.FINAL_ANSWER_ARITHMETIC: "Final Answer & Arithmetic Accuracy",
    Metric.COMPLETENESS: "Completeness",
    Metric.METHOD: "Method",
    Metric.UNITS: "Units",
}

METRIC_DIRECTIVES = {
    Metric.FINAL_ANSWER_ARITHMETIC: (
        "Evaluate whether the student's final answer is correct and check for "
        "arithmetic errors throughout the solution. If you find an error, "
        "identify it and explain it."
    ),
    Metric.COMPLETENESS: (
        "Determine whether the student has fully answered all sub-questions "
        "in the problem."
    ),
    Metric.METHOD: (
        "Assess whether the student has applied the correct problem-solving "
        "method, regardless of arithmetic or typographical errors."
    ),
    Metric.UNITS: (
        "Verify that every quantity carries correct units; flag omitted or "
        "incorrect units."
    ),
}

REPLY_FORMAT_DIRECTIVE = (
    "Reply in exactly this format: the first line must be 'VERDICT: PASS' or "
    "'VERDICT: ISSUE', and the remaining lines explain your assessment."
)


class Verdict(Enum):
    PASS = "Pass"
    ISSUE = "Issue"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class MetricReport:
    metric: Metric
    verdict: Verdict
    explanation: str


@dataclass(frozen=True)
class FeedbackReport:
    reports: tuple[MetricReport, ...]
    summary: str
    created_at: float

    def __post_init__(self):
        if tuple(r.metric for r in self.reports) != METRIC_ORDER:
            raise ValueError("reports must cover all four metrics in canonical order")
        if not self.summary:
            raise ValueError("summary must be non-empty")


def parse_metric_output(raw: str, metric: Metric) -> MetricReport:
    """Total function: anything off-format becomes Indeterminate with the raw
    text preserved as the explanation."""
    lines = raw.strip().splitlines()
    if lines:
        first = lines[0].strip().upper()
        explanation = "\n".join(lines[1:]).strip()
        if first == "VERDICT: PASS":
            return MetricReport(metric, Verdict.PASS, explanation)
        if first == "VERDICT: ISSUE" and explanation:
            # an Issue verdict must come with an explanation
            return MetricReport(metric, Verdict.ISSUE, explanation)
    return MetricReport(metric, Verdict.INDETERMINATE, raw)


def _metric_request(record: cs.ProblemRecord, submission_text: str, metric: Metric) -> CompletionRequest:
    system = "\n\n".join(
        [
            "You are grading one aspect of a student's circuit-analysis "
            "homework solution.",
            METRIC_DIRECTIVES[metric],
            REPLY_FORMAT_DIRECTIVE,
            f"Problem {record.problem_index}:\n{record.statement}",
            f"Reference solution:\n{record.reference_solution}",
            f"Instructor method notes:\n{record.method_notes}" if record.method_notes else "",
        ]
    ).strip()
    return CompletionRequest(
        messages=(
            PromptMessage(Role.SYSTEM, system),
            PromptMessage(Role.USER, f"Student submission:\n{submission_text}"),
        ),
        purpose=Purpose.METRIC_EVAL,
    )


def _summary_request(raw_outputs: dict[Metric, str]) -> CompletionRequest:
    body = "\n\n".join(
        f"[{METRIC_HEADINGS[m]}]\n{raw_outputs[m]}" for m in METRIC_ORDER
    )
    return CompletionRequest(
        messages=(
            PromptMessage(
                Role.SYSTEM,
                "Summarize the following four feedback assessments into a "
                "short, encouraging note for the student. Lead with what is "
                "correct, then the most important fixes.",
            ),
            PromptMessage(Role.USER, body),
        ),
        purpose=Purpose.SUMMARY,
    )


def evaluate_submission(
    session: Session,
    corpus: cs.Corpus,
    provider,
    log: EventLog | None = None,
) -> FeedbackReport:
    """Exactly 5 provider calls: one per metric, then one summary.  Metric
    rounds are independent; only the summary sees all four raw outputs."""
    if session.phase != Phase.POST_SUBMISSION or session.latest_submission is None:
        raise NoSubmission("feedback requires a prior submission")
    record = cs.lookup_exact(corpus, session.problem_index)
    if record is None:
        raise UnknownProblem(f"problem {session.problem_index!r} not in corpus")

    submission_text = session.latest_submission.text
    raw_outputs: dict[Metric, str] = {}
    reports = []
    for metric in METRIC_ORDER:
        result = provider.complete(_metric_request(record, submission_text, metric))
        raw_outputs[metric] = result.text
        reports.append(parse_metric_output(result.text, metric))

    summary_result = provider.complete(_summary_request(raw_outputs))
    summary = summary_result.text.strip() or "(no summary produced)"

    report = FeedbackReport(
        reports=tuple(reports), summary=summary, created_at=time.time()
    )
    if log is not None:
        log.append(
            new_event(
                student_id=session.student_id,
                problem_index=session.problem_index,
                phase=Phase.POST_SUBMISSION,
                kind=EventKind.FEEDBACK_REQUESTED,
                payload=summary,
            )
        )
    return report


class DetailLevel(Enum):
    SUMMARY_ONLY = "SummaryOnly"
    FULL = "Full"


def render_feedback(report: FeedbackReport, detail: DetailLevel = DetailLevel.SUMMARY_ONLY) -> str:
    if detail == DetailLevel.SUMMARY_ONLY:
        return report.summary
    sections = [report.summary]
    for metric_report in report.reports:
        heading = METRIC_HEADINGS[metric_report.metric]
        sections.append(
            f"## {heading} — {metric_report.verdict.value}\n{metric_report.explanation}"
        )
    return "\n\n".join(sections)
