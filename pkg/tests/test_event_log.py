import random
import threading

import pytest

from smarttutor.errors import DuplicateEventError, InvalidSurvey
from smarttutor.event_log import (
    EventFilter,
    EventKind,
    EventLog,
    InteractionEvent,
    Phase,
    SurveyCategory,
    SurveyResponse,
    new_event,
    record_survey,
    survey_payload,
)


def make_event(i, student="s1", problem="2.5-1", kind=EventKind.QUESTION_ASKED,
               phase=Phase.PRE_SUBMISSION, ts=None):
    return InteractionEvent(
        event_id=f"ev{i:06d}",
        occurred_at=ts if ts is not None else 1000 + i,
        student_id=student,
        problem_index=problem,
        phase=phase,
        kind=kind,
        payload=f"question {i}",
    )


class TestAppend:
    def test_read_your_write(self, log):
        log.append(make_event(1))
        assert [e.event_id for e in log.query()] == ["ev000001"]

    def test_duplicate_event_id_rejected(self, log):
        log.append(make_event(1))
        with pytest.raises(DuplicateEventError):
            log.append(make_event(1))

    def test_10k_appends_counted(self, log):
        for i in range(10_000):
            log.append(make_event(i))
        assert len(log.query()) == 10_000

    def test_payload_round_trip_with_control_chars(self, tmp_path):
        path = str(tmp_path / "weird.log")
        store = EventLog(path)
        payload = "line1\nline2\ttabbed\\escaped\rreturn"
        event = InteractionEvent(
            "e1", 1, "s", "p", Phase.PRE_SUBMISSION, EventKind.QUESTION_ASKED, payload
        )
        store.append(event)
        store.close()
        reopened = EventLog(path)
        assert reopened.query()[0].payload == payload
        reopened.close()


class TestDurability:
    def test_close_reopen_identical_sequence(self, tmp_path):
        path = str(tmp_path / "durable.log")
        store = EventLog(path)
        events = [store.append(make_event(i)) for i in range(500)]
        store.close()
        reopened = EventLog(path)
        assert reopened.query() == sorted(events, key=lambda e: (e.occurred_at, e.event_id))
        reopened.close()

    def test_concurrent_appends_lose_nothing(self, tmp_path):
        path = str(tmp_path / "concurrent.log")
        store = EventLog(path)
        per_writer = 100
        errors = []

        def writer(w):
            try:
                for i in range(per_writer):
                    store.append(make_event(w * per_writer + i, student=f"w{w}"))
            except Exception as exc:
                errors.append(exc)

        threads = [threading.Thread(target=writer, args=(w,)) for w in range(16)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len(store.query()) == 16 * per_writer
        store.close()
        reopened = EventLog(path)
        assert len(reopened.query()) == 16 * per_writer
        reopened.close()


class TestQuery:
    def _populate(self, log):
        log.append(make_event(1, student="a", phase=Phase.PRE_SUBMISSION))
        log.append(make_event(2, student="b", phase=Phase.POST_SUBMISSION))
        log.append(make_event(3, student="a", kind=EventKind.SUBMISSION_RECORDED,
                              phase=Phase.POST_SUBMISSION))
        log.append(make_event(4, student="a", problem="3.4-4"))

    def test_empty_filter_returns_everything(self, log):
        self._populate(log)
        assert len(log.query()) == 4
        assert len(log.query(EventFilter())) == 4

    def test_kind_and_phase_filter(self, log):
        self._populate(log)
        got = log.query(EventFilter(kind=EventKind.QUESTION_ASKED, phase=Phase.PRE_SUBMISSION))
        assert {e.event_id for e in got} == {"ev000001", "ev000004"}

    def test_filter_matching_nothing(self, log):
        self._populate(log)
        assert log.query(EventFilter(student_id="nobody")) == []

    def test_filter_equals_brute_force_scan(self, log):
        rng = random.Random(3)
        for i in range(300):
            log.append(make_event(
                i,
                student=rng.choice(["a", "b", "c"]),
                problem=rng.choice(["2.5-1", "3.4-4"]),
                kind=rng.choice(list(EventKind)),
                phase=rng.choice(list(Phase)),
                ts=1000 + rng.randint(0, 50),
            ))
        flt = EventFilter(student_id="b", phase=Phase.POST_SUBMISSION,
                          time_range=(1010, 1040))
        everything = log.query()
        expected = sorted(
            (e for e in everything
             if e.student_id == "b" and e.phase == Phase.POST_SUBMISSION
             and 1010 <= e.occurred_at <= 1040),
            key=lambda e: (e.occurred_at, e.event_id),
        )
        assert log.query(flt) == expected

    def test_sorted_by_time_then_id(self, log):
        log.append(make_event(2, ts=5000))
        log.append(make_event(1, ts=5000))
        got = log.query()
        assert [e.event_id for e in got] == ["ev000001", "ev000002"]


class TestTimestamps:
    def test_timestamps_never_run_backwards(self, log):
        first = log.append(make_event(1, ts=9000))
        second = log.append(make_event(2, ts=100))  # stale client clock
        assert second.occurred_at >= first.occurred_at


class TestSurvey:
    def test_helpful_recorded_and_retrievable(self, log):
        record_survey(log, SurveyResponse(
            category=SurveyCategory.HELPFUL, student_id="s1", problem_index="2.5-1"
        ))
        events = log.query(EventFilter(kind=EventKind.SURVEY_ANSWERED))
        assert len(events) == 1
        assert survey_payload(events[0])["category"] == "Helpful"

    def test_other_with_free_text_stored(self, log):
        text = "tutor said my correct answer was incorrect"
        record_survey(log, SurveyResponse(
            category=SurveyCategory.OTHER, student_id="s1",
            problem_index="2.5-1", free_text=text,
        ))
        event = log.query(EventFilter(kind=EventKind.SURVEY_ANSWERED))[0]
        assert survey_payload(event)["free_text"] == text

    def test_other_without_text_rejected(self):
        with pytest.raises(InvalidSurvey):
            SurveyResponse(category=SurveyCategory.OTHER, student_id="s1",
                           problem_index="2.5-1")

    def test_duplicate_surveys_allowed_as_separate_events(self, log):
        for _ in range(2):
            record_survey(log, SurveyResponse(
                category=SurveyCategory.HELPFUL, student_id="s1",
                problem_index="2.5-1",
            ))
        assert len(log.query(EventFilter(kind=EventKind.SURVEY_ANSWERED))) == 2


class TestExport:
    def test_export_replays_to_same_events(self, tmp_path, log):
        for i in range(10):
            log.append(make_event(i))
        text = log.export_text()
        path = tmp_path / "replayed.log"
        path.write_text(text + "\n")
        replayed = EventLog(str(path))
        assert replayed.query() == log.query()
        replayed.close()
