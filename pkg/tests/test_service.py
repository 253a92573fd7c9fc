import pytest
from fastapi.testclient import TestClient

from conftest import HW1_CORPUS_PATH
from smarttutor.config import ServiceConfig
from smarttutor.errors import ConfigError
from smarttutor.llm_gateway import ScriptedProvider
from smarttutor.service import create_app

FEEDBACK_SCRIPT = [
    "VERDICT: PASS\nArithmetic is correct.",
    "VERDICT: PASS\nAll parts answered.",
    "VERDICT: PASS\nCurrent division applied correctly.",
    "VERDICT: ISSUE\nCurrent i1 is missing its unit.",
    "Well done; add the missing unit on i1.",
]


@pytest.fixture
def provider():
    return ScriptedProvider()


@pytest.fixture
def client(tmp_path, provider):
    config = ServiceConfig(
        corpus_path=HW1_CORPUS_PATH,
        log_store_path=str(tmp_path / "events.log"),
        instructor_aliases=["prof"],
        registry_path=str(tmp_path / "registry.json"),
    )
    app = create_app(config, provider=provider)
    with TestClient(app) as c:
        yield c


def register(client, alias="student-a"):
    resp = client.post("/register", json={"alias": alias})
    assert resp.status_code == 201
    return resp.json()["student_id"]


def auth(token):
    return {"Authorization": f"Bearer {token}"}


class TestRegistration:
    def test_register_issues_token(self, client):
        resp = client.post("/register", json={"alias": "student-a"})
        assert resp.status_code == 201
        body = resp.json()
        assert body["student_id"]
        assert body["role"] == "Student"

    def test_51_registrations_distinct_tokens(self, client):
        tokens = {register(client, f"s{i}") for i in range(51)}
        assert len(tokens) == 51

    def test_empty_alias_400(self, client):
        resp = client.post("/register", json={"alias": "  "})
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalid_alias"

    def test_instructor_allowlist(self, client):
        resp = client.post("/register", json={"alias": "prof"})
        assert resp.json()["role"] == "Instructor"


class TestSessions:
    def test_create_session_201(self, client):
        token = register(client)
        resp = client.post("/sessions", json={"problem_index": "2.5-1"},
                           headers=auth(token))
        assert resp.status_code == 201
        assert resp.json()["phase"] == "PreSubmission"

    def test_unknown_problem_404(self, client):
        token = register(client)
        resp = client.post("/sessions", json={"problem_index": "9.9-9"},
                           headers=auth(token))
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknown_problem"

    def test_missing_token_401(self, client):
        resp = client.post("/sessions", json={"problem_index": "2.5-1"})
        assert resp.status_code == 401

    def test_foreign_session_403(self, client, provider):
        token_a = register(client, "a")
        token_b = register(client, "b")
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token_a)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/submission",
                           json={"text": "x"}, headers=auth(token_b))
        assert resp.status_code == 403


class TestQuestionFlow:
    def test_ask_question(self, client, provider):
        provider.load("Start from KCL at the top node.")
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/questions",
                           json={"text": "how do I begin?",
                                 "assistance_level": "MethodHint"},
                           headers=auth(token))
        assert resp.status_code == 200
        body = resp.json()
        assert body["answer"] == "Start from KCL at the top node."
        assert body["guard_status"] == "Clean"
        assert body["phase"] == "PreSubmission"

    def test_invalid_assistance_level_400(self, client):
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/questions",
                           json={"text": "q", "assistance_level": "Psychic"},
                           headers=auth(token))
        assert resp.status_code == 400


class TestFeedbackFlow:
    def _submitted_session(self, client, token):
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/submission",
                           json={"text": "i1 = 3, i2 = 2 A", "equation_format": "Plain"},
                           headers=auth(token))
        assert resp.json()["phase"] == "PostSubmission"
        return session_id

    def test_feedback_without_submission_409(self, client):
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/feedback", headers=auth(token))
        assert resp.status_code == 409
        assert resp.json()["code"] == "no_submission"

    def test_default_view_is_summary_only(self, client, provider):
        provider.load(*FEEDBACK_SCRIPT)
        token = register(client)
        session_id = self._submitted_session(client, token)
        client.post(f"/sessions/{session_id}/feedback", headers=auth(token))
        resp = client.get(f"/sessions/{session_id}/feedback", headers=auth(token))
        body = resp.json()
        assert body["summary"] == FEEDBACK_SCRIPT[4]
        assert "reports" not in body

    def test_full_detail_on_request(self, client, provider):
        provider.load(*FEEDBACK_SCRIPT)
        token = register(client)
        session_id = self._submitted_session(client, token)
        client.post(f"/sessions/{session_id}/feedback", headers=auth(token))
        resp = client.get(f"/sessions/{session_id}/feedback?detail=full",
                          headers=auth(token))
        body = resp.json()
        assert len(body["reports"]) == 4
        assert [r["metric"] for r in body["reports"]] == [
            "FinalAnswerArithmetic", "Completeness", "Method", "Units",
        ]
        assert body["reports"][3]["verdict"] == "Issue"

    def test_empty_submission_400(self, client):
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/submission",
                           json={"text": "   "}, headers=auth(token))
        assert resp.status_code == 400


class TestSurveyFlow:
    def test_survey_recorded(self, client, provider):
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/survey",
                           json={"category": "Helpful"}, headers=auth(token))
        assert resp.status_code == 201

    def test_other_without_text_400(self, client):
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        resp = client.post(f"/sessions/{session_id}/survey",
                           json={"category": "Other"}, headers=auth(token))
        assert resp.status_code == 400


class TestAnalyticsEndpoints:
    def test_student_token_403(self, client):
        token = register(client)
        resp = client.get("/analytics/problems", headers=auth(token))
        assert resp.status_code == 403

    def test_instructor_reads_usage(self, client, provider):
        provider.load("answer one")
        student = register(client, "student-a")
        instructor = register(client, "prof")
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(student)).json()["session_id"]
        client.post(f"/sessions/{session_id}/questions",
                    json={"text": "help"}, headers=auth(student))
        resp = client.get("/analytics/problems?homework=2.5-1,3.4-4",
                          headers=auth(instructor))
        assert resp.status_code == 200
        problems = {p["problem_index"]: p for p in resp.json()["problems"]}
        assert problems["2.5-1"]["pre_submission_askers"] == 1
        assert problems["3.4-4"]["pre_submission_askers"] == 0

    def test_survey_and_faq_endpoints(self, client, provider):
        instructor = register(client, "prof")
        resp = client.get("/analytics/survey", headers=auth(instructor))
        assert resp.json()["empty"] is True
        resp = client.get("/analytics/faqs?phase=PreSubmission",
                          headers=auth(instructor))
        assert resp.json()["clusters"] == []

    def test_student_summary_endpoint(self, client, provider):
        provider.load("answer")
        student = register(client, "student-a")
        instructor = register(client, "prof")
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(student)).json()["session_id"]
        client.post(f"/sessions/{session_id}/questions",
                    json={"text": "help me"}, headers=auth(student))
        resp = client.get(f"/analytics/students/{student}", headers=auth(instructor))
        assert resp.json()["questions_asked"] == 1


class TestEventCompleteness:
    def test_every_mutation_logged_once(self, client, provider):
        provider.load("a1", *FEEDBACK_SCRIPT, "a2")
        token = register(client)
        session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                 headers=auth(token)).json()["session_id"]
        client.post(f"/sessions/{session_id}/questions", json={"text": "q1"},
                    headers=auth(token))
        client.post(f"/sessions/{session_id}/submission", json={"text": "sub"},
                    headers=auth(token))
        client.post(f"/sessions/{session_id}/feedback", headers=auth(token))
        client.post(f"/sessions/{session_id}/questions", json={"text": "q2"},
                    headers=auth(token))
        client.post(f"/sessions/{session_id}/survey", json={"category": "Helpful"},
                    headers=auth(token))
        state = client.app.state.tutor
        kinds = [e.kind.value for e in state.log.query()]
        assert sorted(kinds) == sorted([
            "QuestionAsked", "SubmissionRecorded", "FeedbackRequested",
            "QuestionAsked", "SurveyAnswered",
        ])


class TestRateLimit:
    def test_429_after_budget(self, tmp_path):
        provider = ScriptedProvider(["r"] * 40)
        config = ServiceConfig(
            corpus_path=HW1_CORPUS_PATH,
            log_store_path=str(tmp_path / "rl.log"),
            rate_limit_per_hour=3,
        )
        with TestClient(create_app(config, provider=provider)) as client:
            token = register(client)
            session_id = client.post("/sessions", json={"problem_index": "2.5-1"},
                                     headers=auth(token)).json()["session_id"]
            for _ in range(3):
                assert client.post(f"/sessions/{session_id}/questions",
                                   json={"text": "q"}, headers=auth(token)).status_code == 200
            resp = client.post(f"/sessions/{session_id}/questions",
                               json={"text": "q"}, headers=auth(token))
            assert resp.status_code == 429
            assert resp.json()["retryable"] is True


class TestConfig:
    def test_missing_required_fields_abort(self):
        with pytest.raises(ConfigError):
            ServiceConfig().validate()

    def test_out_of_range_knobs_abort(self, tmp_path):
        config = ServiceConfig(
            corpus_path=HW1_CORPUS_PATH,
            log_store_path=str(tmp_path / "x.log"),
            retrieval_floor=2.0,
        )
        with pytest.raises(ConfigError):
            config.validate()

    def test_yaml_round_trip(self, tmp_path):
        from smarttutor.config import load_config

        path = tmp_path / "config.yaml"
        path.write_text(
            "corpus_path: {corpus}\nlog_store_path: {log}\n"
            "retrieval_k: 6\nprovider:\n  kind: scripted\n".format(
                corpus=HW1_CORPUS_PATH, log=tmp_path / "e.log"
            )
        )
        config = load_config(str(path))
        config.validate()
        assert config.retrieval_k == 6
