import pytest

from smarttutor.errors import ProviderRejected, RetriesExhausted
from smarttutor.llm_gateway import (
    CompletionRequest,
    PromptMessage,
    Purpose,
    Role,
    ScriptedProvider,
    ScriptFailure,
)


def make_request(purpose=Purpose.QA):
    return CompletionRequest(
        messages=(
            PromptMessage(Role.SYSTEM, "tutor"),
            PromptMessage(Role.USER, "question"),
        ),
        purpose=purpose,
    )


class TestRequestValidation:
    def test_first_message_must_be_system(self):
        with pytest.raises(ValueError):
            CompletionRequest(
                messages=(PromptMessage(Role.USER, "q"),), purpose=Purpose.QA
            )

    def test_needs_user_message(self):
        with pytest.raises(ValueError):
            CompletionRequest(
                messages=(PromptMessage(Role.SYSTEM, "s"),), purpose=Purpose.QA
            )

    def test_empty_system_content_rejected(self):
        with pytest.raises(ValueError):
            PromptMessage(Role.SYSTEM, "")

    def test_temperature_defaults_per_purpose(self):
        assert make_request(Purpose.QA).temperature == 0.7
        assert make_request(Purpose.METRIC_EVAL).temperature == 0.2
        assert make_request(Purpose.SUMMARY).temperature == 0.2


class TestScriptedProvider:
    def test_scripted_echo(self):
        provider = ScriptedProvider(["R"])
        result = provider.complete(make_request())
        assert result.text == "R"
        assert result.attempt_count == 1

    def test_fail_twice_then_succeed(self):
        provider = ScriptedProvider(
            [ScriptFailure(), ScriptFailure(), "ok"], max_retries=3
        )
        result = provider.complete(make_request())
        assert result.text == "ok"
        assert result.attempt_count == 3

    def test_always_fail_exhausts_retries(self):
        provider = ScriptedProvider(
            [ScriptFailure()] * 10, max_retries=2
        )
        with pytest.raises(RetriesExhausted):
            provider.complete(make_request())
        # exactly 3 attempts: 3 script entries consumed
        assert len(provider._script) == 7

    def test_transcript_replayed_in_order(self):
        provider = ScriptedProvider(["a", "b", "c"])
        assert [provider.complete(make_request()).text for _ in range(3)] == ["a", "b", "c"]

    def test_exhausted_script_rejects(self):
        provider = ScriptedProvider([])
        with pytest.raises(ProviderRejected):
            provider.complete(make_request())


class TestCallAccounting:
    def test_fresh_provider_zero_everywhere(self):
        provider = ScriptedProvider(["x"])
        for purpose in Purpose:
            assert provider.call_count(purpose) == 0

    def test_counts_by_tag(self):
        provider = ScriptedProvider(["x", "y"])
        provider.complete(make_request(Purpose.QA))
        assert provider.call_count(Purpose.QA) == 1
        assert provider.call_count(Purpose.METRIC_EVAL) == 0

    def test_failed_attempts_not_counted(self):
        provider = ScriptedProvider([ScriptFailure(), "ok"])
        provider.complete(make_request(Purpose.QA))
        assert provider.call_count(Purpose.QA) == 1

    def test_reset(self):
        provider = ScriptedProvider(["x"])
        provider.complete(make_request(Purpose.QA))
        provider.reset_counts()
        assert provider.call_count(Purpose.QA) == 0
