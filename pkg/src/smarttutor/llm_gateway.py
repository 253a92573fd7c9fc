"""Uniform completion interface over interchangeable LLM providers.

All tests run against the scripted provider, which replays a configured
transcript verbatim.  The remote provider speaks an OpenAI-style chat API
and reads its key from the TUTOR_LLM_API_KEY environment variable.
"""

from __future__ import annotations

import os
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import ProviderRejected, ProviderTimeout, RetriesExhausted

DEFAULT_MAX_RETRIES = 3
DEFAULT_BACKOFF_S = 0.5

# grading rounds need stable output; QA reads better with some variety
TEMPERATURE_DEFAULTS = {
    "QA": 0.7,
    "MetricEval": 0.2,
    "Summary": 0.2,
    "LogSummary": 0.2,
}


class Role(Enum):
    SYSTEM = "System"
    USER = "User"
    ASSISTANT = "Assistant"


class Purpose(Enum):
    QA = "QA"
    METRIC_EVAL = "MetricEval"
    SUMMARY = "Summary"
    LOG_SUMMARY = "LogSummary"


@dataclass(frozen=True)
class PromptMessage:
    role: Role
    content: str

    def __post_init__(self):
        if self.role in (Role.SYSTEM, Role.USER) and not self.content:
            raise ValueError(f"{self.role.value} message content must be non-empty")


@dataclass(frozen=True)
class CompletionRequest:
    messages: tuple[PromptMessage, ...]
    purpose: Purpose
    max_tokens: int = 1024
    temperature: Optional[float] = None

    def __post_init__(self):
        if not self.messages or self.messages[0].role != Role.SYSTEM:
            raise ValueError("first message must be System")
        if not any(m.role == Role.USER for m in self.messages):
            raise ValueError("at least one User message required")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")
        if self.temperature is None:
            object.__setattr__(
                self, "temperature", TEMPERATURE_DEFAULTS[self.purpose.value]
            )
        elif self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class CompletionResult:
    text: str
    provider_id: str
    latency_ms: int
    attempt_count: int


class Provider:
    """Base provider: retry loop with exponential backoff plus call accounting."""

    provider_id = "base"

    def __init__(self, max_retries: int = DEFAULT_MAX_RETRIES,
                 backoff_s: float = DEFAULT_BACKOFF_S):
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._counts: Counter = Counter()
        self._lock = threading.Lock()

    def _send(self, request: CompletionRequest) -> str:
        raise NotImplementedError

    def complete(self, request: CompletionRequest) -> CompletionResult:
        start = time.monotonic()
        attempts = 0
        last_error: Optional[Exception] = None
        while attempts <= self.max_retries:
            attempts += 1
            try:
                text = self._send(request)
            except ProviderTimeout as exc:
                last_error = exc
                if attempts <= self.max_retries and self.backoff_s > 0:
                    time.sleep(self.backoff_s * (2 ** (attempts - 1)))
                continue
            except ProviderRejected:
                raise
            with self._lock:
                self._counts[request.purpose] += 1
            latency = int((time.monotonic() - start) * 1000)
            return CompletionResult(text, self.provider_id, latency, attempts)
        raise RetriesExhausted(
            f"gave up after {attempts} attempts: {last_error}"
        )

    def call_count(self, purpose: Purpose) -> int:
        with self._lock:
            return self._counts[purpose]

    def reset_counts(self) -> None:
        with self._lock:
            self._counts.clear()


class ScriptFailure:
    """Marker entry in a scripted transcript: raise instead of answering."""

    def __init__(self, error: Exception | None = None):
        self.error = error or ProviderTimeout("scripted failure")


@dataclass
class ScriptedCall:
    request: CompletionRequest
    response: str


class ScriptedProvider(Provider):
    """Replays a configured list of responses in order; bit-reproducible."""

    provider_id = "scripted"

    def __init__(self, script: Optional[list] = None, max_retries: int = DEFAULT_MAX_RETRIES):
        super().__init__(max_retries=max_retries, backoff_s=0.0)
        self._script: list = list(script or [])
        self._script_lock = threading.Lock()
        self.calls: list[ScriptedCall] = []

    def load(self, *responses) -> None:
        with self._script_lock:
            self._script.extend(responses)

    def _send(self, request: CompletionRequest) -> str:
        with self._script_lock:
            if not self._script:
                raise ProviderRejected("scripted provider transcript exhausted")
            entry = self._script.pop(0)
        if isinstance(entry, ScriptFailure):
            raise entry.error
        self.calls.append(ScriptedCall(request, entry))
        return entry


class HttpProvider(Provider):
    """OpenAI-style chat completion over HTTP; vendor kept out of other modules."""

    provider_id = "http"

    def __init__(self, endpoint: str, model: str,
                 max_retries: int = DEFAULT_MAX_RETRIES,
                 backoff_s: float = DEFAULT_BACKOFF_S,
                 timeout_s: float = 60.0):
        super().__init__(max_retries=max_retries, backoff_s=backoff_s)
        self.endpoint = endpoint
        self.model = model
        self.timeout_s = timeout_s
        api_key = os.environ.get("TUTOR_LLM_API_KEY")
        if not api_key:
            raise ProviderRejected("TUTOR_LLM_API_KEY not set")
        self._api_key = api_key

    def _send(self, request: CompletionRequest) -> str:
        import httpx

        role_names = {Role.SYSTEM: "system", Role.USER: "user", Role.ASSISTANT: "assistant"}
        payload = {
            "model": self.model,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "messages": [
                {"role": role_names[m.role], "content": m.content}
                for m in request.messages
            ],
        }
        try:
            resp = httpx.post(
                self.endpoint,
                json=payload,
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=self.timeout_s,
            )
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(str(exc))
        if resp.status_code >= 500:
            raise ProviderTimeout(f"server error {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderRejected(f"provider rejected request: {resp.status_code}")
        return resp.json()["choices"][0]["message"]["content"]


def load_script_file(path: str) -> list:
    """Transcript file for --scripted-provider: one JSON string or {"fail": true} per line."""
    import json

    script: list = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            if isinstance(entry, dict) and entry.get("fail"):
                script.append(ScriptFailure())
            else:
                script.append(str(entry))
    return script
