"""Exception hierarchy shared across the tutor service.

Every error carries a machine-readable code and a retryable flag so the
HTTP layer can serialize a uniform error envelope.
"""


class TutorError(Exception):
    code = "internal"
    retryable = False

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


class ParseError(TutorError):
    code = "corpus_parse_error"

    def __init__(self, message: str, locator: str = ""):
        super().__init__(message)
        self.locator = locator


class DuplicateIndexError(TutorError):
    code = "duplicate_problem_index"


class EmbedderUnavailable(TutorError):
    code = "embedder_unavailable"
    retryable = True


class DimensionMismatch(TutorError):
    code = "dimension_mismatch"


class ProviderTimeout(TutorError):
    code = "provider_timeout"
    retryable = True


class ProviderRejected(TutorError):
    code = "provider_rejected"


class RetriesExhausted(TutorError):
    code = "retries_exhausted"
    retryable = True


class UnknownProblem(TutorError):
    code = "unknown_problem"


class EmptySubmission(TutorError):
    code = "empty_submission"


class NoSubmission(TutorError):
    code = "no_submission"


class DuplicateEventError(TutorError):
    code = "duplicate_event_id"


class StorageFull(TutorError):
    code = "storage_full"
    retryable = True


class InvalidSurvey(TutorError):
    code = "invalid_survey"


class ConfigError(TutorError):
    code = "bad_config"


class RateLimited(TutorError):
    code = "rate_limited"
    retryable = True
