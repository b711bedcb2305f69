"""
Errors - Shared exception hierarchy
FROZEN MODULE - Pure stdlib
"""

from typing import Optional


class WikitrendsError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 4


class ConfigError(WikitrendsError):
    """Configuration is invalid or incomplete."""

    exit_code = 2

    def __init__(self, message: str, errors: Optional[list] = None):
        super().__init__(message)
        self.errors = list(errors or [])


class DataError(WikitrendsError):
    """Input data cannot be processed."""

    exit_code = 3


class MalformedLine(DataError):
    pass


class ParseError(DataError):
    pass


class EmptyRange(DataError):
    pass


class InvalidSpec(DataError):
    pass


class CacheFormatError(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class EmptyGraph(DataError):
    pass


class EmptyCluster(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class InvalidK(DataError):
    pass


class BadTopicIndex(DataError):
    pass


class EmptyTrainingSet(DataError):
    pass


class EmptyTestSet(DataError):
    pass


class UnlabelableCluster(DataError):
    pass


class InconsistentInputs(DataError):
    pass


class NoTrends(DataError):
    pass


class UnsupportedFormat(DataError):
    pass


class FetchError(WikitrendsError):
    """Remote summary endpoint failed."""

    exit_code = 3


class NotFound(FetchError):
    pass


class TransportError(FetchError):
    pass


class RateLimited(FetchError):
    """HTTP 429; callers should wait ``retry_after`` seconds."""

    def __init__(self, message: str, retry_after: float = 1.0):
        super().__init__(message)
        self.retry_after = retry_after


class StageError(WikitrendsError):
    """A pipeline stage failed; the original error is ``__cause__``."""

    def __init__(self, stage: str, language: str, cause: BaseException):
        super().__init__(f"[{language}:{stage}] {cause}")
        self.stage = stage
        self.language = language
        self.cause = cause

    @property
    def exit_code(self) -> int:  # type: ignore[override]
        return exit_code_for(self.cause)


class SingleClassWarning(UserWarning):
    """Training data holds a single label; the classifier is constant."""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit status."""
    if isinstance(error, WikitrendsError):
        return error.exit_code
    if isinstance(error, OSError):
        return 3
    return 4
