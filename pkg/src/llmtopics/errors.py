"""Exception hierarchy shared by the whole package.

Every error carries a stable ``error_class`` name so the CLI can emit a
one-line machine-parseable failure (``<ErrorClass>: <message>``).
"""


class LlmTopicsError(Exception):
    """Base class for all package errors."""

    @property
    def error_class(self) -> str:
        return type(self).__name__


class EmptyCorpus(LlmTopicsError):
    """Raised when an operation needs documents and none survive."""


class SubsetTooLarge(LlmTopicsError):
    """Requested subset size exceeds the corpus size."""


class UnknownCategory(LlmTopicsError):
    """No document in the corpus carries the requested category label."""


class AuthError(LlmTopicsError):
    """API credential missing from the environment or rejected by the backend."""


class RateLimited(LlmTopicsError):
    """Retries exhausted while the backend kept rate-limiting or failing."""


class MalformedBackendReply(LlmTopicsError):
    """Backend response body could not be parsed as a chat completion."""


class Truncated(LlmTopicsError):
    """Backend stopped generating before the completion was finished."""


class MergeOfOne(LlmTopicsError):
    """Merging needs at least two topic sets."""


class MissingCategory(LlmTopicsError):
    """A category-conditioned prompt was requested without a category."""


class PipelineAborted(LlmTopicsError):
    """A pipeline run gave up on a prompt after exhausting its retries.

    ``subset_index`` points at the failing prompt slot (-1 for the merge
    step) and ``parse_report`` holds the last parse attempt, when parsing
    rather than transport was the problem.
    """

    def __init__(self, message, subset_index=None, parse_report=None, cause=None):
        super().__init__(message)
        self.subset_index = subset_index
        self.parse_report = parse_report
        self.cause = cause


class ContextBudgetExceeded(LlmTopicsError):
    """A rendered prompt does not fit the configured context budget."""
