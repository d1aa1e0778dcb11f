"""Exception hierarchy shared across the toolkit."""


class TruthkitError(Exception):
    """Base class for all toolkit errors."""


class TranscriptError(TruthkitError, ValueError):
    """A chat transcript violates the message-shape rules."""


class RegistryError(TruthkitError):
    """Duplicate or unknown method id in the method registry."""


class BackendError(TruthkitError):
    """Transport-level failure talking to a model endpoint (retries exhausted)."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class EndpointConfigError(TruthkitError):
    """The endpoint rejected the request outright (HTTP 4xx); fix the configuration."""


class ProtocolError(TruthkitError):
    """The endpoint answered with a body that does not follow the chat-completions schema."""


class ScriptMissError(TruthkitError):
    """A mock request had no matching rule in the script. Never defaults silently."""


class MethodFailure(TruthkitError):
    """Raised inside a truth method; the caller turns it into the failure sentinel."""


class FitError(TruthkitError):
    """A normalizer was asked to fit unusable data."""


class MetricUndefinedError(TruthkitError):
    """The requested metric is undefined for the given labels/scores."""


class DatasetError(TruthkitError):
    """A dataset or fixture file is missing or malformed."""


class DecompositionError(TruthkitError):
    """The decomposer did not produce a parseable claim list."""


class EvaluationAborted(TruthkitError):
    """Too many rows failed; carries the partial report that was still computable."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
