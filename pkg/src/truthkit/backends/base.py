"""Backend contract: model specs and the transport interface methods call into."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from urllib.parse import urlparse

from ..types import ChatMessage, GenerationConfig, GenerationRecord


@dataclass(frozen=True)
class ModelSpec:
    """Configuration of one hosted model."""

    model_name: str
    endpoint_url: str = "http://localhost:8000/v1/chat/completions"
    api_key_env: str = "TRUTHKIT_API_KEY"
    request_timeout: float = 30.0
    supports_logprobs: bool = True

    def __post_init__(self):
        parsed = urlparse(self.endpoint_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"endpoint_url is not a well-formed http(s) URL: {self.endpoint_url!r}")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be > 0")


class Backend(ABC):
    """Transport to a model. Implementations must be safely shareable across threads."""

    @abstractmethod
    def chat_complete(
        self,
        spec: ModelSpec,
        messages: list[ChatMessage],
        config: GenerationConfig,
        *,
        temperature: float | None = None,
        max_new_tokens: int | None = None,
        top_logprobs: int | None = None,
    ) -> GenerationRecord:
        """One chat completion; tokens populated iff the model exposes logprobs."""

    @abstractmethod
    def sample_n(
        self,
        spec: ModelSpec,
        messages: list[ChatMessage],
        config: GenerationConfig,
        n: int,
    ) -> list[GenerationRecord]:
        """n sampled completions at ``config.sampling_temperature``, in index order."""


@dataclass(frozen=True)
class ModelHandle:
    """A backend bound to one model spec; what truth methods receive to make calls."""

    backend: Backend
    spec: ModelSpec

    def chat_complete(self, messages, config, **opts) -> GenerationRecord:
        return self.backend.chat_complete(self.spec, messages, config, **opts)

    def sample_n(self, messages, config, n) -> list[GenerationRecord]:
        return self.backend.sample_n(self.spec, messages, config, n)

    def with_spec(self, spec: ModelSpec) -> "ModelHandle":
        """Same transport, different model (examiner, reviewer, judge, ...)."""
        return ModelHandle(self.backend, spec)
