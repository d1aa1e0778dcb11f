"""Core data model: chat messages, generation records, truth scores, sample pools."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import TranscriptError

ROLES = ("system", "user", "assistant")
FINISH_REASONS = ("stop", "length", "error")

#: Raw value reported by a truth method that failed internally. Rows carrying it
#: are dropped or ranked worst at evaluation time, per configuration.
FAILURE_SENTINEL = float("-inf")


@dataclass(frozen=True)
class ChatMessage:
    """One turn of a chat transcript."""

    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise TranscriptError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise TranscriptError(f"{self.role} message must have non-empty content")

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}

    @staticmethod
    def from_dict(d: dict) -> "ChatMessage":
        return ChatMessage(role=d["role"], content=d["content"])


def validate_transcript(messages: list[ChatMessage]) -> None:
    """Check a transcript is usable as a generation prompt: non-empty, ends on a user turn."""
    if not messages:
        raise TranscriptError("transcript is empty")
    if messages[-1].role != "user":
        raise TranscriptError("last message of a generation prompt must have role=user")


def last_user_content(messages: list[ChatMessage]) -> str:
    """Content of the final user message (the question being answered)."""
    for msg in reversed(messages):
        if msg.role == "user":
            return msg.content
    raise TranscriptError("transcript has no user message")


def replace_last_user(messages: list[ChatMessage], content: str) -> list[ChatMessage]:
    """Copy of the transcript with the final user message swapped for *content*."""
    out = list(messages)
    for i in range(len(out) - 1, -1, -1):
        if out[i].role == "user":
            out[i] = ChatMessage("user", content)
            return out
    raise TranscriptError("transcript has no user message")


@dataclass
class GenerationConfig:
    """Generation parameters shared by the primary call and the sample pool."""

    temperature: float = 1.0
    max_new_tokens: int = 64
    num_samples: int = 5
    sampling_temperature: float = 1.0
    seed: int = 0
    max_concurrency: int = 1

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.sampling_temperature < 0:
            raise ValueError("sampling_temperature must be non-negative")
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")


@dataclass(frozen=True)
class TokenInfo:
    """One generated token with its natural-log probability."""

    token_text: str
    logprob: float

    def __post_init__(self):
        # exp(logprob) must land in (0, 1]: nonpositive and finite
        if self.logprob > 0 or not math.isfinite(self.logprob):
            raise ValueError(f"logprob must be finite and <= 0, got {self.logprob}")


@dataclass(frozen=True)
class GenerationRecord:
    """One model response.

    ``tokens`` may be empty when the backend withholds logprobs. When present,
    ``text`` must equal the concatenated token texts and ``cumulative_logprob``
    their sum. ``top_logprobs`` optionally carries per-position alternatives
    (token -> logprob) for methods that inspect the head of the distribution.
    """

    text: str
    tokens: tuple[TokenInfo, ...] = ()
    cumulative_logprob: float = 0.0
    finish_reason: str = "stop"
    top_logprobs: tuple[dict[str, float], ...] | None = None

    def __post_init__(self):
        if self.finish_reason not in FINISH_REASONS:
            raise ValueError(f"unknown finish_reason {self.finish_reason!r}")
        if self.cumulative_logprob > 0:
            raise ValueError("cumulative_logprob must be <= 0")
        if self.tokens:
            total = sum(t.logprob for t in self.tokens)
            if abs(total - self.cumulative_logprob) > 1e-9:
                raise ValueError(
                    f"cumulative_logprob {self.cumulative_logprob} does not match "
                    f"token sum {total}"
                )
            concat = "".join(t.token_text for t in self.tokens)
            if concat != self.text:
                raise ValueError("text does not equal the concatenation of token texts")

    @staticmethod
    def from_tokens(
        pairs: list[tuple[str, float]],
        finish_reason: str = "stop",
        text: str | None = None,
        top_logprobs: list[dict[str, float]] | None = None,
    ) -> "GenerationRecord":
        """Build a record from (token_text, logprob) pairs; text and sum are derived."""
        toks = tuple(TokenInfo(t, lp) for t, lp in pairs)
        return GenerationRecord(
            text=text if text is not None else "".join(t.token_text for t in toks),
            tokens=toks,
            cumulative_logprob=sum(t.logprob for t in toks),
            finish_reason=finish_reason,
            top_logprobs=tuple(top_logprobs) if top_logprobs is not None else None,
        )

    def mean_logprob(self) -> float:
        if not self.tokens:
            raise ValueError("record has no token logprobs")
        return self.cumulative_logprob / len(self.tokens)


@dataclass
class TruthScore:
    """One truth method's verdict on one generation or claim.

    ``raw_value`` is always oriented so that higher means more likely truthful;
    uncertainty-style quantities are negated at the method boundary.
    """

    method_id: str
    raw_value: float
    normalized_value: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.normalized_value is not None and not 0.0 <= self.normalized_value <= 1.0:
            raise ValueError("normalized_value must lie in [0, 1]")

    @property
    def failed(self) -> bool:
        return math.isinf(self.raw_value) and self.raw_value < 0


def failure_score(method_id: str, error: BaseException | str) -> TruthScore:
    """The sentinel score recorded when a method fails internally."""
    return TruthScore(
        method_id=method_id,
        raw_value=FAILURE_SENTINEL,
        details={"error": str(error)},
    )


@dataclass
class SamplePool:
    """Sampled responses shared by all sampling-based methods for one generation.

    Index 0 is the primary generation when ``includes_target`` is set; methods
    score the actual answer against the remaining samples.
    """

    samples: list[GenerationRecord]
    includes_target: bool = True

    def __post_init__(self):
        if not self.samples:
            raise ValueError("sample pool must hold at least one record")

    @staticmethod
    def build(primary: GenerationRecord, samples: list[GenerationRecord]) -> "SamplePool":
        return SamplePool(samples=[primary, *samples], includes_target=True)

    @property
    def size(self) -> int:
        return len(self.samples)

    @property
    def target_index(self) -> int:
        return 0

    def texts(self) -> list[str]:
        return [r.text for r in self.samples]

    def take(self, num_samples: int) -> "SamplePool":
        """Sub-pool with the target plus the first *num_samples* samples."""
        if not self.includes_target:
            return SamplePool(self.samples[:num_samples], includes_target=False)
        return SamplePool(self.samples[: num_samples + 1], includes_target=True)

    def has_logprobs(self) -> bool:
        return all(r.tokens for r in self.samples)
