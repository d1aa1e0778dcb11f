"""Entailment providers: lexical fallback and LLM judge.

Entailment is asymmetric here; callers needing symmetry ask both directions.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

from .. import textnorm
from ..errors import ProtocolError
from ..prompts import render
from ..types import ChatMessage, GenerationConfig
from .base import ModelHandle

ENTAIL = "ENTAIL"
NEUTRAL = "NEUTRAL"
CONTRADICT = "CONTRADICT"
LABELS = (ENTAIL, NEUTRAL, CONTRADICT)

#: Numeric map used wherever verdicts feed an affinity or a document score.
VERDICT_VALUE = {ENTAIL: 1.0, NEUTRAL: 0.5, CONTRADICT: 0.0}


@dataclass(frozen=True)
class EntailmentVerdict:
    label: str
    raw_text: str = ""
    #: set when the provider could not parse a judgment and fell back to NEUTRAL
    flagged: bool = False

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown entailment label {self.label!r}")

    @property
    def value(self) -> float:
        return VERDICT_VALUE[self.label]


class EntailmentProvider(ABC):
    @abstractmethod
    def entail(self, context: str, premise: str, hypothesis: str) -> EntailmentVerdict:
        """Judge whether *premise* entails *hypothesis*, given optional *context*."""

    def _check_args(self, premise: str, hypothesis: str) -> None:
        if not premise or not hypothesis:
            raise ValueError("premise and hypothesis must be non-empty")

    def bidirectional_entail(self, context: str, a: str, b: str) -> bool:
        """True iff both directions come back ENTAIL."""
        if self.entail(context, a, b).label != ENTAIL:
            return False
        return self.entail(context, b, a).label == ENTAIL


class LexicalEntailment(EntailmentProvider):
    """Offline fallback with documented, crude semantics.

    After normalization, one token set containing the other reads as ENTAIL,
    disjoint sets as CONTRADICT, anything else as NEUTRAL. Context is ignored.
    """

    def entail(self, context: str, premise: str, hypothesis: str) -> EntailmentVerdict:
        self._check_args(premise, hypothesis)
        a = set(textnorm.tokens(premise))
        b = set(textnorm.tokens(hypothesis))
        if a <= b or b <= a:
            return EntailmentVerdict(ENTAIL)
        if not a & b:
            return EntailmentVerdict(CONTRADICT)
        return EntailmentVerdict(NEUTRAL)


_RETRY_NUDGE = (
    "That was not a valid label. Reply with exactly one word: "
    "ENTAIL, NEUTRAL, or CONTRADICT."
)


class JudgeEntailment(EntailmentProvider):
    """Asks a judge model for one of the three labels; parses case-insensitively."""

    def __init__(self, handle: ModelHandle, config: GenerationConfig | None = None):
        self.handle = handle
        self.config = config or GenerationConfig()

    def entail(self, context: str, premise: str, hypothesis: str) -> EntailmentVerdict:
        self._check_args(premise, hypothesis)
        prompt = render(
            "entailment",
            context_clause=f" in the context of: {context}" if context else "",
            premise=premise,
            hypothesis=hypothesis,
        )
        messages = [ChatMessage("user", prompt)]
        reply = self.handle.chat_complete(
            messages, self.config, temperature=0.0, max_new_tokens=8
        )
        label = _parse_label(reply.text)
        if label is not None:
            return EntailmentVerdict(label, raw_text=reply.text)
        retry = messages + [
            ChatMessage("assistant", reply.text or "(empty)"),
            ChatMessage("user", _RETRY_NUDGE),
        ]
        reply2 = self.handle.chat_complete(retry, self.config, temperature=0.0, max_new_tokens=8)
        label2 = _parse_label(reply2.text)
        if label2 is not None:
            return EntailmentVerdict(label2, raw_text=reply2.text)
        return EntailmentVerdict(NEUTRAL, raw_text=reply2.text, flagged=True)


def _parse_label(text: str) -> str | None:
    """Map a judge reply to a label; None when zero or several labels appear."""
    if not text:
        return None
    lowered = text.lower()
    found = [lab for lab in LABELS if lab.lower() in lowered]
    # "contradiction"/"entailment" variants still contain the stems matched above
    if len(found) == 1:
        return found[0]
    return None


def parse_label_or_protocol_error(text: str) -> str:
    """Strict variant for scripted verdicts, where ambiguity means a broken fixture."""
    label = _parse_label(text)
    if label is None:
        raise ProtocolError(f"not an entailment label: {text!r}")
    return label
