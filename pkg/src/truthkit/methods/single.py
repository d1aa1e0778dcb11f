"""Truth methods that need only the primary generation: sequence confidence,
P(true), verbalized confidence, token-level relevance-weighted confidence, and
the document entailment check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..backends.entailment import EntailmentProvider, LexicalEntailment, VERDICT_VALUE
from ..backends.similarity import SimilarityProvider, UnigramCosineSimilarity
from ..errors import MethodFailure
from ..prompts import render
from ..textnorm import first_integer, simple_tokens
from ..types import ChatMessage, GenerationRecord, TruthScore, last_user_content
from .base import TruthMethod

_TRUE_WORDS = frozenset({"a", "true"})
_FALSE_WORDS = frozenset({"b", "false"})


def confidence_mean_logprob(record: GenerationRecord, method_id: str = "confidence") -> TruthScore:
    """Length-normalized sequence confidence: the arithmetic mean of token logprobs."""
    if not record.tokens:
        raise MethodFailure("record carries no token logprobs")
    mean = record.cumulative_logprob / len(record.tokens)
    return TruthScore(method_id, mean, details={"num_tokens": len(record.tokens)})


class Confidence(TruthMethod):
    method_id = "confidence"

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        return confidence_mean_logprob(record, self.method_id)


class PTrue(TruthMethod):
    """Asks the scored model whether its own answer is true.

    With logprobs available, the probability mass on the A/True choice tokens is
    renormalized over the mass found on both choices; otherwise a deterministic
    completion is parsed to a hard 0/1.
    """

    method_id = "p_true"

    def __init__(self, top_k: int = 10):
        super().__init__()
        self.top_k = top_k

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        if not record.text:
            raise MethodFailure("cannot judge an empty answer")
        prompt = render("p_true", question=last_user_content(messages), answer=record.text)
        ask = [ChatMessage("user", prompt)]
        reply = handle.chat_complete(
            ask, config, temperature=0.0, max_new_tokens=8,
            top_logprobs=self.top_k if handle.spec.supports_logprobs else None,
        )

        if reply.top_logprobs:
            alternatives = reply.top_logprobs[0]
            p_true = sum(
                math.exp(lp) for tok, lp in alternatives.items()
                if tok.strip().lower() in _TRUE_WORDS
            )
            p_false = sum(
                math.exp(lp) for tok, lp in alternatives.items()
                if tok.strip().lower() in _FALSE_WORDS
            )
            if p_true + p_false > 0:
                return TruthScore(
                    self.method_id,
                    p_true / (p_true + p_false),
                    details={"mode": "logprobs", "mass": p_true + p_false},
                )

        # "a" is an article to the normalizer but a choice token here
        for word in simple_tokens(reply.text):
            if word in _TRUE_WORDS:
                return TruthScore(self.method_id, 1.0, details={"mode": "text"})
            if word in _FALSE_WORDS:
                return TruthScore(self.method_id, 0.0, details={"mode": "text"})
        raise MethodFailure(f"no A/B choice found in reply: {reply.text!r}")


class VerbalizedConfidence(TruthMethod):
    """Asks the model to restate its confidence as an integer 0-100."""

    method_id = "verbalized_confidence"

    _RETRY = "Reply with a single integer between 0 and 100 and nothing else."

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        if not record.text:
            raise MethodFailure("cannot rate an empty answer")
        prompt = render(
            "verbalized_confidence",
            question=last_user_content(messages),
            answer=record.text,
        )
        ask = [ChatMessage("user", prompt)]
        reply = handle.chat_complete(ask, config, temperature=0.0, max_new_tokens=8)
        value = first_integer(reply.text)
        if value is None:
            retry = ask + [
                ChatMessage("assistant", reply.text or "(empty)"),
                ChatMessage("user", self._RETRY),
            ]
            reply = handle.chat_complete(retry, config, temperature=0.0, max_new_tokens=8)
            value = first_integer(reply.text)
        if value is None:
            raise MethodFailure(f"no integer in confidence reply: {reply.text!r}")
        return TruthScore(
            self.method_id,
            min(max(value / 100.0, 0.0), 1.0),
            details={"stated": value},
        )


def token_sar(
    record: GenerationRecord,
    similarity: SimilarityProvider,
    method_id: str = "token_sar",
) -> TruthScore:
    """Relevance-weighted mean logprob.

    A token's relevance is how much the answer's meaning moves when that token
    is deleted (1 - similarity to the full text); weights are the normalized
    relevances, uniform when every deletion is meaning-preserving.
    """
    if not record.tokens:
        raise MethodFailure("record carries no token logprobs")
    texts = [t.token_text for t in record.tokens]
    full = record.text
    relevances = []
    for i in range(len(texts)):
        variant = "".join(texts[:i] + texts[i + 1 :])
        relevances.append(1.0 - similarity.similarity(full, variant))
    total = sum(relevances)
    n = len(relevances)
    weights = [r / total for r in relevances] if total > 0 else [1.0 / n] * n
    value = sum(w * t.logprob for w, t in zip(weights, record.tokens))
    return TruthScore(method_id, value, details={"relevances": relevances})


class TokenSar(TruthMethod):
    method_id = "token_sar"

    def __init__(self, similarity: SimilarityProvider | None = None):
        super().__init__()
        self.similarity = similarity or UnigramCosineSimilarity()

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        return token_sar(record, self.similarity, self.method_id)


@dataclass
class DocumentSet:
    """Grounding passages with parallel source ids."""

    passages: list[str]
    source_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.passages:
            raise ValueError("document set must hold at least one passage")
        if not self.source_ids:
            self.source_ids = [f"doc{i}" for i in range(len(self.passages))]
        if len(self.passages) != len(self.source_ids):
            raise ValueError("passages and source_ids must have equal length")
        if any(not p for p in self.passages):
            raise ValueError("passages must be non-empty strings")

    def __len__(self) -> int:
        return len(self.passages)


def document_check(
    record: GenerationRecord,
    documents: DocumentSet,
    entailment: EntailmentProvider,
    method_id: str = "document_check",
) -> TruthScore:
    """Best entailment support for the answer across the grounding passages."""
    if len(documents) == 0:
        raise ValueError("document set must be non-empty")
    best = -1.0
    best_id = None
    verdicts = []
    for passage, source_id in zip(documents.passages, documents.source_ids):
        verdict = entailment.entail("", passage, record.text)
        verdicts.append(verdict.label)
        value = VERDICT_VALUE[verdict.label]
        if value > best:
            best, best_id = value, source_id
    return TruthScore(
        method_id, best, details={"supporting_passage": best_id, "verdicts": verdicts}
    )


class DocumentCheck(TruthMethod):
    method_id = "document_check"

    def __init__(self, documents: DocumentSet, entailment: EntailmentProvider | None = None):
        super().__init__()
        self.documents = documents
        self.entailment = entailment or LexicalEntailment()

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        return document_check(record, self.documents, self.entailment, self.method_id)
